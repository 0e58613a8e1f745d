#include "dfscavity/core.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfscavity {

namespace {

bool all_finite(std::initializer_list<double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

double SystemParams::max_rate() const {
    double m = 0.0;
    for (double x : {omega1, omega2, k11, k22, k12, k21, delta11, delta22, delta12, delta21})
        m = std::max(m, std::abs(x));
    return m;
}

bool SystemParams::is_physical_dissipator(double tol) const {
    double scale = std::max({std::abs(k11), std::abs(k22), std::abs(k12), std::abs(k21),
                             std::abs(delta12), std::abs(delta21), 1.0});
    // 2x2 PSD of the dissipative kernel: nonnegative diagonal and determinant.
    double w2 = (k12 + k21) * (k12 + k21) + (delta12 - delta21) * (delta12 - delta21);
    return k11 >= -tol * scale && k22 >= -tol * scale &&
           4.0 * k11 * k22 - w2 >= -tol * scale * scale;
}

void SystemParams::validate() const {
    if (!all_finite({omega1, omega2, k11, k22, k12, k21, delta11, delta22, delta12, delta21}))
        throw ValidationError("SystemParams: non-finite entry");
    if (k11 < 0.0 || k22 < 0.0)
        throw ValidationError("SystemParams: diagonal decay rates k11, k22 must be >= 0");
}

int fock_dim(int n_trunc) {
    if (n_trunc < 1)
        throw ValidationError("n_trunc must be >= 1 (one excitation must fit)");
    return (n_trunc + 1) * (n_trunc + 1);
}

int flatten(FockIndex idx, int n_trunc) {
    if (idx.n1 < 0 || idx.n2 < 0 || idx.n1 > n_trunc || idx.n2 > n_trunc) {
        std::ostringstream os;
        os << "Fock index (" << idx.n1 << ", " << idx.n2 << ") outside truncation n_trunc="
           << n_trunc;
        throw TruncationError(os.str());
    }
    return idx.n1 * (n_trunc + 1) + idx.n2;
}

FockIndex unflatten(int flat, int n_trunc) {
    int d = fock_dim(n_trunc);
    if (flat < 0 || flat >= d)
        throw ValidationError("flat Fock index out of range");
    int width = n_trunc + 1;
    return FockIndex{flat / width, flat % width};
}

ModeOperators mode_operators(int n_trunc) {
    int width = n_trunc + 1;
    Matrix a = Matrix::Zero(width, width);
    for (int n = 1; n <= n_trunc; ++n)
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    Matrix id = Matrix::Identity(width, width);
    return ModeOperators{kron(a, id), kron(id, a)};
}

double TwoModeDensityMatrix::tail_population() const {
    double p = 0.0;
    for (int f = 0; f < dim(); ++f) {
        FockIndex idx = unflatten(f, n_trunc);
        if (idx.n1 == n_trunc || idx.n2 == n_trunc)
            p += rho(f, f).real();
    }
    return p;
}

TwoModeDensityMatrix pure_state(const std::vector<std::pair<FockIndex, Complex>>& amplitudes,
                                int n_trunc) {
    int d = fock_dim(n_trunc);
    Vector psi = Vector::Zero(d);
    for (const auto& [idx, amp] : amplitudes)
        psi(flatten(idx, n_trunc)) += amp;
    double norm = psi.norm();
    if (norm == 0.0)
        throw ValidationError("pure_state: all amplitudes vanish, state is degenerate");
    psi /= norm;
    return TwoModeDensityMatrix(n_trunc, psi * psi.adjoint());
}

TwoModeDensityMatrix vacuum_state(int n_trunc) {
    return pure_state({{FockIndex{0, 0}, Complex(1.0, 0.0)}}, n_trunc);
}

void validate_density_matrix(const TwoModeDensityMatrix& state, double expected_trace) {
    if (state.dim() != fock_dim(state.n_trunc))
        throw DiagnosticsError("density matrix dimension does not match its truncation");
    double herm = state.hermiticity_error();
    if (herm > 1e-12) {
        std::ostringstream os;
        os << "density matrix not Hermitian: max asymmetry " << herm;
        throw DiagnosticsError(os.str());
    }
    double tr = state.trace_real();
    // When a reference trace is given (the post-propagation case) roundoff
    // up to the drift allowance may land just above 1; bare inputs get the
    // tight ceiling.
    double ceiling = 1.0 + (expected_trace >= 0.0 ? 1e-10 : 1e-12);
    if (tr < 0.0 || tr > ceiling) {
        std::ostringstream os;
        os << "density matrix trace " << tr << " outside [0, 1]";
        throw DiagnosticsError(os.str());
    }
    if (expected_trace >= 0.0 && std::abs(tr - expected_trace) > 1e-10) {
        std::ostringstream os;
        os << "density matrix trace " << tr << " drifted from expected " << expected_trace;
        throw DiagnosticsError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (state.rho + state.rho.adjoint()),
                                             Eigen::EigenvaluesOnly);
    double min_eig = es.eigenvalues().minCoeff();
    if (min_eig < -1e-9) {
        std::ostringstream os;
        os << "density matrix lost positivity: min eigenvalue " << min_eig;
        throw DiagnosticsError(os.str());
    }
}

double purity(const TwoModeDensityMatrix& state) {
    return (state.rho * state.rho).trace().real();
}

Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector vectorize(const Matrix& rho) {
    Eigen::Index d = rho.rows();
    Vector v(d * d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
            v(i * d + j) = rho(i, j);
    return v;
}

Matrix unvectorize(const Vector& v, int dim) {
    Matrix rho(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            rho(i, j) = v(i * dim + j);
    return rho;
}

} // namespace dfscavity
