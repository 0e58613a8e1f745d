#include "dfscavity/generator.hpp"

#include <cmath>

namespace dfscavity {

namespace {

constexpr Complex kI{0.0, 1.0};

// Row-major vec convention: X rho Y -> (X (x) Y^T) vec(rho).
Matrix left_mult(const Matrix& x) {
    return kron(x, Matrix::Identity(x.rows(), x.cols()));
}

Matrix right_mult(const Matrix& y) {
    return kron(Matrix::Identity(y.rows(), y.cols()), y.transpose());
}

Matrix sandwich(const Matrix& x, const Matrix& y) {
    return kron(x, y.transpose());
}

} // namespace

double LiouvillianMatrix::trace_annihilation_error() const {
    int d = fock_dim(n_trunc);
    double worst = 0.0;
    for (int col = 0; col < dim(); ++col) {
        Complex s{0.0, 0.0};
        for (int i = 0; i < d; ++i)
            s += matrix(i * d + i, col);
        worst = std::max(worst, std::abs(s));
    }
    return worst;
}

double LiouvillianMatrix::hermiticity_preservation_error() const {
    // L maps Hermitian to Hermitian iff L(rho^dag) = (L rho)^dag. With the
    // vec-transpose permutation P(i*d+j) = j*d+i this reads
    // L(r, P(c)) = conj(L(P(r), c)) entrywise.
    int d = fock_dim(n_trunc);
    auto perm = [d](int f) { return (f % d) * d + (f / d); };
    double worst = 0.0;
    for (int r = 0; r < dim(); ++r)
        for (int c = 0; c < dim(); ++c)
            worst = std::max(worst,
                             std::abs(matrix(r, perm(c)) - std::conj(matrix(perm(r), c))));
    return worst;
}

Matrix apply(const LiouvillianMatrix& l, const Matrix& rho) {
    return unvectorize(l.matrix * vectorize(rho), static_cast<int>(rho.rows()));
}

void ReservoirSpectrum::validate() const {
    if (modes.empty())
        throw ValidationError("ReservoirSpectrum: needs at least one mode");
    if (!(tau_c > 0.0) || !std::isfinite(tau_c))
        throw ValidationError("ReservoirSpectrum: tau_c must be positive and finite");
    for (const auto& m : modes) {
        if (!(m.omega_k > 0.0) || !std::isfinite(m.omega_k))
            throw ValidationError("ReservoirSpectrum: mode frequencies must be positive");
        if (!std::isfinite(m.alpha_1k.real()) || !std::isfinite(m.alpha_1k.imag()) ||
            !std::isfinite(m.alpha_2k.real()) || !std::isfinite(m.alpha_2k.imag()))
            throw ValidationError("ReservoirSpectrum: non-finite coupling");
    }
}

LiouvillianMatrix build_liouvillian(const SystemParams& params, int n_trunc) {
    params.validate();
    auto [a1, a2] = mode_operators(n_trunc);
    Matrix a1d = a1.adjoint();
    Matrix a2d = a2.adjoint();
    Matrix n1 = a1d * a1;
    Matrix n2 = a2d * a2;

    auto commutator = [](const Matrix& x) -> Matrix { return left_mult(x) - right_mult(x); };

    Matrix l =
        params.k11 * (2.0 * sandwich(a1, a1d) - right_mult(n1) - left_mult(n1)) +
        kI * (params.delta11 - params.omega1) * commutator(n1) +
        params.k22 * (2.0 * sandwich(a2, a2d) - right_mult(n2) - left_mult(n2)) +
        kI * (params.delta22 - params.omega2) * commutator(n2);

    // Cross-damping: both k_12 and k_21 multiply the same pair of sandwich
    // terms but remove different ordered products.
    l += params.k12 * (sandwich(a1, a2d) + sandwich(a2, a1d) -
                       right_mult(a2d * a1) - left_mult(a1d * a2)) +
         params.k21 * (sandwich(a2, a1d) + sandwich(a1, a2d) -
                       right_mult(a1d * a2) - left_mult(a2d * a1));

    // Cross-shift: antisymmetric combination flips sandwich signs, the
    // symmetric combination is a plain beam-splitter commutator.
    l += kI * (0.5 * (params.delta12 - params.delta21)) *
             (sandwich(a1, a2d) - sandwich(a2, a1d) -
              right_mult(a2d * a1) + left_mult(a1d * a2)) +
         kI * (0.5 * (params.delta21 - params.delta12)) *
             (sandwich(a2, a1d) - sandwich(a1, a2d) -
              right_mult(a1d * a2) + left_mult(a2d * a1)) +
         kI * (0.5 * (params.delta12 + params.delta21)) * commutator(a1d * a2 + a2d * a1);

    return LiouvillianMatrix{n_trunc, params, std::move(l)};
}

SystemParams coefficients_from_couplings(const ReservoirSpectrum& spectrum,
                                         double omega1, double omega2) {
    spectrum.validate();
    double tc = spectrum.tau_c;
    // E(x) = (exp(i x tau_c) - 1) / (i x); expand for small x tau_c so the
    // resonant mode contributes its full tau_c weight without a 0/0.
    auto window = [tc](double x) -> Complex {
        double u = x * tc;
        if (std::abs(u) < 1e-6)
            return Complex(tc) * (1.0 + kI * (u / 2.0) - (u * u / 6.0));
        return (std::exp(kI * u) - 1.0) / (kI * x);
    };

    const double big_omega[2] = {omega1, omega2};
    Complex z[2][2] = {};
    for (const auto& m : spectrum.modes) {
        const Complex alpha[2] = {m.alpha_1k, m.alpha_2k};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                z[i][j] += alpha[i] * std::conj(alpha[j]) * window(m.omega_k - big_omega[j]);
    }

    SystemParams out;
    out.omega1 = omega1;
    out.omega2 = omega2;
    out.k11 = z[0][0].real();
    out.delta11 = z[0][0].imag();
    out.k22 = z[1][1].real();
    out.delta22 = z[1][1].imag();
    out.k12 = z[0][1].real();
    out.delta12 = z[0][1].imag();
    out.k21 = z[1][0].real();
    out.delta21 = z[1][0].imag();
    return out;
}

} // namespace dfscavity
