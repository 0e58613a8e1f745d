#include "dfscavity/dfs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace dfscavity {

namespace {

constexpr Complex kI{0.0, 1.0};

Complex z11_of(const SystemParams& p) { return {p.k11, p.delta11}; }
Complex z22_of(const SystemParams& p) { return {p.k22, p.delta22}; }
Complex z12_of(const SystemParams& p) { return {p.k12, p.delta12}; }
Complex z21_of(const SystemParams& p) { return {p.k21, p.delta21}; }

// Least-squares misfit of the three DFS conditions at mixing ratio k.
double condition_misfit_sq(const SystemParams& p, double k) {
    Complex z11 = z11_of(p);
    return std::norm(z22_of(p) - k * k * z11) + std::norm(z12_of(p) - k * z11) +
           std::norm(z21_of(p) - k * z11);
}

double fit_kappa(const SystemParams& p, double* misfit_out) {
    Complex z11 = z11_of(p);
    double a2 = std::norm(z11);
    if (a2 < 1e-300) {
        // No reference rate to fit against; report zero mixing.
        if (misfit_out) *misfit_out = std::sqrt(condition_misfit_sq(p, 0.0));
        return 0.0;
    }
    // d/dk of the misfit is the cubic 4 a2 k^3 + 4 (a2 - b) k - 2 c with
    // b = Re(z11* z22), c = Re(z11* (z12 + z21)); its real roots are the
    // candidate minima.
    double b = std::real(std::conj(z11) * z22_of(p));
    double c = std::real(std::conj(z11) * (z12_of(p) + z21_of(p)));
    double p1 = (a2 - b) / a2;       // monic cubic k^3 + p1 k + q1
    double q1 = -c / (2.0 * a2);
    Eigen::Matrix3d companion;
    companion << 0.0, 0.0, -q1,
                 1.0, 0.0, -p1,
                 0.0, 1.0, 0.0;
    Eigen::EigenSolver<Eigen::Matrix3d> es(companion);

    double best_k = 0.0;
    double best_f = condition_misfit_sq(p, 0.0);
    for (int i = 0; i < 3; ++i) {
        std::complex<double> root = es.eigenvalues()(i);
        if (std::abs(root.imag()) > 1e-9 * (1.0 + std::abs(root.real())))
            continue;
        double k = root.real();
        double f = condition_misfit_sq(p, k);
        if (f < best_f) {
            best_f = f;
            best_k = k;
        }
    }
    if (misfit_out) *misfit_out = std::sqrt(std::max(best_f, 0.0));
    return best_k;
}

} // namespace

DfsReport dfs_check(const SystemParams& params, double tolerance) {
    params.validate();
    if (!(tolerance >= 0.0))
        throw ValidationError("dfs_check: tolerance must be >= 0");
    PropagatorCoefficients co = compute_coefficients(params, 0.0);

    DfsReport report;
    report.lambda_minus = co.lambda_minus;
    report.lambda_plus = co.lambda_plus;
    double re_minus = std::abs(co.lambda_minus.real());
    double re_plus = std::abs(co.lambda_plus.real());
    report.condition_residual = std::min(re_minus, re_plus);
    if (report.condition_residual <= tolerance)
        report.protected_branch =
            re_minus <= re_plus ? ProtectedBranch::minus : ProtectedBranch::plus;
    report.kappa_fit = fit_kappa(params, &report.kappa_fit_residual);
    return report;
}

NormalModes normal_modes(const SystemParams& params, double kappa, int n_trunc) {
    if (!std::isfinite(kappa))
        throw ValidationError("normal_modes: kappa must be finite");
    auto [a1, a2] = mode_operators(n_trunc);
    double norm = std::sqrt(1.0 + kappa * kappa);
    NormalModes modes;
    modes.kappa = kappa;
    modes.A_matrix = (a1 + kappa * a2) / norm;
    modes.B_matrix = (a2 - kappa * a1) / norm;
    modes.k_aa = params.k11;
    modes.delta_aa = params.delta11;
    return modes;
}

NormalModeSplit normal_mode_split(const SystemParams& params, double kappa, int n_trunc) {
    params.validate();
    Complex z11 = z11_of(params);
    double scale = std::max({std::abs(z11) * (1.0 + kappa * kappa),
                             std::abs(params.omega1), std::abs(params.omega2), 1e-300});
    double worst = std::max({std::abs(z22_of(params) - kappa * kappa * z11),
                             std::abs(z12_of(params) - kappa * z11),
                             std::abs(z21_of(params) - kappa * z11),
                             std::abs(params.omega1 - params.omega2)});
    if (worst > 1e-9 * scale) {
        std::ostringstream os;
        os << "normal_mode_split: parameters miss the DFS manifold by " << worst / scale
           << " relative (needs k22+id22 = kappa^2(k11+id11), cross terms = "
              "kappa(k11+id11), equal mode frequencies)";
        throw ValidationError(os.str());
    }

    NormalModes modes = normal_modes(params, kappa, n_trunc);
    double omega = params.omega1;
    double boost = 1.0 + kappa * kappa;
    int d = fock_dim(n_trunc);
    Matrix id = Matrix::Identity(d, d);

    const Matrix& am = modes.A_matrix;
    const Matrix& bm = modes.B_matrix;
    Matrix na = am.adjoint() * am;
    Matrix nb = bm.adjoint() * bm;

    auto commutator_super = [&](const Matrix& x) -> Matrix {
        return kron(x, id) - kron(id, x.transpose());
    };

    Matrix la = -kI * (omega - modes.delta_aa * boost) * commutator_super(na) +
                boost * modes.k_aa *
                    (2.0 * kron(am, am.conjugate()) - kron(na, id) -
                     kron(id, na.transpose()));
    Matrix lb = -kI * omega * commutator_super(nb);

    return NormalModeSplit{LiouvillianMatrix{n_trunc, params, std::move(la)},
                           LiouvillianMatrix{n_trunc, params, std::move(lb)},
                           std::move(modes)};
}

namespace {

Vector coherent_vector(Complex alpha1, Complex alpha2, int n_trunc) {
    // Product coherent state with its full Gaussian weight: the truncated
    // norm then directly measures the tail.
    int width = n_trunc + 1;
    Vector amps1(width), amps2(width);
    double gauss = std::exp(-0.25 * (std::norm(alpha1) + std::norm(alpha2)));
    Complex term1{gauss, 0.0}, term2{gauss, 0.0};
    for (int n = 0; n < width; ++n) {
        amps1(n) = term1;
        amps2(n) = term2;
        term1 *= alpha1 / std::sqrt(static_cast<double>(n + 1));
        term2 *= alpha2 / std::sqrt(static_cast<double>(n + 1));
    }
    Vector psi(fock_dim(n_trunc));
    for (int n1 = 0; n1 < width; ++n1)
        for (int n2 = 0; n2 < width; ++n2)
            psi(n1 * width + n2) = amps1(n1) * amps2(n2);
    return psi;
}

void require_tail(double tail, const char* kind) {
    if (!(tail <= 1e-8)) {
        std::ostringstream os;
        os << "dfs_state(" << kind << "): truncation tail " << tail
           << " above 1e-8, raise n_trunc or shrink the amplitude";
        throw TruncationError(os.str());
    }
}

} // namespace

TwoModeDensityMatrix dfs_fock_state(double kappa, int n_trunc) {
    return pure_state({{FockIndex{0, 1}, Complex(1.0, 0.0)},
                       {FockIndex{1, 0}, Complex(-kappa, 0.0)}},
                      n_trunc);
}

TwoModeDensityMatrix dfs_coherent_state(double kappa, Complex v, int n_trunc) {
    Vector psi = coherent_vector(-kappa * v, v, n_trunc);
    double kept = psi.squaredNorm(); // infinite-space norm is exactly 1
    require_tail(1.0 - kept, "coherent");
    psi /= std::sqrt(kept);
    return TwoModeDensityMatrix(n_trunc, psi * psi.adjoint());
}

TwoModeDensityMatrix dfs_cat_state(double kappa, Complex v, Complex w, double rel_phase,
                                   int n_trunc) {
    Vector psi = coherent_vector(-kappa * v, v, n_trunc) +
                 std::exp(kI * rel_phase) * coherent_vector(-kappa * w, w, n_trunc);
    // Exact norm of the untruncated superposition via the coherent overlap
    // <v|w> = exp(-(|v|^2+|w|^2)/2 + v* w), boosted by the mode-1 copies.
    Complex overlap = std::exp(Complex(1.0 + kappa * kappa) *
                               (-0.5 * (std::norm(v) + std::norm(w)) + std::conj(v) * w));
    double full = 2.0 + 2.0 * std::real(std::exp(kI * rel_phase) * overlap);
    double kept = psi.squaredNorm();
    if (full <= 1e-12)
        throw ValidationError("dfs_state(cat): branches cancel, state is degenerate");
    require_tail((full - kept) / full, "cat");
    psi /= std::sqrt(kept);
    return TwoModeDensityMatrix(n_trunc, psi * psi.adjoint());
}

TwoModeDensityMatrix dfs_state(const std::string& kind, double kappa, Complex v, Complex w,
                               double rel_phase, int n_trunc) {
    if (kind == "fock") return dfs_fock_state(kappa, n_trunc);
    if (kind == "coherent") return dfs_coherent_state(kappa, v, n_trunc);
    if (kind == "cat") return dfs_cat_state(kappa, v, w, rel_phase, n_trunc);
    throw ValidationError("dfs_state: kind must be fock, coherent or cat");
}

namespace {

struct RotationScorer {
    Matrix v;             // eigenvectors of B+B
    Eigen::VectorXd evals;
    Matrix rho0_tilde;    // V+ rho0 V

    // max over theta of tr(rho0 e^{-i theta B+B} rho e^{i theta B+B}),
    // scanning a period then polishing with golden section.
    std::pair<double, double> best(const Matrix& rho) const {
        Matrix m = v.adjoint() * rho * v;
        auto value = [&](double theta) {
            Complex sum{0.0, 0.0};
            for (int j = 0; j < m.rows(); ++j)
                for (int k = 0; k < m.cols(); ++k)
                    sum += rho0_tilde(k, j) * m(j, k) *
                           std::exp(kI * (theta * (evals(k) - evals(j))));
            return sum.real();
        };
        constexpr int kScan = 256;
        constexpr double kTwoPi = 2.0 * std::numbers::pi;
        double best_theta = 0.0, best_val = value(0.0);
        for (int i = 1; i < kScan; ++i) {
            double theta = kTwoPi * i / kScan;
            double val = value(theta);
            if (val > best_val) {
                best_val = val;
                best_theta = theta;
            }
        }
        double lo = best_theta - kTwoPi / kScan;
        double hi = best_theta + kTwoPi / kScan;
        constexpr double kGolden = 0.618033988749895;
        double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
        double f1 = value(x1), f2 = value(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 < f2) {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + kGolden * (hi - lo); f2 = value(x2);
            } else {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - kGolden * (hi - lo); f1 = value(x1);
            }
        }
        double theta = 0.5 * (lo + hi);
        return {value(theta), theta};
    }
};

} // namespace

InvarianceReport dfs_invariance_test(const TwoModeDensityMatrix& state,
                                     const SystemParams& params,
                                     const std::vector<double>& t_grid,
                                     const IntegratorConfig& oracle_cfg) {
    if (t_grid.empty())
        throw ValidationError("dfs_invariance_test: empty time grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] >= 0.0))
            throw ValidationError("dfs_invariance_test: times must be >= 0");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw ValidationError("dfs_invariance_test: time grid must be strictly increasing");
    }
    validate_density_matrix(state);

    DfsReport check = dfs_check(params);
    int n = state.n_trunc;
    NormalModes modes = normal_modes(params, check.kappa_fit, n);
    Matrix na = modes.A_matrix.adjoint() * modes.A_matrix;
    Matrix nb = modes.B_matrix.adjoint() * modes.B_matrix;

    Eigen::SelfAdjointEigenSolver<Matrix> es(nb);
    RotationScorer scorer{es.eigenvectors(), es.eigenvalues(),
                          es.eigenvectors().adjoint() * state.rho * es.eigenvectors()};

    LiouvillianMatrix gen = build_liouvillian(params, n);
    double b0 = (nb * state.rho).trace().real();

    InvarianceReport report;
    report.kappa = check.kappa_fit;
    // Both propagators advance segment by segment (exact for the closed
    // form by the semigroup property). Jumping straight to a late t would
    // push almost-decayed amplitudes through the factorization's growing
    // factors and turn them into trace noise; short segments keep every
    // amplification bounded.
    TwoModeDensityMatrix analytic = state;
    TwoModeDensityMatrix oracle_state = state;
    double prev_t = 0.0;
    for (double t : t_grid) {
        if (t > prev_t)
            analytic = propagate_analytic(analytic, params, t - prev_t);
        oracle_state = integrate(oracle_state, gen, t - prev_t, oracle_cfg);
        prev_t = t;

        InvarianceRecord rec;
        rec.t = t;
        rec.purity_analytic = purity(analytic);
        rec.purity_oracle = purity(oracle_state);
        auto [fa, ta] = scorer.best(analytic.rho);
        auto [fo, to] = scorer.best(oracle_state.rho);
        rec.fidelity_analytic = fa;
        rec.theta_star_analytic = ta;
        rec.fidelity_oracle = fo;
        rec.theta_star_oracle = to;
        rec.a_number_analytic = (na * analytic.rho).trace().real();
        rec.a_number_oracle = (na * oracle_state.rho).trace().real();
        rec.b_number_analytic = (nb * analytic.rho).trace().real();
        rec.b_number_oracle = (nb * oracle_state.rho).trace().real();
        report.records.push_back(rec);

        report.min_purity_analytic = std::min(report.min_purity_analytic, rec.purity_analytic);
        report.min_purity_oracle = std::min(report.min_purity_oracle, rec.purity_oracle);
        report.min_fidelity_analytic =
            std::min(report.min_fidelity_analytic, rec.fidelity_analytic);
        report.min_fidelity_oracle = std::min(report.min_fidelity_oracle, rec.fidelity_oracle);
        report.max_b_drift_analytic =
            std::max(report.max_b_drift_analytic, std::abs(rec.b_number_analytic - b0));
        report.max_b_drift_oracle =
            std::max(report.max_b_drift_oracle, std::abs(rec.b_number_oracle - b0));
    }
    return report;
}

} // namespace dfscavity
