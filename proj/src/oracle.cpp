#include "dfscavity/oracle.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Sparse>

namespace dfscavity {

namespace {

double inf_norm(const Matrix& m) {
    // max absolute row sum
    return m.cwiseAbs().rowwise().sum().maxCoeff();
}

} // namespace

double IntegratorConfig::stable_default(const LiouvillianMatrix& l) {
    double rate = l.params.max_rate();
    double by_rate = rate > 0.0 ? 1.0 / (50.0 * rate) : 1.0;
    double norm = inf_norm(l.matrix);
    double by_stability = norm > 0.0 ? 0.09 / norm : by_rate;
    return std::min(by_rate, by_stability);
}

TwoModeDensityMatrix integrate(const TwoModeDensityMatrix& rho0, const LiouvillianMatrix& l,
                               double t, const IntegratorConfig& cfg,
                               IntegrationStats* stats) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ValidationError("integrate: time must be finite and >= 0");
    if (cfg.method != "rk4")
        throw ValidationError("integrate: unknown method '" + cfg.method + "'");
    if (rho0.dim() != fock_dim(rho0.n_trunc) || rho0.n_trunc != l.n_trunc)
        throw ValidationError("integrate: state and Liouvillian truncations differ");

    if (t == 0.0) {
        if (stats) *stats = IntegrationStats{0, 0.0, 0.0};
        return rho0;
    }

    double dt = cfg.dt > 0.0 ? cfg.dt : IntegratorConfig::stable_default(l);
    double norm = inf_norm(l.matrix);
    if (dt * norm > 0.1) {
        std::ostringstream os;
        os << "integrate: dt*||L|| = " << dt * norm << " > 0.1, step too large for RK4";
        throw ValidationError(os.str());
    }
    long n_steps = static_cast<long>(std::ceil(t / dt));
    if (n_steps < 1) n_steps = 1;
    if (n_steps > cfg.max_steps) {
        std::ostringstream os;
        os << "integrate: " << n_steps << " steps exceed max_steps = " << cfg.max_steps;
        throw ValidationError(os.str());
    }
    double h = t / static_cast<double>(n_steps);

    // The generator couples only nearby Fock states; a sparse view keeps
    // the matvec cost proportional to the actual couplings.
    Eigen::SparseMatrix<Complex> gen = l.matrix.sparseView();
    int d = rho0.dim();
    Vector v = vectorize(rho0.rho);
    double worst_resym = 0.0;
    for (long step = 0; step < n_steps; ++step) {
        Vector k1 = gen * v;
        Vector k2 = gen * (v + (h / 2.0) * k1);
        Vector k3 = gen * (v + (h / 2.0) * k2);
        Vector k4 = gen * (v + h * k3);
        v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        // The generator preserves Hermiticity exactly; re-symmetrizing kills
        // the floating-point drift and the logged norm certifies it stayed
        // at rounding level.
        Matrix rho = unvectorize(v, d);
        Matrix herm = 0.5 * (rho + rho.adjoint());
        worst_resym = std::max(worst_resym, (rho - herm).cwiseAbs().maxCoeff());
        v = vectorize(herm);
    }

    if (stats) *stats = IntegrationStats{n_steps, h, worst_resym};

    TwoModeDensityMatrix out(rho0.n_trunc, unvectorize(v, d));
    // A completely positive map must keep the state positive; anything
    // below -1e-6 means the truncation or the step size gave way. Maps
    // with nonphysical cross terms may leave the cone legitimately, so
    // they are exempt.
    if (l.params.is_physical_dissipator()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(out.rho, Eigen::EigenvaluesOnly);
        double min_eig = es.eigenvalues().minCoeff();
        if (min_eig < -1e-6) {
            std::ostringstream os;
            os << "integrate: final state eigenvalue " << min_eig
               << " below -1e-6 (raise n_trunc or shrink dt)";
            throw DiagnosticsError(os.str());
        }
    }
    return out;
}

} // namespace dfscavity
