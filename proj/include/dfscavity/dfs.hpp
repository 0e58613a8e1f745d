#pragma once

#include <string>
#include <vector>

#include "dfscavity/generator.hpp"
#include "dfscavity/oracle.hpp"
#include "dfscavity/propagator.hpp"

// Decoherence-free subspace machinery. When both modes sit at the same
// frequency omega and the rates satisfy
//   k22 + i d22 = kappa^2 (k11 + i d11),
//   k12 + i d12 = k21 + i d21 = kappa (k11 + i d11),
// the generator splits into a damped collective mode A = (a1 + kappa a2) /
// sqrt(1+kappa^2) and a purely rotating mode B = (a2 - kappa a1) /
// sqrt(1+kappa^2); anything built on B alone never decoheres.

namespace dfscavity {

enum class ProtectedBranch { none, minus, plus };

struct DfsReport {
    Complex lambda_minus;
    Complex lambda_plus;
    ProtectedBranch protected_branch = ProtectedBranch::none;
    double condition_residual = 0.0;  // min(|Re lambda-|, |Re lambda+|)
    double kappa_fit = 0.0;           // best-fit mixing ratio (least squares)
    double kappa_fit_residual = 0.0;  // rms misfit of the three conditions at kappa_fit
};

// Reads protection straight off the decay branches: a branch with
// |Re lambda| <= tolerance is non-decaying and gets reported as protected.
// kappa_fit minimizes |z22 - k^2 z11|^2 + |z12 - k z11|^2 + |z21 - k z11|^2
// over real k with z_ij = k_ij + i delta_ij (exact on the DFS manifold).
DfsReport dfs_check(const SystemParams& params, double tolerance = 1e-9);

struct NormalModes {
    double kappa = 0.0;
    Matrix A_matrix;      // truncated annihilation operator of the damped mode
    Matrix B_matrix;      // truncated annihilation operator of the protected mode
    double k_aa = 0.0;    // = k11; the A mode damps at (1 + kappa^2) k_aa
    double delta_aa = 0.0; // = delta11; A oscillates at omega - (1+kappa^2) delta_aa
};

NormalModes normal_modes(const SystemParams& params, double kappa, int n_trunc);

struct NormalModeSplit {
    LiouvillianMatrix l_a; // damped collective mode
    LiouvillianMatrix l_b; // free rotation of the protected mode
    NormalModes modes;
};

// Exact split L = L_A + L_B. Requires the DFS conditions (including equal
// mode frequencies) to hold within 1e-9 relative; otherwise throws
// ValidationError (the parameters are not on the DFS manifold and no such
// split exists).
NormalModeSplit normal_mode_split(const SystemParams& params, double kappa,
                                  int n_trunc = kDefaultNTrunc);

// Protected states. Tail population beyond the truncation must stay below
// 1e-8 or TruncationError is thrown (raise n_trunc or shrink amplitudes).
//   fock:     (|0,1> - kappa |1,0>) / sqrt(1+kappa^2)   (= B+ |vac>)
//   coherent: |-kappa v>_1 |v>_2                        (A in vacuum)
//   cat:      N (|-kappa v>|v> + e^{i phase} |-kappa w>|w>)
TwoModeDensityMatrix dfs_fock_state(double kappa, int n_trunc);
TwoModeDensityMatrix dfs_coherent_state(double kappa, Complex v, int n_trunc);
TwoModeDensityMatrix dfs_cat_state(double kappa, Complex v, Complex w, double rel_phase,
                                   int n_trunc);
// String dispatch for the CLI and bindings: kind in {fock, coherent, cat}.
TwoModeDensityMatrix dfs_state(const std::string& kind, double kappa, Complex v,
                               Complex w, double rel_phase, int n_trunc);

struct InvarianceRecord {
    double t = 0.0;
    double purity_analytic = 0.0, purity_oracle = 0.0;
    // Overlap with the initial state after undoing the free B rotation
    // exp(-i theta B+B), maximized over theta; theta_star is the arg max.
    double fidelity_analytic = 0.0, fidelity_oracle = 0.0;
    double theta_star_analytic = 0.0, theta_star_oracle = 0.0;
    double a_number_analytic = 0.0, a_number_oracle = 0.0;
    double b_number_analytic = 0.0, b_number_oracle = 0.0;
};

struct InvarianceReport {
    double kappa = 0.0;
    std::vector<InvarianceRecord> records;
    double min_purity_analytic = 1.0, min_purity_oracle = 1.0;
    double min_fidelity_analytic = 1.0, min_fidelity_oracle = 1.0;
    double max_b_drift_analytic = 0.0, max_b_drift_oracle = 0.0; // |<B+B>(t) - <B+B>(0)|
};

// Runs the state through both propagators over the grid and scores how
// decoherence-free it actually is. kappa is recovered from dfs_check (the
// fit is exact on the DFS manifold, which is a precondition here). The
// oracle step size can be tightened via oracle_cfg for high-precision runs.
InvarianceReport dfs_invariance_test(const TwoModeDensityMatrix& state,
                                     const SystemParams& params,
                                     const std::vector<double>& t_grid,
                                     const IntegratorConfig& oracle_cfg = {});

} // namespace dfscavity
