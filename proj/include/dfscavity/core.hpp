#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dfscavity/errors.hpp"

// Basic types for two cavity modes (1 and 2) coupled to a common reservoir.
// Everything is unit-free: rates and frequencies share one inverse-time unit
// and times are given in that unit.

namespace dfscavity {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr int kDefaultNTrunc = 3;
inline constexpr const char* kVersionString = "0.1.0";

// Rates k_ij and frequency shifts delta_ij of the reservoir-induced master
// equation, plus the bare mode frequencies omega_1, omega_2. The diagonal
// k_ii are ordinary decay rates; the cross terms k_12, k_21 (and their
// shifts) come from both modes talking to the same bath and are what make a
// decoherence-free subspace possible.
struct SystemParams {
    double omega1 = 0.0;
    double omega2 = 0.0;
    double k11 = 0.0;
    double k22 = 0.0;
    double k12 = 0.0;
    double k21 = 0.0;
    double delta11 = 0.0;
    double delta22 = 0.0;
    double delta12 = 0.0;
    double delta21 = 0.0;

    // Largest rate/frequency magnitude; sets the natural time scale.
    double max_rate() const;

    // True when the equation is completely positive (Lindblad). The
    // antisymmetric part of k12/k21 and the symmetric part of delta12/21
    // only feed a beam-splitter Hamiltonian; what must be positive
    // semidefinite is the dissipative kernel
    //   [[2 k11, w], [conj(w), 2 k22]],  w = (k12 + k21) + i (delta12 - delta21).
    bool is_physical_dissipator(double tol = 1e-12) const;

    // Throws ValidationError for non-finite entries or negative diagonal
    // rates. Asymmetric and nonphysical cross terms are allowed (callers
    // that care use is_physical_dissipator()).
    void validate() const;
};

// Occupation (n1, n2) of the two modes.
struct FockIndex {
    int n1 = 0;
    int n2 = 0;
};

// Reference phase chi of the classical field driving the atomic pulses.
// Physical fringe signals are chi-independent; the convention only fixes
// which quadrature the transferred photon amplitude lands on.
struct PulsePhaseConvention {
    double chi = 0.0;
};

// Row-major flattening of (n1, n2) with n_i in [0, n_trunc]:
// flat = n1 * (n_trunc + 1) + n2.
int fock_dim(int n_trunc);                       // (n_trunc + 1)^2
int flatten(FockIndex idx, int n_trunc);         // throws on out-of-range
FockIndex unflatten(int flat, int n_trunc);

struct ModeOperators {
    Matrix a1; // annihilation on mode 1, identity on mode 2
    Matrix a2;
};

// Truncated annihilation operators on the product space. n_trunc < 1 is
// rejected: a single excitation must at least fit.
ModeOperators mode_operators(int n_trunc);

// Density matrix on the truncated two-mode space. Thin wrapper so the
// truncation travels with the matrix; Eigen arithmetic goes through .rho.
struct TwoModeDensityMatrix {
    int n_trunc = kDefaultNTrunc;
    Matrix rho;

    TwoModeDensityMatrix() = default;
    TwoModeDensityMatrix(int n, Matrix m) : n_trunc(n), rho(std::move(m)) {}

    int dim() const { return static_cast<int>(rho.rows()); }
    double trace_real() const { return rho.trace().real(); }
    double hermiticity_error() const { return (rho - rho.adjoint()).cwiseAbs().maxCoeff(); }
    // Total population on states with n1 = n_trunc or n2 = n_trunc; small
    // tail means the truncation is not biting.
    double tail_population() const;
};

// Normalized pure state |psi><psi| from amplitudes on Fock states. Throws
// ValidationError if every amplitude is zero, TruncationError if an index
// exceeds n_trunc.
TwoModeDensityMatrix pure_state(const std::vector<std::pair<FockIndex, Complex>>& amplitudes,
                                int n_trunc);

TwoModeDensityMatrix vacuum_state(int n_trunc);

// Shared sanity gate: Hermitian to 1e-12, trace in [0, 1 + 1e-12], and
// eigenvalues >= -1e-9. Giving `expected_trace` adds the propagation
// postcondition |trace - expected| <= 1e-10 and widens the ceiling to that
// same allowance (long evolutions legitimately overshoot 1 by roundoff).
// Throws DiagnosticsError naming the failed property.
void validate_density_matrix(const TwoModeDensityMatrix& state,
                             double expected_trace = -1.0);

double purity(const TwoModeDensityMatrix& state);

// Kronecker product, row-major block convention: (A (x) B)[(i1 i2),(j1 j2)]
// = A(i1,j1) B(i2,j2).
Matrix kron(const Matrix& a, const Matrix& b);

// Row-major vectorization vec(rho)[i*D + j] = rho(i, j), matching the
// superoperator convention X rho Y -> (X (x) Y^T) vec(rho).
Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, int dim);

} // namespace dfscavity
