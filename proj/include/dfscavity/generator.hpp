#pragma once

#include <vector>

#include "dfscavity/core.hpp"

// Assembly of the master-equation generator (Liouvillian) as an explicit
// matrix on row-major-vectorized density matrices, and the map from a
// discrete reservoir spectrum to the effective rates and shifts.

namespace dfscavity {

// d/dt vec(rho) = matrix * vec(rho), dimension (n_trunc+1)^4. Carries the
// parameters it was built from so downstream reports stay self-describing.
struct LiouvillianMatrix {
    int n_trunc = kDefaultNTrunc;
    SystemParams params;
    Matrix matrix;

    int dim() const { return static_cast<int>(matrix.rows()); }
    // Trace preservation: every column of the generator sums to zero over
    // the diagonal positions vec-index i*D + i. Returns the worst column.
    double trace_annihilation_error() const;
    // Hermiticity preservation: L(rho^dag) = (L rho)^dag, checked as a
    // matrix identity on the vectorized generator.
    double hermiticity_preservation_error() const;
};

Matrix apply(const LiouvillianMatrix& l, const Matrix& rho);

// One reservoir mode: frequency and its coupling amplitude to each cavity
// mode. Couplings may be complex (propagation phases between the cavities).
struct ReservoirMode {
    double omega_k = 0.0;
    Complex alpha_1k{0.0, 0.0};
    Complex alpha_2k{0.0, 0.0};
};

struct ReservoirSpectrum {
    std::vector<ReservoirMode> modes;
    double tau_c = 0.0; // coarse-graining time; must exceed reservoir memory

    void validate() const; // non-empty, omega_k > 0, tau_c > 0, finite
};

// Builds the generator with the frequency commutator i(delta_ii - omega_i)
// sign convention for a frame rotating at the bare mode frequencies, the
// two diagonal dissipators, and the four cross groups (damping-like k_12,
// k_21 and shift-like combinations of delta_12, delta_21). Rejects
// parameters that fail SystemParams::validate(); merely nonphysical cross
// terms are accepted (the caller may still want the trace-preserving map).
LiouvillianMatrix build_liouvillian(const SystemParams& params, int n_trunc = kDefaultNTrunc);

// Second-order coarse-grained rates from a discrete spectrum:
//   k_ij + i delta_ij = sum_k alpha_ik alpha_jk^* E(omega_k - Omega_j),
//   E(x) = (exp(i x tau_c) - 1) / (i x),   E -> tau_c as x -> 0.
// For a broad band and large tau_c the real diagonal part approaches the
// golden-rule plateau pi * (mode density) * |alpha|^2. The bare frequencies
// are passed through unchanged into the result.
SystemParams coefficients_from_couplings(const ReservoirSpectrum& spectrum,
                                         double omega1, double omega2);

} // namespace dfscavity
