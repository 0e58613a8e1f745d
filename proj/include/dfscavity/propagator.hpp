#pragma once

#include <Eigen/Dense>

#include "dfscavity/core.hpp"

// Closed-form propagation. The one-photon amplitudes evolve under the 2x2
// transfer matrix M(t) = [[F1, L1], [L2, F2]]; the full map on density
// matrices factorizes into twelve exponentials of elementary superoperators
// whose parameters are algebraic in F1, F2, L1, L2. Both are exact for any
// parameter set (no weak-coupling or secular approximation beyond the master
// equation itself).

namespace dfscavity {

struct PropagatorCoefficients {
    Complex c;             // half-difference of complex damping rates
    Complex r;             // sqrt(c^2 + (k12 - i d12)(k21 - i d21)), principal branch
    Complex R;             // half-sum of complex damping rates
    Complex lambda_minus;  // -R - r
    Complex lambda_plus;   // -R + r
    Complex F1, F2, L1, L2;
};

// Evaluates c, r, R and the transfer amplitudes at time t. The F/L values
// are computed in a form even in r (cosh, sinh/r), so the branch chosen for
// the square root only affects the labeling of lambda_minus/lambda_plus,
// never the physics. Near r = 0 a series keeps full accuracy (the two
// eigenvalues collide and the naive formulas lose digits).
PropagatorCoefficients compute_coefficients(const SystemParams& params, double t);

// M(t) = [[F1, L1], [L2, F2]]; det M = exp(-2 R t).
Eigen::Matrix2cd amplitude_transfer(const PropagatorCoefficients& coeffs);

// Parameters of the factorization
//   exp(L t) = e^{h1 a1.a1+} e^{h2 a2.a2+} e^{z_l a1.a2+} e^{z a2.a1+}
//              e^{n_l .a1+a2} e^{n a2+a1.} e^{m2 a2+a2.} e^{p2 .a2+a2}
//              e^{m1 a1+a1.} e^{p1 .a1+a1} e^{q a1+a2.} e^{q_l .a2+a1}
// (a dot marks the density-matrix slot; factors right of the slot multiply
// from the right). The filler exponent uses k_m = Re R: that value is
// forced by trace preservation of the composed map and is the only choice
// consistent with the h/z normalization. Entries grow like e^{2 Re(R) t};
// the factorization is usable for Re(R) t up to ~300 before overflow.
struct FactorizationSchedule {
    Complex h1, h2;   // filler sandwiches a_i . a_i+
    Complex z_l, z;   // cross sandwiches a1 . a2+ and a2 . a1+
    Complex n_l, n;   // cross one-sided .a1+a2 and a2+a1.
    Complex m2, p2;   // number-operator exponents, mode 2 (left, right)
    Complex m1, p1;   // number-operator exponents, mode 1 (left, right)
    Complex q, q_l;   // cross one-sided a1+a2. and .a2+a1
};

// Throws SingularFactorizationError when F1(t) vanishes to rounding
// against the other transfer entries: the factorization uses m1 = log F1
// and n, q ~ 1/F1, so such instants are coordinate singularities of the
// parametrization (the map itself stays perfectly regular; step over the
// zero by splitting t).
FactorizationSchedule factorization_params(const SystemParams& params, double t);

// Applies exp(L t) to rho0 through the factorization. Each elementary
// exponential is a terminating series on the truncated space (raising and
// lowering factors are nilpotent; number-operator factors are diagonal), so
// the result is exact to rounding whenever the initial support has total
// photon number n1 + n2 <= n_trunc: every factor conserves or lowers the
// total, and below the truncation edge the truncated operators act exactly
// like the untruncated ones. For physical parameters and a proper input
// state the output is run through the density-matrix validator.
TwoModeDensityMatrix propagate_analytic(const TwoModeDensityMatrix& rho0,
                                        const SystemParams& params, double t);

// State of the one-photon interference experiment after a dissipative wait:
// starts from (e^{i phi}|0,1> + |1,0>)/sqrt(2) and returns the closed-form
// density matrix at time tau on the n_trunc = 1 space,
//   1/2 [alpha |0,1> + beta |1,0>][h.c.] + (1 - (|alpha|^2+|beta|^2)/2)|0,0><0,0|
// with alpha = e^{i phi} F2 + L2 and beta = F1 + e^{i phi} L1.
TwoModeDensityMatrix single_photon_evolution(double phi, const SystemParams& params,
                                             double tau);

} // namespace dfscavity
