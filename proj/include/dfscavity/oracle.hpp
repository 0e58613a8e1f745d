#pragma once

#include <string>

#include "dfscavity/generator.hpp"

// Brute-force reference integrator: classical fixed-step RK4 on the
// vectorized master equation. Deliberately simple so it can arbitrate
// disagreements with the closed-form propagator.

namespace dfscavity {

struct IntegratorConfig {
    double dt = 0.0;          // <= 0 means: pick a stable default
    std::string method = "rk4";
    long max_steps = 50'000'000;

    // min(1/(50*max_rate), 0.09/||L||_inf): the documented default step,
    // clamped so the stability contract dt*||L|| <= 0.1 holds even when the
    // truncation (and with it ||L||) grows.
    static double stable_default(const LiouvillianMatrix& l);
};

struct IntegrationStats {
    long steps = 0;
    double dt = 0.0;
    double resymmetrization_norm = 0.0; // largest (rho - rho^dag)/2 correction applied
};

// Integrates d rho/dt = L rho from 0 to t (t >= 0; t = 0 returns the input
// bit-for-bit). The step count is ceil(t/dt) with the last step shrunk to
// land exactly on t. Each step re-symmetrizes rho (Hermitian part) and logs
// the correction size. Rejects dt*||L||_inf > 0.1 (unstable regime) and
// step budgets beyond max_steps; for physical (completely positive)
// generators, throws DiagnosticsError if the final state has an eigenvalue
// below -1e-6 (truncation or stability failure).
TwoModeDensityMatrix integrate(const TwoModeDensityMatrix& rho0, const LiouvillianMatrix& l,
                               double t, const IntegratorConfig& cfg = {},
                               IntegrationStats* stats = nullptr);

} // namespace dfscavity
