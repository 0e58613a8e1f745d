#pragma once

#include <vector>

#include "dfscavity/core.hpp"
#include "dfscavity/oracle.hpp"
#include "dfscavity/propagator.hpp"

// Two-atom Ramsey-type interference on the two cavity modes. A source atom
// entering in |e> undergoes a pi/2 pulse on mode a and a pi pulse on mode b,
// leaving the field in (e^{i phi}|0,1> + |1,0>)/sqrt(2) at t = 3pi/(2 Omega)
// with phi = pi/2 + pi delta/Omega. After a wait, a probe atom entering in
// |g> runs the mirrored sequence and its excitation probability P_e(T)
// carries the interference fringe at the mode splitting delta.

namespace dfscavity {

struct ExperimentConfig {
    double delta = 0.0;     // mode-a minus mode-b angular frequency
    double Omega = 1.0;     // vacuum Rabi frequency (same for both modes)
    double Tr_a = 1.0;      // measured energy decay time of mode a
    double Tr_b = 1.0;      // measured energy decay time of mode b
    double nbar = 0.0;      // thermal photon number of the reservoir
    double reduction = 1.0; // fringe contrast reduction from state prep/detection
    std::vector<double> T_grid;

    void validate() const;          // Omega, Tr_* > 0; nbar >= 0; reduction in [0,1]
    double Phi() const;             // delta pi / (2 Omega)
    double phi() const;             // pi/2 + pi delta / Omega
    double prep_time() const;       // 3 pi / (2 Omega), end of the source sequence
};

// Thermal photons shorten the effective amplitude decay: k = (nbar+1)/(2 Tr).
double effective_decay(double nbar, double Tr);

// Shifts the rates of `params` into the frame used by the fringe formulas:
// mode b rotates at zero and mode a at cfg.delta (rates and shifts kept).
SystemParams frame_params(const SystemParams& params, const ExperimentConfig& cfg);

// Probe excitation probability, three levels of realism. All require
// T >= prep_time() and multiply by cfg.reduction.
double pe_ideal(double T, const ExperimentConfig& cfg);
double pe_diagonal(double T, double k11, double k22, const ExperimentConfig& cfg);
double pe_dissipative(double T, const SystemParams& params, const ExperimentConfig& cfg);

// Atom (g, e) times two-mode field, amplitudes indexed s * fock_dim + flat.
struct AtomFieldState {
    int n_trunc = kDefaultNTrunc;
    Vector amp;

    static AtomFieldState ground_vacuum(int n_trunc, bool excited_atom);
    int dim() const { return static_cast<int>(amp.size()); }
};

enum class CavityMode { a, b };

// Resonant Jaynes-Cummings rotation by the given vacuum angle: the doublet
// |e, n> <-> |g, n+1> of the pulsed mode rotates by angle*sqrt(n+1),
//   amp_e -> cos(.) amp_e - e^{-i chi} sin(.) amp_g,
//   amp_g -> e^{i chi} sin(.) amp_e + cos(.) amp_g,
// with the half-angle inside the trig functions. States |g, 0> of the
// pulsed mode are dark. Population on |e, n = n_trunc> has no partner level
// and raises TruncationError.
AtomFieldState rabi_pulse(const AtomFieldState& state, CavityMode mode, double angle,
                          PulsePhaseConvention convention = {});

enum class Propagation { analytic, oracle };

// Full protocol: source sequence, dissipative wait until T, probe sequence,
// then P_e readout scaled by cfg.reduction. The wait evolves the field
// under frame_params(params, cfg) with the chosen propagator; pulses are
// treated as instantaneous for dissipation but accumulate free phases over
// their durations (that bookkeeping is what builds up phi and Phi). Each
// atom's second pulse is driven a quarter period after its first, so its
// reference phase is convention.chi + pi/2.
double run_protocol(const SystemParams& params, const ExperimentConfig& cfg, double T,
                    Propagation propagation = Propagation::analytic,
                    PulsePhaseConvention convention = {});

} // namespace dfscavity
