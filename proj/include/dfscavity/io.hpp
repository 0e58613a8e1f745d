#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dfscavity/experiment.hpp"

// File formats. CSV values are written with 17 significant digits through
// locale-independent to_chars/from_chars, so write -> read -> write is
// byte-identical and doubles round-trip exactly.

namespace dfscavity {

// Shortest-round-trip decimal form of x (17 significant digits, locale
// independent). All numeric file output goes through this.
std::string format_number(double x);

struct SweepRow {
    double T = 0.0;
    double value = 0.0;
    std::string tag;
};

// One or more curves sampled over T, with a self-describing metadata block
// ('# key = value' lines). Within each tag, T must be strictly increasing,
// and values are probabilities.
struct SweepResult {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<SweepRow> rows;

    void validate() const; // monotone T per tag, values in [0, 1], finite
    std::vector<std::string> tags() const; // distinct tags in first-seen order
    SweepResult filter(const std::string& tag) const;
};

void write_sweep_csv(const SweepResult& sweep, std::ostream& out);
void write_sweep_csv(const SweepResult& sweep, const std::string& path);
SweepResult read_sweep_csv(const std::string& path);

// Free-form numeric table with the same metadata block; used for outputs
// that are not probability curves (propagator coefficients etc.).
void write_table_csv(const std::vector<std::pair<std::string, std::string>>& metadata,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, std::ostream& out);
void write_table_csv(const std::vector<std::pair<std::string, std::string>>& metadata,
                     const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, const std::string& path);

// Measured fringe points: T, pe in [0, 1], optional positive sigma (all
// rows must agree on whether sigma is present).
struct OverlayPoint {
    double T = 0.0;
    double pe = 0.0;
    double sigma = 0.0;
};

struct OverlayDataset {
    std::vector<OverlayPoint> points;
    bool has_sigma = false;
};

OverlayDataset load_overlay_csv(const std::string& path);

struct ResidualReport {
    std::vector<double> residuals; // pe_measured_i - model(T_i + phase_offset)
    double rms = 0.0;
    double chi_square = 0.0; // NaN when the overlay has no sigmas
    double phase_offset = 0.0;
};

// Compares one model curve (single-tag sweep; multi-tag input is rejected)
// against measured points, linearly interpolating the sweep at T_i +
// phase_offset. Any shifted point falling outside the sweep's T range is a
// ValidationError.
ResidualReport residuals(const SweepResult& sweep, const OverlayDataset& overlay,
                         double phase_offset = 0.0);

// Minimizes the residual RMS over phase_offset in [lo, hi] (coarse scan
// plus golden-section polish).
double fit_phase_offset(const SweepResult& sweep, const OverlayDataset& overlay,
                        double lo, double hi);

// What a config file asks the tools to do, beyond physics parameters.
struct RunDirectives {
    int n_trunc = kDefaultNTrunc;
    double phase_offset = 0.0;
    std::string model = "general"; // ideal | diagonal | general | protocol
};

struct RunConfig {
    SystemParams params;
    ExperimentConfig experiment;
    RunDirectives directives;
};

// JSON config. Required: delta, Omega, Tr_a, Tr_b, T_grid (array or
// {start, stop, points}). Optional: nbar, reduction, n_trunc, phase_offset,
// model, and a "rates" block for cross terms and shifts, where k12/k21
// accept the string "dfs" meaning sqrt(k11 k22) of the effective decays.
// k11/k22 always come from (nbar+1)/(2 Tr); omega1 = delta, omega2 = 0
// (fringe-frame convention). Every violation is collected and reported with
// its JSON path in a single ValidationError. Unknown keys are violations
// only under strict_keys; otherwise they are appended to *warnings (when
// given) and ignored.
RunConfig load_config(const std::string& path, bool strict_keys = false,
                      std::vector<std::string>* warnings = nullptr);

} // namespace dfscavity
