#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dfscavity/certify.hpp"
#include "dfscavity/dfs.hpp"
#include "dfscavity/experiment.hpp"
#include "dfscavity/io.hpp"
#include "dfscavity/propagator.hpp"

namespace {

using namespace dfscavity;

struct GlobalFlags {
    bool quiet = false;
    bool verbose = false;
    int jobs = default_jobs();
};

// Informational notes go to stderr so stdout stays machine-readable.
void note(const GlobalFlags& g, const std::string& msg) {
    if (!g.quiet)
        std::cerr << msg << "\n";
}

std::string format_complex(Complex z) {
    std::string s = format_number(z.real());
    s += z.imag() < 0.0 ? "-" : "+";
    s += format_number(std::abs(z.imag()));
    s += "i";
    return s;
}

// Streams a sweep to the given path, with "-" meaning stdout.
void emit_sweep(const SweepResult& sweep, const std::string& path) {
    if (path == "-")
        write_sweep_csv(sweep, std::cout);
    else
        write_sweep_csv(sweep, path);
}

void emit_table(const std::vector<std::pair<std::string, std::string>>& metadata,
                const std::vector<std::string>& columns,
                const std::vector<std::vector<double>>& rows, const std::string& path) {
    if (path == "-")
        write_table_csv(metadata, columns, rows, std::cout);
    else
        write_table_csv(metadata, columns, rows, path);
}

std::vector<std::pair<std::string, std::string>> base_metadata(const RunConfig& rc) {
    const SystemParams& p = rc.params;
    const ExperimentConfig& c = rc.experiment;
    return {
        {"generator", std::string("dfs-cavity ") + kVersionString},
        {"delta", format_number(c.delta)},
        {"Omega", format_number(c.Omega)},
        {"Tr_a", format_number(c.Tr_a)},
        {"Tr_b", format_number(c.Tr_b)},
        {"nbar", format_number(c.nbar)},
        {"reduction", format_number(c.reduction)},
        {"k11", format_number(p.k11)},
        {"k22", format_number(p.k22)},
        {"k12", format_number(p.k12)},
        {"k21", format_number(p.k21)},
        {"delta11", format_number(p.delta11)},
        {"delta22", format_number(p.delta22)},
        {"delta12", format_number(p.delta12)},
        {"delta21", format_number(p.delta21)},
        {"omega1", format_number(p.omega1)},
        {"omega2", format_number(p.omega2)},
        {"n_trunc", std::to_string(rc.directives.n_trunc)},
    };
}

RunConfig read_config(const std::string& path, bool strict, const GlobalFlags& g) {
    std::vector<std::string> warnings;
    RunConfig rc = load_config(path, strict, &warnings);
    for (const auto& w : warnings)
        note(g, "warning: " + w);
    return rc;
}

double eval_pe(const std::string& model, double T, const RunConfig& rc) {
    if (model == "ideal")
        return pe_ideal(T, rc.experiment);
    if (model == "diagonal")
        return pe_diagonal(T, rc.params.k11, rc.params.k22, rc.experiment);
    if (model == "general")
        return pe_dissipative(T, rc.params, rc.experiment);
    if (model == "protocol")
        return run_protocol(rc.params, rc.experiment, T);
    throw ValidationError("unknown model '" + model +
                          "' (expected ideal, diagonal, general or protocol)");
}

int run_pe_curve(const std::string& config_path, std::string model,
                 const std::string& out_path, bool strict, const GlobalFlags& g) {
    RunConfig rc = read_config(config_path, strict, g);
    if (model.empty())
        model = rc.directives.model;

    const std::vector<double>& grid = rc.experiment.T_grid;
    std::vector<double> values(grid.size());
    parallel_for(static_cast<int>(grid.size()), g.jobs,
                 [&](int i) { values[i] = eval_pe(model, grid[i], rc); });

    SweepResult sweep;
    sweep.metadata = base_metadata(rc);
    sweep.metadata.emplace_back("model", model);
    sweep.rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        sweep.rows.push_back(SweepRow{grid[i], values[i], model});
    emit_sweep(sweep, out_path);
    if (out_path != "-") {
        std::ostringstream os;
        os << "wrote " << sweep.rows.size() << " points to " << out_path;
        note(g, os.str());
    }
    return 0;
}

const char* branch_name(ProtectedBranch b) {
    switch (b) {
    case ProtectedBranch::minus: return "minus";
    case ProtectedBranch::plus: return "plus";
    default: return "none";
    }
}

int run_dfs_scan(const std::string& config_path, std::vector<double> ratios,
                 const std::string& out_path, bool strict, const GlobalFlags& g) {
    RunConfig rc = read_config(config_path, strict, g);
    if (rc.experiment.delta != 0.0) {
        note(g, "warning: dfs-scan requires delta = 0; overriding the configured value");
        rc.experiment.delta = 0.0;
        rc.params.omega1 = 0.0;
    }
    if (ratios.empty())
        ratios = {0.0, 0.5, 0.7, 0.9, 1.0};

    double base = std::sqrt(rc.params.k11 * rc.params.k22);
    const std::vector<double>& grid = rc.experiment.T_grid;
    int n_t = static_cast<int>(grid.size());
    int n_r = static_cast<int>(ratios.size());

    std::vector<double> values(static_cast<std::size_t>(n_r) * n_t);
    parallel_for(n_r * n_t, g.jobs, [&](int idx) {
        int r = idx / n_t, i = idx % n_t;
        RunConfig local = rc;
        local.params.k12 = local.params.k21 = ratios[r] * base;
        values[idx] = pe_dissipative(grid[i], local.params, local.experiment);
    });

    SweepResult sweep;
    sweep.metadata = base_metadata(rc);
    {
        std::string list;
        for (double r : ratios)
            list += (list.empty() ? "" : " ") + format_number(r);
        sweep.metadata.emplace_back("ratios", list);
        sweep.metadata.emplace_back("ratio_base", format_number(base));
        sweep.metadata.emplace_back("model", "general");
    }
    for (int r = 0; r < n_r; ++r) {
        std::string tag = "ratio=" + format_number(ratios[r]);
        for (int i = 0; i < n_t; ++i)
            sweep.rows.push_back(
                SweepRow{grid[i], values[static_cast<std::size_t>(r) * n_t + i], tag});
    }
    emit_sweep(sweep, out_path);

    // One decay-branch report per ratio, on stdout (it is the numeric
    // output of the scan, independent of verbosity).
    for (int r = 0; r < n_r; ++r) {
        SystemParams p = rc.params;
        p.k12 = p.k21 = ratios[r] * base;
        DfsReport rep = dfs_check(p);
        std::cout << "ratio " << format_number(ratios[r])
                  << ": lambda- = " << format_complex(rep.lambda_minus)
                  << "  lambda+ = " << format_complex(rep.lambda_plus)
                  << "  protected = " << branch_name(rep.protected_branch)
                  << "  residual = " << format_number(rep.condition_residual)
                  << "  kappa_fit = " << format_number(rep.kappa_fit)
                  << "  misfit = " << format_number(rep.kappa_fit_residual) << "\n";
    }
    if (out_path != "-") {
        std::ostringstream os;
        os << "wrote " << sweep.rows.size() << " points to " << out_path;
        note(g, os.str());
    }
    return 0;
}

int run_coeffs(const SystemParams& params, double t_min, double t_max, int points,
               const std::string& out_path, const GlobalFlags& g) {
    if (!(t_max > t_min) || t_min < 0.0)
        throw ValidationError("coeffs: needs 0 <= t-min < t-max");
    if (points < 2)
        throw ValidationError("coeffs: needs at least 2 points");
    params.validate();

    std::vector<std::vector<double>> rows(points);
    parallel_for(points, g.jobs, [&](int i) {
        double t = t_min + (t_max - t_min) * i / (points - 1);
        PropagatorCoefficients co = compute_coefficients(params, t);
        rows[i] = {t,
                   co.F1.real(), co.F1.imag(), co.F2.real(), co.F2.imag(),
                   co.L1.real(), co.L1.imag(), co.L2.real(), co.L2.imag(),
                   co.lambda_minus.real(), co.lambda_minus.imag(),
                   co.lambda_plus.real(), co.lambda_plus.imag()};
    });

    std::vector<std::pair<std::string, std::string>> metadata = {
        {"generator", std::string("dfs-cavity ") + kVersionString},
        {"k11", format_number(params.k11)},
        {"k22", format_number(params.k22)},
        {"k12", format_number(params.k12)},
        {"k21", format_number(params.k21)},
        {"delta11", format_number(params.delta11)},
        {"delta22", format_number(params.delta22)},
        {"delta12", format_number(params.delta12)},
        {"delta21", format_number(params.delta21)},
        {"omega1", format_number(params.omega1)},
        {"omega2", format_number(params.omega2)},
    };
    emit_table(metadata,
               {"t", "re_F1", "im_F1", "re_F2", "im_F2", "re_L1", "im_L1", "re_L2",
                "im_L2", "re_lambda_minus", "im_lambda_minus", "re_lambda_plus",
                "im_lambda_plus"},
               rows, out_path);
    if (out_path != "-") {
        std::ostringstream os;
        os << "wrote " << points << " rows to " << out_path;
        note(g, os.str());
    }
    return 0;
}

struct StateSpec {
    std::string kind = "fock"; // fock | dfs-fock | dfs-coherent | dfs-cat
    int n1 = 0, n2 = 0;
    double kappa = 1.0;
    double v_re = 0.0, v_im = 0.0;
    double w_re = 0.0, w_im = 0.0;
    double rel_phase = 0.0;
};

TwoModeDensityMatrix make_state(const StateSpec& spec, int n_trunc) {
    if (spec.kind == "fock")
        return pure_state({{FockIndex{spec.n1, spec.n2}, Complex(1.0, 0.0)}}, n_trunc);
    if (spec.kind.rfind("dfs-", 0) == 0)
        return dfs_state(spec.kind.substr(4), spec.kappa, Complex(spec.v_re, spec.v_im),
                         Complex(spec.w_re, spec.w_im), spec.rel_phase, n_trunc);
    throw ValidationError("unknown state kind '" + spec.kind + "'");
}

int run_propagate(const std::string& config_path, const StateSpec& spec, double t,
                  const std::string& method, bool full, const std::string& out_path,
                  bool strict, const GlobalFlags& g) {
    RunConfig rc = read_config(config_path, strict, g);
    int n = rc.directives.n_trunc;
    TwoModeDensityMatrix rho0 = make_state(spec, n);

    TwoModeDensityMatrix rho;
    IntegrationStats stats;
    if (method == "analytic") {
        rho = propagate_analytic(rho0, rc.params, t);
    } else if (method == "oracle") {
        LiouvillianMatrix l = build_liouvillian(rc.params, n);
        rho = integrate(rho0, l, t, IntegratorConfig{}, &stats);
        if (g.verbose) {
            std::ostringstream os;
            os << "oracle: " << stats.steps << " steps, dt = " << stats.dt
               << ", worst resymmetrization " << stats.resymmetrization_norm;
            note(g, os.str());
        }
    } else {
        throw ValidationError("unknown method '" + method + "' (analytic or oracle)");
    }

    auto metadata = base_metadata(rc);
    metadata.emplace_back("state", spec.kind);
    metadata.emplace_back("t", format_number(t));
    metadata.emplace_back("method", method);
    metadata.emplace_back("trace", format_number(rho.trace_real()));
    metadata.emplace_back("purity", format_number(purity(rho)));
    metadata.emplace_back("hermiticity_error", format_number(rho.hermiticity_error()));
    metadata.emplace_back("tail_population", format_number(rho.tail_population()));

    std::vector<std::vector<double>> rows;
    if (full) {
        for (int i = 0; i < rho.dim(); ++i)
            for (int j = 0; j < rho.dim(); ++j) {
                FockIndex bi = unflatten(i, n), bj = unflatten(j, n);
                rows.push_back({double(bi.n1), double(bi.n2), double(bj.n1),
                                double(bj.n2), rho.rho(i, j).real(), rho.rho(i, j).imag()});
            }
        emit_table(metadata, {"n1", "n2", "m1", "m2", "re", "im"}, rows, out_path);
    } else {
        for (int i = 0; i < rho.dim(); ++i) {
            FockIndex bi = unflatten(i, n);
            rows.push_back({double(bi.n1), double(bi.n2), rho.rho(i, i).real()});
        }
        emit_table(metadata, {"n1", "n2", "population"}, rows, out_path);
    }
    return 0;
}

int run_protocol_cmd(const std::string& config_path, double T, const std::string& method,
                     double chi, bool strict, const GlobalFlags& g) {
    RunConfig rc = read_config(config_path, strict, g);
    Propagation prop =
        method == "oracle" ? Propagation::oracle : Propagation::analytic;
    if (method != "oracle" && method != "analytic")
        throw ValidationError("unknown method '" + method + "' (analytic or oracle)");
    if (g.verbose) {
        std::ostringstream os;
        os << "prep ends at " << rc.experiment.prep_time() << ", phi = "
           << rc.experiment.phi() << ", Phi = " << rc.experiment.Phi();
        note(g, os.str());
    }
    double pe = run_protocol(rc.params, rc.experiment, T, prop, PulsePhaseConvention{chi});
    std::cout << format_number(pe) << "\n";
    return 0;
}

int run_certify(const std::string& suite, std::uint64_t seed, bool json,
                const GlobalFlags& g) {
    std::vector<CheckResult> results;
    if (suite == "all") {
        // The four suites are independent; run them concurrently but report
        // in a fixed order.
        std::vector<std::vector<CheckResult>> parts(4);
        parallel_for(4, g.jobs, [&](int i) {
            switch (i) {
            case 0: parts[0] = certify_fringe(); break;
            case 1: parts[1] = certify_oracle(seed); break;
            case 2: parts[2] = certify_odes(seed); break;
            default: parts[3] = certify_dfs(seed); break;
            }
        });
        for (auto& part : parts)
            results.insert(results.end(), part.begin(), part.end());
    } else if (suite == "oracle") {
        results = certify_oracle(seed);
    } else if (suite == "odes") {
        results = certify_odes(seed);
    } else if (suite == "dfs") {
        results = certify_dfs(seed);
    } else if (suite == "fringe") {
        results = certify_fringe();
    } else {
        throw ValidationError("unknown suite '" + suite +
                              "' (oracle, odes, dfs, fringe or all)");
    }

    bool ok;
    if (json) {
        print_report_json(results, std::cout, seed);
        ok = true;
        for (const auto& r : results)
            ok = ok && r.pass;
    } else {
        std::cout << "seed " << seed << "\n";
        ok = print_report(results, std::cout);
    }
    if (!ok)
        note(g, "certification failed");
    return ok ? 0 : 3;
}

} // namespace

int main(int argc, char** argv) {
    GlobalFlags g;
    CLI::App app{"Two damped cavity modes in a common reservoir: closed-form propagation, "
                 "RK4 oracle, fringe experiment and decoherence-free subspaces"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dfs-cavity ") + kVersionString);
    app.add_flag("--quiet,-q", g.quiet, "suppress informational notes on stderr");
    app.add_flag("--verbose,-v", g.verbose, "extra diagnostics on stderr");
    app.add_option("--jobs,-j", g.jobs, "worker threads for sweeps and certification")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    int exit_code = 0;

    // pe-curve
    std::string pe_config, pe_model, pe_out = "-";
    bool pe_strict = false;
    auto* pe = app.add_subcommand("pe-curve", "probe excitation fringe over the T grid");
    pe->fallthrough();
    pe->add_option("--config", pe_config, "JSON run configuration")->required();
    pe->add_option("--model", pe_model, "ideal | diagonal | general | protocol")
        ->check(CLI::IsMember({"ideal", "diagonal", "general", "protocol"}));
    pe->add_option("--out", pe_out, "output CSV path, - for stdout");
    pe->add_flag("--strict", pe_strict, "reject unknown config keys");
    pe->callback([&] { exit_code = run_pe_curve(pe_config, pe_model, pe_out, pe_strict, g); });

    // dfs-scan
    std::string scan_config, scan_out = "-";
    std::vector<double> scan_ratios;
    bool scan_strict = false;
    auto* scan = app.add_subcommand(
        "dfs-scan", "fringe decay for a family of cross-rate ratios, with branch reports");
    scan->fallthrough();
    scan->add_option("--config", scan_config, "JSON run configuration")->required();
    scan->add_option("--ratio-grid", scan_ratios,
                     "cross-rate ratios k12/sqrt(k11 k22) (default 0 0.5 0.7 0.9 1)");
    scan->add_option("--out", scan_out, "output CSV path, - for stdout");
    scan->add_flag("--strict", scan_strict, "reject unknown config keys");
    scan->callback(
        [&] { exit_code = run_dfs_scan(scan_config, scan_ratios, scan_out, scan_strict, g); });

    // coeffs
    SystemParams co_params;
    double co_tmin = 0.0, co_tmax = 0.0;
    int co_points = 512;
    std::string co_out = "-";
    auto* co = app.add_subcommand("coeffs",
                                  "closed-form transfer amplitudes F1, F2, L1, L2 over time");
    co->fallthrough();
    co->add_option("--k11", co_params.k11, "decay rate of mode 1")->capture_default_str();
    co->add_option("--k22", co_params.k22, "decay rate of mode 2")->capture_default_str();
    co->add_option("--k12", co_params.k12, "cross rate 1<-2")->capture_default_str();
    co->add_option("--k21", co_params.k21, "cross rate 2<-1")->capture_default_str();
    co->add_option("--d11", co_params.delta11, "frequency shift of mode 1")
        ->capture_default_str();
    co->add_option("--d22", co_params.delta22, "frequency shift of mode 2")
        ->capture_default_str();
    co->add_option("--d12", co_params.delta12, "cross shift 1<-2")->capture_default_str();
    co->add_option("--d21", co_params.delta21, "cross shift 2<-1")->capture_default_str();
    co->add_option("--omega1", co_params.omega1, "frame frequency of mode 1")
        ->capture_default_str();
    co->add_option("--omega2", co_params.omega2, "frame frequency of mode 2")
        ->capture_default_str();
    co->add_option("--t-min", co_tmin, "first time")->capture_default_str();
    co->add_option("--t-max", co_tmax, "last time")->required();
    co->add_option("--points", co_points, "grid size")->check(CLI::PositiveNumber)
        ->capture_default_str();
    co->add_option("--out", co_out, "output CSV path, - for stdout");
    co->callback(
        [&] { exit_code = run_coeffs(co_params, co_tmin, co_tmax, co_points, co_out, g); });

    // propagate
    std::string pr_config, pr_method = "analytic", pr_out = "-";
    StateSpec pr_state;
    double pr_t = 0.0;
    bool pr_full = false, pr_strict = false;
    auto* pr = app.add_subcommand("propagate", "evolve an initial state for a fixed time");
    pr->fallthrough();
    pr->add_option("--config", pr_config, "JSON run configuration")->required();
    pr->add_option("--t", pr_t, "evolution time")->required()
        ->check(CLI::NonNegativeNumber);
    pr->add_option("--method", pr_method, "analytic | oracle")
        ->check(CLI::IsMember({"analytic", "oracle"}))
        ->capture_default_str();
    pr->add_option("--state", pr_state.kind, "fock | dfs-fock | dfs-coherent | dfs-cat")
        ->check(CLI::IsMember({"fock", "dfs-fock", "dfs-coherent", "dfs-cat"}))
        ->capture_default_str();
    pr->add_option("--n1", pr_state.n1, "photons in mode 1 (fock)")->capture_default_str();
    pr->add_option("--n2", pr_state.n2, "photons in mode 2 (fock)")->capture_default_str();
    pr->add_option("--kappa", pr_state.kappa, "mixing ratio of the dfs states")
        ->capture_default_str();
    pr->add_option("--v-re", pr_state.v_re, "Re v (dfs-coherent, dfs-cat)")
        ->capture_default_str();
    pr->add_option("--v-im", pr_state.v_im, "Im v")->capture_default_str();
    pr->add_option("--w-re", pr_state.w_re, "Re w (dfs-cat)")->capture_default_str();
    pr->add_option("--w-im", pr_state.w_im, "Im w")->capture_default_str();
    pr->add_option("--rel-phase", pr_state.rel_phase, "relative phase of the cat branches")
        ->capture_default_str();
    pr->add_flag("--full", pr_full, "emit the full density matrix, not just populations");
    pr->add_option("--out", pr_out, "output CSV path, - for stdout");
    pr->add_flag("--strict", pr_strict, "reject unknown config keys");
    pr->callback([&] {
        exit_code = run_propagate(pr_config, pr_state, pr_t, pr_method, pr_full, pr_out,
                                  pr_strict, g);
    });

    // protocol
    std::string pt_config, pt_method = "analytic";
    double pt_T = 0.0, pt_chi = 0.0;
    bool pt_strict = false;
    auto* pt = app.add_subcommand(
        "protocol", "single P_e value from the full pulse-level protocol");
    pt->fallthrough();
    pt->add_option("--config", pt_config, "JSON run configuration")->required();
    pt->add_option("--T", pt_T, "probe time (absolute, from the start of preparation)")
        ->required();
    pt->add_option("--method", pt_method, "analytic | oracle wait stage")
        ->check(CLI::IsMember({"analytic", "oracle"}))
        ->capture_default_str();
    pt->add_option("--chi", pt_chi, "pulse reference phase (P_e is independent of it)")
        ->capture_default_str();
    pt->add_flag("--strict", pt_strict, "reject unknown config keys");
    pt->callback(
        [&] { exit_code = run_protocol_cmd(pt_config, pt_T, pt_method, pt_chi, pt_strict, g); });

    // certify
    std::string ce_suite = "all";
    std::uint64_t ce_seed = 20260815;
    bool ce_json = false;
    auto* ce = app.add_subcommand("certify", "run the numerical self-certification suites");
    ce->fallthrough();
    ce->add_option("--suite", ce_suite, "oracle | odes | dfs | fringe | all")
        ->check(CLI::IsMember({"oracle", "odes", "dfs", "fringe", "all"}))
        ->capture_default_str();
    ce->add_option("--seed", ce_seed, "seed for the random parameter sets")
        ->capture_default_str();
    ce->add_flag("--json", ce_json, "machine-readable report");
    ce->callback([&] { exit_code = run_certify(ce_suite, ce_seed, ce_json, g); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DiagnosticsError& e) {
        std::cerr << "diagnostics failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
