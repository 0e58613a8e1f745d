#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dfscavity/certify.hpp"
#include "dfscavity/core.hpp"
#include "dfscavity/dfs.hpp"
#include "dfscavity/errors.hpp"
#include "dfscavity/experiment.hpp"
#include "dfscavity/generator.hpp"
#include "dfscavity/io.hpp"
#include "dfscavity/oracle.hpp"
#include "dfscavity/propagator.hpp"

namespace py = pybind11;
using namespace dfscavity;

namespace {

std::vector<std::pair<FockIndex, Complex>>
to_amplitudes(const std::vector<std::pair<std::pair<int, int>, Complex>>& raw) {
    std::vector<std::pair<FockIndex, Complex>> amps;
    amps.reserve(raw.size());
    for (const auto& [idx, amp] : raw)
        amps.push_back({FockIndex{idx.first, idx.second}, amp});
    return amps;
}

} // namespace

PYBIND11_MODULE(_dfscavity, m) {
    m.doc() = "Two damped cavity modes in a common reservoir: closed-form propagation, "
              "a brute-force Lindblad integrator, the two-atom fringe experiment and "
              "decoherence-free subspace tools.";
    m.attr("__version__") = kVersionString;

    // Exception mapping. Derived types are registered after their base so
    // their translators run first and keep the subclass relationship.
    auto& exc_validation = py::register_exception<ValidationError>(m, "ValidationError");
    auto& exc_diagnostics = py::register_exception<DiagnosticsError>(m, "DiagnosticsError");
    py::register_exception<TruncationError>(m, "TruncationError", exc_validation.ptr());
    py::register_exception<SingularFactorizationError>(m, "SingularFactorizationError",
                                                       exc_diagnostics.ptr());

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<>())
        .def_readwrite("omega1", &SystemParams::omega1)
        .def_readwrite("omega2", &SystemParams::omega2)
        .def_readwrite("k11", &SystemParams::k11)
        .def_readwrite("k22", &SystemParams::k22)
        .def_readwrite("k12", &SystemParams::k12)
        .def_readwrite("k21", &SystemParams::k21)
        .def_readwrite("delta11", &SystemParams::delta11)
        .def_readwrite("delta22", &SystemParams::delta22)
        .def_readwrite("delta12", &SystemParams::delta12)
        .def_readwrite("delta21", &SystemParams::delta21)
        .def("max_rate", &SystemParams::max_rate)
        .def("is_physical_dissipator", &SystemParams::is_physical_dissipator,
             py::arg("tol") = 1e-12)
        .def("validate", &SystemParams::validate);

    py::class_<TwoModeDensityMatrix>(m, "TwoModeDensityMatrix")
        .def(py::init<int, Matrix>(), py::arg("n_trunc"), py::arg("rho"))
        .def_readonly("n_trunc", &TwoModeDensityMatrix::n_trunc)
        .def_readonly("rho", &TwoModeDensityMatrix::rho)
        .def("trace_real", &TwoModeDensityMatrix::trace_real)
        .def("hermiticity_error", &TwoModeDensityMatrix::hermiticity_error)
        .def("tail_population", &TwoModeDensityMatrix::tail_population);

    m.def("fock_dim", &fock_dim, py::arg("n_trunc"));
    m.def(
        "pure_state",
        [](const std::vector<std::pair<std::pair<int, int>, Complex>>& amplitudes,
           int n_trunc) { return pure_state(to_amplitudes(amplitudes), n_trunc); },
        py::arg("amplitudes"), py::arg("n_trunc") = kDefaultNTrunc,
        "Normalized pure state from [((n1, n2), amplitude), ...].");
    m.def("vacuum_state", &vacuum_state, py::arg("n_trunc") = kDefaultNTrunc);
    m.def("validate_density_matrix", &validate_density_matrix, py::arg("state"),
          py::arg("expected_trace") = -1.0);
    m.def("purity", &purity, py::arg("state"));

    py::class_<LiouvillianMatrix>(m, "LiouvillianMatrix")
        .def_readonly("n_trunc", &LiouvillianMatrix::n_trunc)
        .def_readonly("params", &LiouvillianMatrix::params)
        .def_readonly("matrix", &LiouvillianMatrix::matrix)
        .def("dim", &LiouvillianMatrix::dim)
        .def("trace_annihilation_error", &LiouvillianMatrix::trace_annihilation_error)
        .def("hermiticity_preservation_error",
             &LiouvillianMatrix::hermiticity_preservation_error);

    m.def("build_liouvillian", &build_liouvillian, py::arg("params"),
          py::arg("n_trunc") = kDefaultNTrunc);
    m.def("apply", &apply, py::arg("liouvillian"), py::arg("rho"),
          "d rho / dt for the vectorized generator, as a matrix.");

    py::class_<ReservoirMode>(m, "ReservoirMode")
        .def(py::init<>())
        .def(py::init([](double omega_k, Complex a1, Complex a2) {
                 return ReservoirMode{omega_k, a1, a2};
             }),
             py::arg("omega_k"), py::arg("alpha_1k"), py::arg("alpha_2k"))
        .def_readwrite("omega_k", &ReservoirMode::omega_k)
        .def_readwrite("alpha_1k", &ReservoirMode::alpha_1k)
        .def_readwrite("alpha_2k", &ReservoirMode::alpha_2k);

    py::class_<ReservoirSpectrum>(m, "ReservoirSpectrum")
        .def(py::init<>())
        .def_readwrite("modes", &ReservoirSpectrum::modes)
        .def_readwrite("tau_c", &ReservoirSpectrum::tau_c)
        .def("validate", &ReservoirSpectrum::validate);

    m.def("coefficients_from_couplings", &coefficients_from_couplings, py::arg("spectrum"),
          py::arg("omega1"), py::arg("omega2"));

    py::class_<IntegratorConfig>(m, "IntegratorConfig")
        .def(py::init<>())
        .def_readwrite("dt", &IntegratorConfig::dt)
        .def_readwrite("method", &IntegratorConfig::method)
        .def_readwrite("max_steps", &IntegratorConfig::max_steps);

    py::class_<IntegrationStats>(m, "IntegrationStats")
        .def_readonly("steps", &IntegrationStats::steps)
        .def_readonly("dt", &IntegrationStats::dt)
        .def_readonly("resymmetrization_norm", &IntegrationStats::resymmetrization_norm);

    m.def(
        "integrate",
        [](const TwoModeDensityMatrix& rho0, const LiouvillianMatrix& l, double t,
           const IntegratorConfig& cfg) { return integrate(rho0, l, t, cfg); },
        py::arg("rho0"), py::arg("liouvillian"), py::arg("t"),
        py::arg("config") = IntegratorConfig{});
    m.def(
        "integrate_with_stats",
        [](const TwoModeDensityMatrix& rho0, const LiouvillianMatrix& l, double t,
           const IntegratorConfig& cfg) {
            IntegrationStats stats;
            auto out = integrate(rho0, l, t, cfg, &stats);
            return py::make_tuple(out, stats);
        },
        py::arg("rho0"), py::arg("liouvillian"), py::arg("t"),
        py::arg("config") = IntegratorConfig{});

    py::class_<PropagatorCoefficients>(m, "PropagatorCoefficients")
        .def_readonly("c", &PropagatorCoefficients::c)
        .def_readonly("r", &PropagatorCoefficients::r)
        .def_readonly("R", &PropagatorCoefficients::R)
        .def_readonly("lambda_minus", &PropagatorCoefficients::lambda_minus)
        .def_readonly("lambda_plus", &PropagatorCoefficients::lambda_plus)
        .def_readonly("F1", &PropagatorCoefficients::F1)
        .def_readonly("F2", &PropagatorCoefficients::F2)
        .def_readonly("L1", &PropagatorCoefficients::L1)
        .def_readonly("L2", &PropagatorCoefficients::L2);

    py::class_<FactorizationSchedule>(m, "FactorizationSchedule")
        .def_readonly("h1", &FactorizationSchedule::h1)
        .def_readonly("h2", &FactorizationSchedule::h2)
        .def_readonly("z_l", &FactorizationSchedule::z_l)
        .def_readonly("z", &FactorizationSchedule::z)
        .def_readonly("n_l", &FactorizationSchedule::n_l)
        .def_readonly("n", &FactorizationSchedule::n)
        .def_readonly("m2", &FactorizationSchedule::m2)
        .def_readonly("p2", &FactorizationSchedule::p2)
        .def_readonly("m1", &FactorizationSchedule::m1)
        .def_readonly("p1", &FactorizationSchedule::p1)
        .def_readonly("q", &FactorizationSchedule::q)
        .def_readonly("q_l", &FactorizationSchedule::q_l);

    m.def("compute_coefficients", &compute_coefficients, py::arg("params"), py::arg("t"));
    m.def("amplitude_transfer", &amplitude_transfer, py::arg("coefficients"));
    m.def("factorization_params", &factorization_params, py::arg("params"), py::arg("t"));
    m.def("propagate_analytic", &propagate_analytic, py::arg("rho0"), py::arg("params"),
          py::arg("t"));
    m.def("single_photon_evolution", &single_photon_evolution, py::arg("phi"),
          py::arg("params"), py::arg("tau"));

    py::class_<ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("delta", &ExperimentConfig::delta)
        .def_readwrite("Omega", &ExperimentConfig::Omega)
        .def_readwrite("Tr_a", &ExperimentConfig::Tr_a)
        .def_readwrite("Tr_b", &ExperimentConfig::Tr_b)
        .def_readwrite("nbar", &ExperimentConfig::nbar)
        .def_readwrite("reduction", &ExperimentConfig::reduction)
        .def_readwrite("T_grid", &ExperimentConfig::T_grid)
        .def("validate", &ExperimentConfig::validate)
        .def("Phi", &ExperimentConfig::Phi)
        .def("phi", &ExperimentConfig::phi)
        .def("prep_time", &ExperimentConfig::prep_time);

    py::enum_<Propagation>(m, "Propagation")
        .value("analytic", Propagation::analytic)
        .value("oracle", Propagation::oracle);

    m.def("effective_decay", &effective_decay, py::arg("nbar"), py::arg("Tr"));
    m.def("frame_params", &frame_params, py::arg("params"), py::arg("config"));
    m.def("pe_ideal", &pe_ideal, py::arg("T"), py::arg("config"));
    m.def("pe_diagonal", &pe_diagonal, py::arg("T"), py::arg("k11"), py::arg("k22"),
          py::arg("config"));
    m.def("pe_dissipative", &pe_dissipative, py::arg("T"), py::arg("params"),
          py::arg("config"));
    m.def(
        "run_protocol",
        [](const SystemParams& params, const ExperimentConfig& cfg, double T,
           Propagation propagation, double chi) {
            return run_protocol(params, cfg, T, propagation, PulsePhaseConvention{chi});
        },
        py::arg("params"), py::arg("config"), py::arg("T"),
        py::arg("propagation") = Propagation::analytic, py::arg("chi") = 0.0);

    py::enum_<ProtectedBranch>(m, "ProtectedBranch")
        .value("none", ProtectedBranch::none)
        .value("minus", ProtectedBranch::minus)
        .value("plus", ProtectedBranch::plus);

    py::class_<DfsReport>(m, "DfsReport")
        .def_readonly("lambda_minus", &DfsReport::lambda_minus)
        .def_readonly("lambda_plus", &DfsReport::lambda_plus)
        .def_readonly("protected_branch", &DfsReport::protected_branch)
        .def_readonly("condition_residual", &DfsReport::condition_residual)
        .def_readonly("kappa_fit", &DfsReport::kappa_fit)
        .def_readonly("kappa_fit_residual", &DfsReport::kappa_fit_residual);

    m.def("dfs_check", &dfs_check, py::arg("params"), py::arg("tolerance") = 1e-9);

    py::class_<NormalModes>(m, "NormalModes")
        .def_readonly("kappa", &NormalModes::kappa)
        .def_readonly("A_matrix", &NormalModes::A_matrix)
        .def_readonly("B_matrix", &NormalModes::B_matrix)
        .def_readonly("k_aa", &NormalModes::k_aa)
        .def_readonly("delta_aa", &NormalModes::delta_aa);

    py::class_<NormalModeSplit>(m, "NormalModeSplit")
        .def_readonly("l_a", &NormalModeSplit::l_a)
        .def_readonly("l_b", &NormalModeSplit::l_b)
        .def_readonly("modes", &NormalModeSplit::modes);

    m.def("normal_modes", &normal_modes, py::arg("params"), py::arg("kappa"),
          py::arg("n_trunc"));
    m.def("normal_mode_split", &normal_mode_split, py::arg("params"), py::arg("kappa"),
          py::arg("n_trunc") = kDefaultNTrunc);

    m.def("dfs_fock_state", &dfs_fock_state, py::arg("kappa"),
          py::arg("n_trunc") = kDefaultNTrunc);
    m.def("dfs_coherent_state", &dfs_coherent_state, py::arg("kappa"), py::arg("v"),
          py::arg("n_trunc") = kDefaultNTrunc);
    m.def("dfs_cat_state", &dfs_cat_state, py::arg("kappa"), py::arg("v"), py::arg("w"),
          py::arg("rel_phase"), py::arg("n_trunc") = kDefaultNTrunc);
    m.def("dfs_state", &dfs_state, py::arg("kind"), py::arg("kappa"),
          py::arg("v") = Complex(0.0, 0.0), py::arg("w") = Complex(0.0, 0.0),
          py::arg("rel_phase") = 0.0, py::arg("n_trunc") = kDefaultNTrunc);

    py::class_<InvarianceRecord>(m, "InvarianceRecord")
        .def_readonly("t", &InvarianceRecord::t)
        .def_readonly("purity_analytic", &InvarianceRecord::purity_analytic)
        .def_readonly("purity_oracle", &InvarianceRecord::purity_oracle)
        .def_readonly("fidelity_analytic", &InvarianceRecord::fidelity_analytic)
        .def_readonly("fidelity_oracle", &InvarianceRecord::fidelity_oracle)
        .def_readonly("theta_star_analytic", &InvarianceRecord::theta_star_analytic)
        .def_readonly("theta_star_oracle", &InvarianceRecord::theta_star_oracle)
        .def_readonly("a_number_analytic", &InvarianceRecord::a_number_analytic)
        .def_readonly("a_number_oracle", &InvarianceRecord::a_number_oracle)
        .def_readonly("b_number_analytic", &InvarianceRecord::b_number_analytic)
        .def_readonly("b_number_oracle", &InvarianceRecord::b_number_oracle);

    py::class_<InvarianceReport>(m, "InvarianceReport")
        .def_readonly("kappa", &InvarianceReport::kappa)
        .def_readonly("records", &InvarianceReport::records)
        .def_readonly("min_purity_analytic", &InvarianceReport::min_purity_analytic)
        .def_readonly("min_purity_oracle", &InvarianceReport::min_purity_oracle)
        .def_readonly("min_fidelity_analytic", &InvarianceReport::min_fidelity_analytic)
        .def_readonly("min_fidelity_oracle", &InvarianceReport::min_fidelity_oracle)
        .def_readonly("max_b_drift_analytic", &InvarianceReport::max_b_drift_analytic)
        .def_readonly("max_b_drift_oracle", &InvarianceReport::max_b_drift_oracle);

    m.def("dfs_invariance_test", &dfs_invariance_test, py::arg("state"), py::arg("params"),
          py::arg("t_grid"), py::arg("oracle_config") = IntegratorConfig{});

    py::class_<RunDirectives>(m, "RunDirectives")
        .def_readonly("n_trunc", &RunDirectives::n_trunc)
        .def_readonly("phase_offset", &RunDirectives::phase_offset)
        .def_readonly("model", &RunDirectives::model);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("params", &RunConfig::params)
        .def_readonly("experiment", &RunConfig::experiment)
        .def_readonly("directives", &RunConfig::directives);

    m.def(
        "load_config",
        [](const std::string& path, bool strict_keys) {
            return load_config(path, strict_keys);
        },
        py::arg("path"), py::arg("strict_keys") = false);

    py::class_<CheckResult>(m, "CheckResult")
        .def_readonly("name", &CheckResult::name)
        .def_readonly("passed", &CheckResult::pass)
        .def_readonly("measured", &CheckResult::measured)
        .def_readonly("tolerance", &CheckResult::tolerance)
        .def_readonly("criterion", &CheckResult::criterion)
        .def_readonly("details", &CheckResult::details)
        .def("__repr__", [](const CheckResult& c) {
            return "<CheckResult " + c.name + (c.pass ? " PASS>" : " FAIL>");
        });

    m.def("certify_oracle", &certify_oracle, py::arg("seed"));
    m.def("certify_odes", &certify_odes, py::arg("seed"));
    m.def("certify_dfs", &certify_dfs, py::arg("seed"));
    m.def("certify_fringe", &certify_fringe);
    m.def("certify_all", &certify_all, py::arg("seed"));
}
