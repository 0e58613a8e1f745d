#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "dfscavity/core.hpp"
#include "dfscavity/dfs.hpp"
#include "dfscavity/errors.hpp"
#include "dfscavity/generator.hpp"

using namespace dfscavity;

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// k22 + i d22 = kappa^2 (k11 + i d11), cross = kappa (k11 + i d11), equal omega
SystemParams manifold_params(double kappa, double k11 = 0.8, double d11 = 0.3,
                             double omega = 2.1) {
    SystemParams p;
    p.k11 = k11;
    p.delta11 = d11;
    p.k22 = kappa * kappa * k11;
    p.delta22 = kappa * kappa * d11;
    p.k12 = p.k21 = kappa * k11;
    p.delta12 = p.delta21 = kappa * d11;
    p.omega1 = p.omega2 = omega;
    return p;
}

Matrix collective_number(double kappa, int n_trunc, bool damped) {
    const auto ops = mode_operators(n_trunc);
    const double norm = std::sqrt(1.0 + kappa * kappa);
    const Matrix op = damped ? Matrix((ops.a1 + kappa * ops.a2) / norm)
                             : Matrix((ops.a2 - kappa * ops.a1) / norm);
    return op.adjoint() * op;
}

double wrapped_distance(double theta, double target) {
    double d = std::fmod(std::abs(theta - target), two_pi);
    return std::min(d, two_pi - d);
}

} // namespace

TEST_CASE("on the manifold the check recovers kappa and a non-decaying branch") {
    const double kappa = 1.5;
    const auto p = manifold_params(kappa);
    const auto report = dfs_check(p);
    CHECK(report.kappa_fit == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(report.kappa_fit_residual <= 1e-12);
    CHECK(report.condition_residual <= 1e-12);
    REQUIRE(report.protected_branch != ProtectedBranch::none);

    const Complex quiet = report.protected_branch == ProtectedBranch::minus
                              ? report.lambda_minus
                              : report.lambda_plus;
    const Complex loud = report.protected_branch == ProtectedBranch::minus
                             ? report.lambda_plus
                             : report.lambda_minus;
    CHECK(std::abs(quiet.real()) <= 1e-12);
    CHECK(loud.real() == doctest::Approx(-(1.0 + kappa * kappa) * p.k11).epsilon(1e-12));
}

TEST_CASE("uncoupled unequal decay offers no protection") {
    SystemParams p;
    p.k11 = 1.0;
    p.k22 = 2.0;
    const auto report = dfs_check(p);
    CHECK(report.protected_branch == ProtectedBranch::none);
    CHECK(report.condition_residual == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.kappa_fit_residual > 0.1);

    // fully decoupled single-mode decay is the kappa = 0 corner of the manifold
    SystemParams corner;
    corner.k11 = 0.7;
    const auto corner_report = dfs_check(corner);
    CHECK(corner_report.protected_branch != ProtectedBranch::none);
    CHECK(corner_report.kappa_fit == doctest::Approx(0.0));
    CHECK(corner_report.kappa_fit_residual <= 1e-15);
}

TEST_CASE("the generator splits exactly into damped and rotating parts") {
    const double kappa = 1.5;
    const auto p = manifold_params(kappa);
    const int n_trunc = 2;
    const auto split = normal_mode_split(p, kappa, n_trunc);
    const auto full = build_liouvillian(p, n_trunc);
    CHECK((full.matrix - split.l_a.matrix - split.l_b.matrix).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(split.modes.kappa == kappa);
    CHECK(split.modes.k_aa == p.k11);
    CHECK(split.modes.delta_aa == p.delta11);

    // the normal-mode operators follow the stated combinations
    const auto ops = mode_operators(n_trunc);
    const double norm = std::sqrt(1.0 + kappa * kappa);
    CHECK((split.modes.A_matrix - (ops.a1 + kappa * ops.a2) / norm).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK((split.modes.B_matrix - (ops.a2 - kappa * ops.a1) / norm).cwiseAbs().maxCoeff() <= 1e-14);

    // one B excitation is diagonal in the B number and therefore stationary
    const auto fock = dfs_fock_state(kappa, n_trunc);
    CHECK(apply(full, fock.rho).cwiseAbs().maxCoeff() <= 1e-12);

    auto off = p;
    off.k22 *= 1.05;
    CHECK_THROWS_AS(normal_mode_split(off, kappa, n_trunc), ValidationError);
    auto detuned = p;
    detuned.omega2 += 0.3;
    CHECK_THROWS_AS(normal_mode_split(detuned, kappa, n_trunc), ValidationError);
}

TEST_CASE("protected states live on the rotating mode only") {
    const double kappa = 1.5;
    const int n_trunc = 1;
    const auto fock = dfs_fock_state(kappa, n_trunc);
    const double w = 1.0 + kappa * kappa;
    const int f01 = flatten({0, 1}, n_trunc);
    const int f10 = flatten({1, 0}, n_trunc);
    CHECK(fock.rho(f01, f01).real() == doctest::Approx(1.0 / w).epsilon(1e-14));
    CHECK(fock.rho(f10, f10).real() == doctest::Approx(kappa * kappa / w).epsilon(1e-14));
    CHECK(fock.rho(f01, f10).real() == doctest::Approx(-kappa / w).epsilon(1e-14));

    const double v_amp = 0.4;
    const auto coherent = dfs_coherent_state(0.5, Complex(v_amp, 0.0), 6);
    CHECK(coherent.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purity(coherent) == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix na = collective_number(0.5, 6, true);
    const Matrix nb = collective_number(0.5, 6, false);
    // <A+A> vanishes only up to the truncation tail, which the builder
    // guarantees below 1e-8
    CHECK((na * coherent.rho).trace().real() <= 1e-8);
    // B has eigenvalue v sqrt(1+kappa^2) on this state
    CHECK((nb * coherent.rho).trace().real() ==
          doctest::Approx(v_amp * v_amp * 1.25).epsilon(1e-8));

    CHECK_THROWS_AS(dfs_coherent_state(0.5, Complex(2.0, 0.0), 2), TruncationError);
}

TEST_CASE("cat states normalize through the exact coherent overlap") {
    const double kappa = 1.0;
    const Complex v(0.5, 0.0);
    const auto cat = dfs_cat_state(kappa, v, -v, 0.0, 8);
    CHECK(cat.trace_real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(purity(cat) == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix na = collective_number(kappa, 8, true);
    const Matrix nb = collective_number(kappa, 8, false);
    CHECK((na * cat.rho).trace().real() <= 1e-10);
    // even cat of +-beta with beta^2 = |v|^2 (1+kappa^2): <n> = beta^2 tanh(beta^2)
    const double beta2 = std::norm(v) * (1.0 + kappa * kappa);
    CHECK((nb * cat.rho).trace().real() ==
          doctest::Approx(beta2 * std::tanh(beta2)).epsilon(1e-7));

    CHECK_THROWS_AS(dfs_cat_state(kappa, v, v, std::numbers::pi, 8), ValidationError);
    CHECK_THROWS_AS(dfs_state("squeezed", kappa, v, -v, 0.0, 8), ValidationError);
    CHECK((dfs_state("fock", kappa, v, -v, 0.0, 2).rho - dfs_fock_state(kappa, 2).rho)
              .cwiseAbs()
              .maxCoeff() == 0.0);
}

TEST_CASE("a protected state survives both propagators untouched") {
    const double kappa = 1.0;
    const auto p = manifold_params(kappa, 0.4, 0.15, 0.7);
    const auto state = dfs_fock_state(kappa, 2);
    const std::vector<double> grid{0.0, 0.9, 2.2};
    const auto report = dfs_invariance_test(state, p, grid);

    CHECK(report.kappa == doctest::Approx(kappa).epsilon(1e-12));
    CHECK(report.min_purity_analytic >= 1.0 - 1e-12);
    CHECK(report.min_fidelity_analytic >= 1.0 - 1e-12);
    CHECK(report.min_purity_oracle >= 1.0 - 1e-8);
    CHECK(report.min_fidelity_oracle >= 1.0 - 1e-8);
    CHECK(report.max_b_drift_analytic <= 1e-12);
    CHECK(report.max_b_drift_oracle <= 1e-8);
    for (const auto& rec : report.records) {
        CHECK(std::abs(rec.a_number_analytic) <= 1e-12);
        CHECK(std::abs(rec.a_number_oracle) <= 1e-8);
    }
}

TEST_CASE("a superposition across B levels needs exactly the free rotation undone") {
    const double kappa = 1.0;
    const double omega = 0.7;
    const auto p = manifold_params(kappa, 0.4, 0.15, omega);
    // vacuum plus one B excitation: picks up a relative phase omega t
    const auto state = pure_state({{{0, 0}, Complex(1.0, 0.0)},
                                   {{0, 1}, Complex(1.0, 0.0)},
                                   {{1, 0}, Complex(-kappa, 0.0)}},
                                  2);
    const std::vector<double> grid{2.0};
    const auto report = dfs_invariance_test(state, p, grid);
    CHECK(report.min_fidelity_analytic >= 1.0 - 1e-10);
    const auto& rec = report.records.front();
    // the maximizer is defined modulo 2 pi and up to the rotation direction
    const double direct = wrapped_distance(rec.theta_star_analytic, omega * rec.t);
    const double mirrored = wrapped_distance(rec.theta_star_analytic, -omega * rec.t);
    CHECK(std::min(direct, mirrored) <= 1e-6);
    CHECK(std::min(wrapped_distance(rec.theta_star_oracle, omega * rec.t),
                   wrapped_distance(rec.theta_star_oracle, -omega * rec.t)) <= 1e-4);
}

TEST_CASE("an unprotected excitation decays at the collective rate") {
    const double kappa = 2.0;
    const double k11 = 0.3;
    const auto p = manifold_params(kappa, k11, 0.1, 0.9);
    const auto state = pure_state({{{1, 0}, Complex(1.0, 0.0)}}, 2);
    const std::vector<double> grid{0.25, 0.5};
    const auto report = dfs_invariance_test(state, p, grid);

    const double a0 = 1.0 / (1.0 + kappa * kappa); // |1,0> has 1/5 weight on A
    const double rate = 2.0 * (1.0 + kappa * kappa) * k11;
    for (const auto& rec : report.records) {
        const double expected = a0 * std::exp(-rate * rec.t);
        CHECK(rec.a_number_analytic == doctest::Approx(expected).epsilon(1e-10));
        CHECK(rec.a_number_oracle == doctest::Approx(expected).epsilon(1e-6));
    }
    // coherence between the A and B parts is lost: the state is not protected
    CHECK(report.min_purity_analytic < 0.9);
}

TEST_CASE("the invariance driver validates its grid") {
    const auto p = manifold_params(1.0);
    const auto state = dfs_fock_state(1.0, 2);
    CHECK_THROWS_AS(dfs_invariance_test(state, p, {}), ValidationError);
    CHECK_THROWS_AS(dfs_invariance_test(state, p, {-1.0, 0.5}), ValidationError);
    CHECK_THROWS_AS(dfs_invariance_test(state, p, {0.5, 0.5}), ValidationError);
}
