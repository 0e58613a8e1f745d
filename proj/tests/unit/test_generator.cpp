#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dfscavity/core.hpp"
#include "dfscavity/errors.hpp"
#include "dfscavity/generator.hpp"
#include "dfscavity/propagator.hpp"

using namespace dfscavity;

namespace {

SystemParams general_params() {
    SystemParams p;
    p.omega1 = 1.1;
    p.omega2 = 0.6;
    p.k11 = 0.3;
    p.k22 = 0.7;
    p.k12 = 0.2;
    p.k21 = -0.4;
    p.delta11 = 0.5;
    p.delta22 = -0.3;
    p.delta12 = 0.25;
    p.delta21 = -0.15;
    return p;
}

TwoModeDensityMatrix low_support_state(int n_trunc) {
    using C = Complex;
    return pure_state({{{0, 0}, C(0.4, 0.0)},
                       {{1, 0}, C(0.5, 0.2)},
                       {{0, 1}, C(-0.3, 0.4)},
                       {{1, 1}, C(0.2, -0.5)},
                       {{2, 0}, C(0.1, 0.3)}},
                      n_trunc);
}

} // namespace

TEST_CASE("generator preserves trace and hermiticity as matrix identities") {
    const auto l = build_liouvillian(general_params(), 3);
    CHECK(l.dim() == 256);
    CHECK(l.trace_annihilation_error() <= 1e-12);
    CHECK(l.hermiticity_preservation_error() <= 1e-12);

    // a set with every term switched on, including nonphysical cross signs
    SystemParams wild = general_params();
    wild.k12 = 1.9;
    wild.k21 = 1.7;
    const auto lw = build_liouvillian(wild, 2);
    CHECK(lw.trace_annihilation_error() <= 1e-12);
    CHECK(lw.hermiticity_preservation_error() <= 1e-12);

    SystemParams bad;
    bad.k22 = -1.0;
    CHECK_THROWS_AS(build_liouvillian(bad, 2), ValidationError);
}

TEST_CASE("vacuum is stationary for every parameter set") {
    for (const auto& p : {SystemParams{}, general_params()}) {
        const auto l = build_liouvillian(p, 2);
        const auto vac = vacuum_state(2);
        CHECK(apply(l, vac.rho).cwiseAbs().maxCoeff() <= 1e-14);
    }
}

TEST_CASE("generator matches the time derivative of the analytic propagator") {
    // Richardson difference of the closed-form flow: the two implementations
    // share no code, so agreement pins the coefficient groups to the
    // factorization schedule.
    const auto p = general_params();
    const int n_trunc = 3;
    const auto l = build_liouvillian(p, n_trunc);
    const auto rho0 = low_support_state(n_trunc);

    const double eps = 1e-5;
    const Matrix r1 = propagate_analytic(rho0, p, eps).rho;
    const Matrix r2 = propagate_analytic(rho0, p, 2.0 * eps).rho;
    const Matrix fd = (4.0 * r1 - r2 - 3.0 * rho0.rho) / (2.0 * eps);
    const Matrix gen = apply(l, rho0.rho);
    CHECK((fd - gen).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("relabeling the modes conjugates the generator by the swap") {
    const auto p = general_params();
    SystemParams q = p;
    std::swap(q.omega1, q.omega2);
    std::swap(q.k11, q.k22);
    std::swap(q.delta11, q.delta22);
    std::swap(q.k12, q.k21);
    std::swap(q.delta12, q.delta21);

    const int n_trunc = 2;
    const int d = fock_dim(n_trunc);
    Matrix perm = Matrix::Zero(d, d);
    for (int n1 = 0; n1 <= n_trunc; ++n1)
        for (int n2 = 0; n2 <= n_trunc; ++n2)
            perm(flatten({n2, n1}, n_trunc), flatten({n1, n2}, n_trunc)) = 1.0;
    const Matrix super_swap = kron(perm, perm); // vec(P rho P), P symmetric

    const auto l = build_liouvillian(p, n_trunc);
    const auto ls = build_liouvillian(q, n_trunc);
    const Matrix conjugated = super_swap * l.matrix * super_swap;
    CHECK((ls.matrix - conjugated).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("a single resonant reservoir mode gives the exact plateau rate") {
    ReservoirSpectrum spectrum;
    spectrum.tau_c = 12.0;
    spectrum.modes.push_back({10.0, Complex(0.4, 0.0), Complex(0.6, 0.0)});
    const auto p = coefficients_from_couplings(spectrum, 10.0, 10.0);
    CHECK(p.k11 == doctest::Approx(0.16 * 12.0).epsilon(1e-12));
    CHECK(p.k22 == doctest::Approx(0.36 * 12.0).epsilon(1e-12));
    CHECK(p.k12 == doctest::Approx(0.24 * 12.0).epsilon(1e-12));
    CHECK(p.k21 == doctest::Approx(0.24 * 12.0).epsilon(1e-12));
    CHECK(std::abs(p.delta11) <= 1e-12);
    CHECK(std::abs(p.delta12) <= 1e-12);
    CHECK(p.omega1 == 10.0);
    CHECK(p.omega2 == 10.0);
}

TEST_CASE("a dense flat band reproduces the golden-rule rate") {
    // density of modes 1/spacing, so k11 -> pi * density * |alpha|^2 once
    // tau_c resolves the band much more finely than its width
    const double lo = 5.0, hi = 15.0;
    const int n_modes = 2001;
    const double spacing = (hi - lo) / (n_modes - 1);
    const double alpha = 0.3;
    ReservoirSpectrum spectrum;
    spectrum.tau_c = 50.0;
    for (int k = 0; k < n_modes; ++k)
        spectrum.modes.push_back({lo + spacing * k, Complex(alpha, 0.0), Complex(alpha, 0.0)});

    const auto p = coefficients_from_couplings(spectrum, 10.0, 10.0);
    const double golden = std::numbers::pi * alpha * alpha / spacing;
    CHECK(p.k11 == doctest::Approx(golden).epsilon(0.05));
    CHECK(std::abs(p.delta11) <= 0.05 * p.k11); // symmetric band, shift cancels
    // equal couplings at equal frequencies make the cross rate equal too
    CHECK(p.k12 == doctest::Approx(p.k11).epsilon(1e-12));
    CHECK(p.k21 == doctest::Approx(p.k11).epsilon(1e-12));
}

TEST_CASE("reservoir spectrum validation") {
    ReservoirSpectrum empty;
    empty.tau_c = 1.0;
    CHECK_THROWS_AS(empty.validate(), ValidationError);

    ReservoirSpectrum bad_tau;
    bad_tau.modes.push_back({1.0, Complex(0.1, 0.0), Complex(0.1, 0.0)});
    bad_tau.tau_c = 0.0;
    CHECK_THROWS_AS(bad_tau.validate(), ValidationError);

    ReservoirSpectrum bad_mode = bad_tau;
    bad_mode.tau_c = 1.0;
    bad_mode.modes.push_back({-2.0, Complex(0.1, 0.0), Complex(0.1, 0.0)});
    CHECK_THROWS_AS(bad_mode.validate(), ValidationError);
    bad_mode.modes.pop_back();
    CHECK_NOTHROW(bad_mode.validate());
}
