#include <doctest.h>

#include <complex>

#include "dfscavity/core.hpp"
#include "dfscavity/errors.hpp"

using namespace dfscavity;
using Complex = std::complex<double>;

TEST_CASE("flat index round trip covers the whole truncated space") {
    const int n_trunc = 3;
    REQUIRE(fock_dim(n_trunc) == 16);
    for (int n1 = 0; n1 <= n_trunc; ++n1) {
        for (int n2 = 0; n2 <= n_trunc; ++n2) {
            const int flat = flatten({n1, n2}, n_trunc);
            CHECK(flat == n1 * (n_trunc + 1) + n2);
            const FockIndex back = unflatten(flat, n_trunc);
            CHECK(back.n1 == n1);
            CHECK(back.n2 == n2);
        }
    }
    CHECK_THROWS_AS(flatten({4, 0}, 3), TruncationError);
    CHECK_THROWS_AS(flatten({0, -1}, 3), TruncationError);
    CHECK_THROWS_AS(fock_dim(-1), ValidationError);
}

TEST_CASE("mode operators carry the ladder amplitudes on the right tensor slot") {
    const int n_trunc = 3;
    const auto ops = mode_operators(n_trunc);
    // a1 removes a photon from mode 1 with amplitude sqrt(n1), leaving mode 2
    // alone, and vice versa.
    for (int n1 = 0; n1 <= n_trunc; ++n1) {
        for (int n2 = 0; n2 <= n_trunc; ++n2) {
            const int col = flatten({n1, n2}, n_trunc);
            if (n1 > 0) {
                const int row = flatten({n1 - 1, n2}, n_trunc);
                CHECK(ops.a1(row, col).real() == doctest::Approx(std::sqrt(double(n1))).epsilon(1e-15));
            }
            if (n2 > 0) {
                const int row = flatten({n1, n2 - 1}, n_trunc);
                CHECK(ops.a2(row, col).real() == doctest::Approx(std::sqrt(double(n2))).epsilon(1e-15));
            }
            CHECK(ops.a1.col(col).cwiseAbs().sum() == doctest::Approx(n1 > 0 ? std::sqrt(double(n1)) : 0.0));
        }
    }
    // On the truncated space [a, a^dag] = 1 - (N+1) |N><N| per mode.
    const Eigen::MatrixXcd comm1 = ops.a1 * ops.a1.adjoint() - ops.a1.adjoint() * ops.a1;
    for (int n1 = 0; n1 <= n_trunc; ++n1) {
        const int f = flatten({n1, 0}, n_trunc);
        const double expected = (n1 == n_trunc) ? -double(n_trunc) : 1.0;
        CHECK(comm1(f, f).real() == doctest::Approx(expected).epsilon(1e-14));
    }
}

TEST_CASE("pure_state normalizes and accumulates repeated amplitudes") {
    const int n_trunc = 2;
    auto state = pure_state({{{0, 0}, Complex(1.0, 0.0)}, {{1, 0}, Complex(0.0, 1.0)}}, n_trunc);
    CHECK(state.rho.trace().real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(purity(state) == doctest::Approx(1.0).epsilon(1e-14));
    const int f00 = flatten({0, 0}, n_trunc);
    const int f10 = flatten({1, 0}, n_trunc);
    CHECK(state.rho(f00, f00).real() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(state.rho(f10, f10).real() == doctest::Approx(0.5).epsilon(1e-14));
    // off-diagonal keeps the relative phase: <00|rho|10> = conj(i)/2 = -i/2
    CHECK(state.rho(f00, f10).imag() == doctest::Approx(-0.5).epsilon(1e-14));

    // the same index listed twice adds coherently
    auto doubled = pure_state({{{0, 0}, Complex(0.5, 0.0)}, {{0, 0}, Complex(0.5, 0.0)}}, n_trunc);
    CHECK(doubled.rho(f00, f00).real() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(pure_state({{{0, 0}, Complex(0.0, 0.0)}}, n_trunc), ValidationError);
    CHECK_THROWS_AS(pure_state({}, n_trunc), ValidationError);
}

TEST_CASE("vacuum state is the normalized projector on |0,0>") {
    const auto vac = vacuum_state(3);
    CHECK(vac.rho.trace().real() == doctest::Approx(1.0));
    CHECK(vac.rho(0, 0).real() == doctest::Approx(1.0));
    CHECK(vac.rho.cwiseAbs().sum() == doctest::Approx(1.0));
    validate_density_matrix(vac, 1.0);
}

TEST_CASE("validate_density_matrix rejects broken matrices") {
    auto state = vacuum_state(1);
    CHECK_NOTHROW(validate_density_matrix(state));

    auto skew = state;
    skew.rho(0, 1) = Complex(1e-6, 0.0);  // not matched at (1, 0)
    CHECK_THROWS_AS(validate_density_matrix(skew), DiagnosticsError);

    auto negative = state;
    negative.rho(0, 0) = Complex(1.5, 0.0);
    negative.rho(1, 1) = Complex(-0.5, 0.0);
    CHECK_THROWS_AS(validate_density_matrix(negative), DiagnosticsError);

    auto off_trace = state;
    off_trace.rho *= 0.9;
    CHECK_THROWS_AS(validate_density_matrix(off_trace, 1.0), DiagnosticsError);
    CHECK_NOTHROW(validate_density_matrix(off_trace));  // trace in [0, 1] is fine unannounced
}

TEST_CASE("kron follows the row-major vectorization convention") {
    Eigen::MatrixXcd a(2, 2), b(2, 2);
    a << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 1);
    b << Complex(0, 1), Complex(5, 0), Complex(6, 0), Complex(7, -2);
    const Eigen::MatrixXcd k = kron(a, b);
    REQUIRE(k.rows() == 4);
    for (int i1 = 0; i1 < 2; ++i1)
        for (int i2 = 0; i2 < 2; ++i2)
            for (int j1 = 0; j1 < 2; ++j1)
                for (int j2 = 0; j2 < 2; ++j2)
                    CHECK(std::abs(k(i1 * 2 + i2, j1 * 2 + j2) - a(i1, j1) * b(i2, j2)) < 1e-15);

    // vec(X rho Y) = (X kron Y^T) vec(rho) under row-major stacking
    Eigen::MatrixXcd rho(2, 2);
    rho << Complex(0.5, 0), Complex(0.1, 0.2), Complex(0.1, -0.2), Complex(0.5, 0);
    const Eigen::VectorXcd lhs = vectorize(a * rho * b);
    const Eigen::VectorXcd rhs = kron(a, b.transpose()) * vectorize(rho);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((unvectorize(vectorize(rho), 2) - rho).cwiseAbs().maxCoeff() == 0.0);
    CHECK(vectorize(rho)(0 * 2 + 1) == rho(0, 1));
}

TEST_CASE("tail population counts the outermost Fock shell") {
    const int n_trunc = 2;
    auto state = pure_state({{{0, 0}, Complex(std::sqrt(0.75), 0.0)}, {{2, 1}, Complex(0.5, 0.0)}}, n_trunc);
    CHECK(state.tail_population() == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(vacuum_state(2).tail_population() == doctest::Approx(0.0));
}

TEST_CASE("system parameter validation and the dissipator positivity test") {
    SystemParams p;
    p.k11 = 1.0;
    p.k22 = 4.0;
    CHECK_NOTHROW(p.validate());
    CHECK(p.max_rate() == doctest::Approx(4.0));
    CHECK(p.is_physical_dissipator());

    // the symmetric boundary k12 = k21 = sqrt(k11 k22) is still positive
    p.k12 = 2.0;
    p.k21 = 2.0;
    CHECK(p.is_physical_dissipator());

    // beyond the boundary the kernel has a negative eigenvalue
    p.k12 = 2.5;
    p.k21 = 2.5;
    CHECK_FALSE(p.is_physical_dissipator());
    CHECK_NOTHROW(p.validate());  // still a valid generator, just not CP

    // a purely antisymmetric cross rate is a beam splitter, not damping
    p.k12 = 2.5;
    p.k21 = -2.5;
    CHECK(p.is_physical_dissipator());

    // the antisymmetric part of the cross shifts joins the kernel ...
    p.k12 = 2.0;
    p.k21 = 2.0; // |w| = 4 sits exactly on the 4 k11 k22 = 16 boundary
    p.delta12 = 0.3;
    p.delta21 = -0.3;
    CHECK_FALSE(p.is_physical_dissipator());
    // ... while the symmetric part is a Hamiltonian and costs nothing
    p.delta21 = 0.3;
    CHECK(p.is_physical_dissipator());
    p.delta12 = 0.0;
    p.delta21 = 0.0;
    CHECK(p.is_physical_dissipator());

    SystemParams bad;
    bad.k11 = -0.1;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    SystemParams nan_params;
    nan_params.omega1 = std::nan("");
    CHECK_THROWS_AS(nan_params.validate(), ValidationError);
}
