#include <doctest.h>

#include "support.hpp"
#include "vne/errors.hpp"
#include "vne/seed_factory.hpp"
#include "vne/verification.hpp"
#include "vne/vne_model.hpp"

using namespace vne;
using vtest::Rng;

namespace {

const OperatorMatrix kSx = make_matrix({{0.0, 1.0}, {1.0, 0.0}});

}  // namespace

TEST_SUITE("vne_model") {

TEST_CASE("ModelSpec validation") {
    CHECK_THROWS_AS(ModelSpec(0, diag({1.0, -1.0})), InvalidInput);
    CHECK_THROWS_AS(ModelSpec(1, make_matrix({{0.0, 1.0}, {0.0, 0.0}})), InvalidInput);
    CHECK_THROWS_AS(ModelSpec(1, OperatorMatrix(2, 3)), DimensionMismatch);
    const ModelSpec spec(3, diag({2.0, -1.0}));
    CHECK(spec.power(4)(0, 0) == Complex(16.0));
    CHECK_THROWS_AS(spec.power(5), InvalidInput);
}

TEST_CASE("H(rho) matches the defining sum") {
    Rng rng(101);
    for (int n = 1; n <= 3; ++n) {
        const OperatorMatrix a = vtest::random_hermitian(rng, 5);
        const OperatorMatrix rho = vtest::random_matrix(rng, 5);
        const ModelSpec spec(n, a);
        CHECK((hamiltonian_of(spec, rho) - vtest::hamiltonian_oracle(a, n, rho)).norm() < 1e-12 * (1 + rho.norm() * std::pow(a.norm(), n)));
    }
}

TEST_CASE("the two algebraic forms of the right-hand side agree") {
    Rng rng(102);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = rng.integer(1, 3);
        const int dim = rng.integer(1, 8);
        const ModelSpec spec(n, vtest::random_hermitian(rng, dim));
        const OperatorMatrix rho = vtest::random_matrix(rng, dim);
        const OperatorMatrix a = rhs(spec, rho);
        const OperatorMatrix b = rhs_commutator_form(spec, rho);
        CHECK((a - b).norm() <= 1e-11 * std::max(1.0, hamiltonian_of(spec, rho).norm() * rho.norm()));
        CHECK_NOTHROW(rhs_checked(spec, rho));
    }
}

TEST_CASE("the sigma_x seed has zero right-hand side for n = 2") {
    const ModelSpec spec(2, diag({1.0, -1.0}));
    CHECK(rhs(spec, kSx).norm() < 1e-15);
}

TEST_CASE("residual tolerance schedule") {
    CHECK(residual_tolerance(1e-3) == doctest::Approx(1e-6));
    CHECK(residual_tolerance(0.1) == doctest::Approx(1.0));
}

TEST_CASE("residual detects a perturbed solution") {
    const ModelSpec spec(2, diag({1.0, -1.0}));
    const RhoAt exact = [](double) { return kSx; };
    const RhoAt bent = [](double t) { OperatorMatrix m = kSx; m(0, 0) = 0.1 * t; return m; };
    CHECK(residual(spec, exact, 0.3).pass);
    const ResidualReport r = residual(spec, bent, 0.3);
    CHECK_FALSE(r.pass);
    CHECK(r.residual_norm > 0.05);
}

TEST_CASE("library residual agrees with the independent oracle") {
    Rng rng(103);
    const SeedSolution seed = vtest::random_pure(rng, 2, 4);
    const double h = 1e-3;
    for (double t : {-1.0, 0.0, 0.7}) {
        const double lib = residual(seed.spec, seed.evolution(), t, h).residual_norm;
        const double ora = vtest::equation_residual_oracle(seed.spec.A(), 2, seed.evolution(), t, h);
        CHECK(std::abs(lib - ora) < 1e-9);
        CHECK(lib < 1e-6);
    }
}

}

TEST_SUITE("seed_factory") {

TEST_CASE("two-pair anticommuting seed") {
    const double alphas[] = {1.0, 1.0};
    const double b[] = {1.0, 2.0};
    const SeedSolution s = make_anticommuting_seed(1, alphas, b);
    CHECK(s.dim() == 4);
    const OperatorMatrix& a = s.spec.A();
    CHECK((a * s.rho0 + s.rho0 * a).norm() <= 1e-12);
    // block arithmetic: rho0 = blockdiag(sigma_x, 2 sigma_x)
    CHECK(s.rho0(0, 1) == Complex(1.0));
    CHECK(s.rho0(2, 3) == Complex(2.0));
    CHECK(s.rho0(0, 2) == Complex(0.0));
}

TEST_CASE("anticommuting seeds are stationary solutions for every n") {
    Rng rng(201);
    for (int n = 1; n <= 3; ++n) {
        const SeedSolution s = vtest::random_anticommuting(rng, n, 3);
        CHECK(rhs(s.spec, s.rho0).norm() < 1e-12);
        CHECK(vtest::equation_residual_oracle(s.spec.A(), n, s.evolution(), 0.4, 1e-3) < 1e-9);
    }
}

TEST_CASE("anticommuting seed errors") {
    const double ok[] = {1.0};
    const double zero[] = {0.0};
    CHECK_THROWS_AS(make_anticommuting_seed(1, ok, zero), InvalidInput);
    CHECK_THROWS_AS(make_anticommuting_seed(1, zero, ok), InvalidInput);
}

TEST_CASE("single delta block with vanishing Delta_a") {
    const DeltaBlock blk[] = {{1.0, 0.5}};
    const SeedSolution s = make_delta_commuting_seed(blk, 1.0);
    // rho = I/2 + sigma_x/2, rho^2 = rho, so Delta_1 = 0
    CHECK(delta_operator(s).norm() < 1e-15);
    CHECK((s.spec.A() - diag({1.0, 2.0})).norm() == 0.0);
    const OperatorMatrix h = s.spec.A();
    const double t = 0.8;
    const OperatorMatrix u = vtest::exp_i_hermitian(h, -t);
    CHECK((s.evolve(t) - u * s.rho0 * u.adjoint()).norm() < 1e-13);
}

TEST_CASE("two delta blocks: Delta_a commutes with H") {
    const DeltaBlock blk[] = {{1.0, 1.0}, {3.0, 1.0}};
    const SeedSolution s = make_delta_commuting_seed(blk, 2.0);
    CHECK(commutator(delta_operator(s), s.spec.A()).norm() <= 1e-12);
    CHECK(commutator(s.rho0, s.spec.A()).norm() > 0.1);
    // each block: (kappa^2 - a^2/4) I
    CHECK((delta_operator(s) - 0.0 * identity(4)).norm() < 1e-14);
}

TEST_CASE("delta seeds solve the n = 1 equation") {
    Rng rng(202);
    for (int trial = 0; trial < 5; ++trial) {
        const SeedSolution s = vtest::random_delta(rng, rng.integer(1, 4), rng.uniform(-2, 2));
        for (double t : {-3.0, 0.0, 2.5}) {
            CHECK(vtest::equation_residual_oracle(s.spec.A(), 1, s.evolution(), t, 1e-3) < 1e-6);
        }
    }
    const DeltaBlock bad[] = {{1.0, 0.0}};
    CHECK_THROWS_AS(make_delta_commuting_seed(bad, 1.0), InvalidInput);
}

TEST_CASE("pure-state seeds solve the equation") {
    Rng rng(203);
    for (int n = 1; n <= 3; ++n) {
        const SeedSolution s = vtest::random_pure(rng, n, 5);
        for (double t : {-1.0, 0.5, 2.0}) {
            CHECK(vtest::equation_residual_oracle(s.spec.A(), n, s.evolution(), t, 1e-3) < 1e-6);
        }
        const OperatorMatrix r = s.evolve(1.3);
        CHECK((r * r - r).norm() < 1e-12);
        CHECK(std::abs(r.trace() - 1.0) < 1e-12);
    }
    StateVector psi(2);
    psi << 1.0, 1.0;
    CHECK_THROWS_AS(make_pure_state_seed(ModelSpec(1, diag({1.0, 2.0})), psi), InvalidInput);
}

TEST_CASE("pure-state closed form against RK4 of the Schrodinger flow") {
    Rng rng(204);
    for (int n = 1; n <= 3; ++n) {
        const SeedSolution s = vtest::random_pure(rng, n, 6);
        // recover |psi0> up to phase from the projector
        Eigen::Index k;
        s.rho0.diagonal().real().maxCoeff(&k);
        const StateVector psi = s.rho0.col(k) / std::sqrt(s.rho0(k, k).real());
        const StateVector psi_t = rk4_integrate_nlse(s.spec, psi, 1.0, 1e-3);
        const OperatorMatrix closed = pure_state_solution(s.spec, psi, 1.0);
        CHECK((psi_t * psi_t.adjoint() - closed).norm() <= 1e-6);
    }
}

TEST_CASE("for n = 1 the Schrodinger flow is linear") {
    Rng rng(205);
    const SeedSolution s = vtest::random_pure(rng, 1, 4);
    const StateVector psi = vtest::random_unit_vector(rng, 4);
    CHECK((nlse_rhs(s.spec, psi) - (-kI) * s.spec.A() * psi).norm() < 1e-14);
}

TEST_CASE("commuting seeds are stationary") {
    Rng rng(206);
    const SeedSolution s = vtest::random_commuting(rng, 2, 5);
    CHECK(rhs(s.spec, s.rho0).norm() < 1e-14);
    CHECK_THROWS_AS(make_commuting_seed(ModelSpec(1, diag({1.0, -1.0})), kSx), InvalidInput);
}

TEST_CASE("conjugated seeds keep their relations") {
    Rng rng(207);
    const SeedSolution s = vtest::random_anticommuting(rng, 2, 2);
    const SeedSolution r = conjugate_seed(s, vtest::random_unitary(rng, 4));
    CHECK_NOTHROW(validate_seed(r));
    CHECK(hermiticity_gap(r.spec.A()) == 0.0);
    CHECK_THROWS_AS(conjugate_seed(s, 2.0 * identity(4)), InvalidInput);
}

TEST_CASE("family names round-trip") {
    for (SeedFamily f : {SeedFamily::Anticommuting, SeedFamily::DeltaCommuting, SeedFamily::PureState,
                         SeedFamily::Commuting, SeedFamily::Frame}) {
        CHECK(seed_family_from_string(to_string(f)) == f);
    }
    CHECK_THROWS_AS(seed_family_from_string("nope"), InvalidInput);
}

}
