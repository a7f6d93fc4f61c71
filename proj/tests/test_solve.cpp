#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lespectra/operators.hpp"
#include "lespectra/solve.hpp"

using namespace lespectra;

namespace {

double sup_error(const Field& u, const std::function<double(double, double)>& exact) {
    double e = 0.0;
    u.grid().for_interior([&](NodeIndex nd) {
        auto p = u.grid().point(nd);
        e = std::max(e, std::abs(u.at(nd) - exact(p[0], p[1])));
    });
    return e;
}

}  // namespace

TEST_CASE("linear solve reproduces quadratic exactly") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field f(g, -2.0);
    Field u = solve_linear(LinearOpSpec::laplacian(), g, f, Field(g));
    CHECK(sup_error(u, [](double x, double) { return x * (1 - x); }) <= 1e-12);

    CHECK(sup_norm(solve_linear(LinearOpSpec::laplacian(), g, Field(g), Field(g))) ==
          0.0);
}

TEST_CASE("linear solve second-order accurate on sine data") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {199});
    Field f = Field::sample(
        g, [](double x, double) { return -M_PI * M_PI * std::sin(M_PI * x); });
    Field u = solve_linear(LinearOpSpec::laplacian(), g, f, Field(g));
    CHECK(sup_error(u, [](double x, double) { return std::sin(M_PI * x); }) <= 1e-4);
}

TEST_CASE("linear solve in 2D with boundary data") {
    Grid g = make_uniform_grid({{0.0, 1.0}, {0.0, 1.0}}, {39, 39});
    // Harmonic u = x^2 - y^2: zero forcing, exact for the 5-point stencil.
    Field bdata = Field::sample(g, [](double x, double y) { return x * x - y * y; });
    Field u = solve_linear(LinearOpSpec::laplacian(), g, Field(g), bdata);
    CHECK(sup_error(u, [](double x, double y) { return x * x - y * y; }) <= 1e-11);
}

TEST_CASE("singular frozen system is rejected") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {9});
    LinearOpSpec m;
    m.diffusion = {0.0, 0.0, 0.0};
    CHECK_THROWS_AS(solve_linear(m, g, Field(g, 1.0), Field(g)), std::runtime_error);
}

TEST_CASE("policy iteration examples") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field f(g, -1.0);

    // Linear operators need no policy improvement.
    {
        DiscreteOperator dop(g, OperatorSpec::laplacian());
        auto [u, rep] = solve_nonlinear({dop, f, Field(g)});
        CHECK(rep.converged);
        CHECK(rep.iterations <= 2);
        CHECK(rep.policy_switches == 0);
        CHECK(sup_error(u, [](double x, double) { return 0.5 * x * (1 - x); }) <= 1e-12);
    }
    // M^+_{1,2}[u] = -1: the solution is concave, so the alpha branch is
    // active and alpha u'' = -1.
    {
        DiscreteOperator dop(g, OperatorSpec::pucci_plus(EllipticityPair(1, 2)));
        auto [u, rep] = solve_nonlinear({dop, f, Field(g)});
        CHECK(rep.converged);
        CHECK(sup_error(u, [](double x, double) { return 0.5 * x * (1 - x); }) <= 1e-11);
    }
    // max(L, 4L)[u] = -1: u'' < 0 makes 4u'' the smaller value, so the
    // unscaled member is selected and u'' = -1.
    {
        DiscreteOperator dop(g, OperatorSpec::max_of({LinearOpSpec::laplacian(),
                                                      LinearOpSpec::scaled_laplacian(4.0)}));
        auto [u, rep] = solve_nonlinear({dop, f, Field(g)});
        CHECK(rep.converged);
        CHECK(sup_error(u, [](double x, double) { return 0.5 * x * (1 - x); }) <= 1e-11);
        g.for_interior([&](NodeIndex nd) {
            CHECK(dop.residual_at(u, nd) == Catch::Approx(-1.0).margin(1e-9));
        });
    }
    // Trivial data short-circuits.
    {
        DiscreteOperator dop(g, OperatorSpec::pucci_minus(EllipticityPair(1, 2)));
        auto [u, rep] = solve_nonlinear({dop, Field(g), Field(g)});
        CHECK(rep.converged);
        CHECK(sup_norm(u) == 0.0);
    }
}

TEST_CASE("comparison and positive homogeneity of the solve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    DiscreteOperator dop(g, OperatorSpec::pucci_plus(EllipticityPair(1, 3)));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Field f = Field::sample(g, [&](double, double) { return -1.0 - unif(rng); });
    g.for_boundary([&](NodeIndex nd) { f.at(nd) = 0.0; });
    auto [u, rep] = solve_nonlinear({dop, f, Field(g)});
    REQUIRE(rep.converged);

    // Smaller forcing (more negative) gives a larger solution.
    Field delta = Field::sample(g, [&](double, double) { return unif(rng); });
    g.for_boundary([&](NodeIndex nd) { delta.at(nd) = 0.0; });
    auto [u2, rep2] = solve_nonlinear({dop, f - delta, Field(g)});
    REQUIRE(rep2.converged);
    g.for_interior([&](NodeIndex nd) { CHECK(u2.at(nd) >= u.at(nd) - 1e-10); });

    // Positive 1-homogeneity: solve(t f) = t solve(f).
    auto [u3, rep3] = solve_nonlinear({dop, 2.5 * f, Field(g)});
    REQUIRE(rep3.converged);
    g.for_interior([&](NodeIndex nd) {
        CHECK(u3.at(nd) == Catch::Approx(2.5 * u.at(nd)).margin(1e-9));
    });
}

TEST_CASE("policy iteration settles quickly on family operators") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {59});
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<LinearOpSpec> ms;
        for (int k = 0; k < 3; ++k) {
            LinearOpSpec m;
            m.diffusion = {1.0 + std::abs(unif(rng)), 0.0, 0.0};
            m.drift_x = Profile::constant(unif(rng));
            m.zero_order = Profile::constant(-std::abs(unif(rng)));
            ms.push_back(m);
        }
        OperatorSpec spec = trial % 2 ? OperatorSpec::max_of(ms) : OperatorSpec::min_of(ms);
        DiscreteOperator dop(g, spec);
        Field f = Field::sample(g, [&](double, double) { return unif(rng); });
        g.for_boundary([&](NodeIndex nd) { f.at(nd) = 0.0; });
        auto [u, rep] = solve_nonlinear({dop, f, Field(g)});
        CHECK(rep.converged);
        CHECK(rep.policy_switches <= 20);
        CHECK(detail::interior_residual_norm(dop, u, f) <= 1e-9 * (1 + sup_norm(f)));
    }
}

TEST_CASE("isaacs operators with gradient terms still solve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    std::mt19937_64 rng(37);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<LinearOpSpec> ms;
        for (int k = 0; k < 4; ++k) {
            LinearOpSpec m;
            m.diffusion = {1.0 + std::abs(unif(rng)), 0.0, 0.0};
            m.drift_x = Profile::constant(2.0 * unif(rng));
            ms.push_back(m);
        }
        OperatorSpec spec = trial % 2 ? OperatorSpec::sup_inf(ms, 2, 2)
                                      : OperatorSpec::inf_sup(ms, 2, 2);
        spec.gradient_magnitude = Profile::constant(0.5);
        spec.gradient_sign = trial % 3 == 0 ? -1 : +1;
        DiscreteOperator dop(g, spec);
        Field f = Field::sample(g, [&](double, double) { return unif(rng); });
        g.for_boundary([&](NodeIndex nd) { f.at(nd) = 0.0; });
        SolveOptions opts;
        opts.max_sweeps = 400;
        auto [u, rep] = solve_nonlinear({dop, f, Field(g)}, opts);
        CHECK(rep.converged);
        CHECK((rep.method == "policy" || rep.method == "picard"));
    }
}

TEST_CASE("interior error contracts at second order") {
    auto lin_err = [](int n) {
        Grid g = make_uniform_grid({{0.0, 1.0}}, {n});
        Field f = Field::sample(g, [](double x, double) {
            return -M_PI * M_PI * std::sin(M_PI * x);
        });
        Field u = solve_linear(LinearOpSpec::laplacian(), g, f, Field(g));
        return sup_error(u, [](double x, double) { return std::sin(M_PI * x); });
    };
    double e99 = lin_err(99), e199 = lin_err(199);
    CHECK(e99 / e199 >= 3.5);
}

TEST_CASE("abp audit arithmetic") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {199});
    // u = x(1-x), f = -2: excess 1/4, |f^-|_{L^1} = 2, ratio 1/8.
    Field u = Field::sample(g, [](double x, double) { return x * (1 - x); });
    Field f(g, -2.0);
    AbpAudit a = abp_audit(u, f);
    CHECK(a.lhs == Catch::Approx(0.25).margin(1e-4));
    CHECK(a.boundary_term == 0.0);
    CHECK(a.rhs_norm == Catch::Approx(2.0).epsilon(0.02));
    CHECK(a.ratio == Catch::Approx(0.125).epsilon(0.03));

    // Nonpositive u: ratio is zero by convention.
    AbpAudit b = abp_audit(-1.0 * u, f);
    CHECK(b.ratio == 0.0);

    // Positive interior max with no negative forcing: unbounded sample.
    AbpAudit c = abp_audit(u, Field(g, 1.0));
    CHECK(std::isinf(c.ratio));

    // Audited policy solutions stay below the 1D ABP constant.
    DiscreteOperator dop(g, OperatorSpec::pucci_plus(EllipticityPair(1, 2)));
    auto [w, rep] = solve_nonlinear({dop, f, Field(g)});
    REQUIRE(rep.converged);
    AbpAudit d = abp_audit(w, f);
    // The forcing norm integrates interior nodes only, so the discrete sample
    // can sit slightly above the continuum constant 1/8.
    CHECK(d.ratio <= 0.127);
}
