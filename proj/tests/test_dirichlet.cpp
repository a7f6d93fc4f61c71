#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lespectra/dirichlet.hpp"
#include "lespectra/shooting.hpp"

using namespace lespectra;

namespace {

SystemProblem laplace_system(const Grid& g, double lam, double mu, double fval,
                             double p = 1.0, double q = 1.0) {
    Field f(g, fval);
    g.for_boundary([&](NodeIndex nd) { f.at(nd) = 0.0; });
    return {OperatorSpec::laplacian(), OperatorSpec::laplacian(),
            Field(g, 1.0),             Field(g, 1.0),
            ExponentPair(p, q),        lam,
            mu,                        f,
            f};
}

double tridiag_lambda(int n, int k = 1) {
    double h = 1.0 / (n + 1);
    return (2.0 - 2.0 * std::cos(k * M_PI * h)) / (h * h);
}

}  // namespace

TEST_CASE("coupled solve matches the closed form below the first curve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {199});
    double lam = 0.5 * M_PI * M_PI;
    SystemProblem prob = laplace_system(g, lam, lam, -1.0);
    SystemSolution sol = solve_system_picard(prob);
    REQUIRE(sol.report.converged);

    // u = v solves u'' + lam u = -1 with zero boundary values.
    double r = std::sqrt(lam);
    auto exact = [&](double x) {
        return (std::cos(r * (x - 0.5)) / std::cos(0.5 * r) - 1.0) / lam;
    };
    double worst = 0.0;
    g.for_interior([&](NodeIndex nd) {
        double x = g.point(nd)[0];
        worst = std::max(worst, std::abs(sol.u.at(nd) - exact(x)));
    });
    CHECK(worst <= 1e-4);
    CHECK(sup_norm(sol.u - sol.v) <= 1e-9);
}

TEST_CASE("alternating iteration agrees with the direct block solve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {79});
    LinearOpSpec m1;
    m1.drift_x = Profile::constant(0.8);
    LinearOpSpec m2 = LinearOpSpec::scaled_laplacian(1.5);
    m2.zero_order = Profile::constant(-0.5);
    Field f1 = Field::sample(g, [](double x, double) { return -std::sin(M_PI * x); });
    Field f2 = Field::sample(g, [](double x, double) { return x * (x - 1.0); });
    g.for_boundary([&](NodeIndex nd) { f1.at(nd) = f2.at(nd) = 0.0; });
    SystemProblem prob{OperatorSpec::linear(m1), OperatorSpec::linear(m2),
                       Field(g, 1.0),            Field(g, 1.0),
                       ExponentPair(1.0, 1.0),   3.0,
                       2.0,                      f1,
                       f2};
    SystemSolveOptions no_fallback;
    no_fallback.allow_block_fallback = false;
    SystemSolution pic = solve_system_picard(prob, no_fallback);
    REQUIRE(pic.report.converged);
    SystemSolution blk = detail::solve_block_linear(prob);
    CHECK(sup_norm(pic.u - blk.u) <= 1e-8);
    CHECK(sup_norm(pic.v - blk.v) <= 1e-8);

    // Linearity in the data at p = q = 1.
    SystemProblem doubled = prob;
    doubled.f1 = 2.0 * f1;
    doubled.f2 = 2.0 * f2;
    SystemSolution two = solve_system_picard(doubled, no_fallback);
    REQUIRE(two.report.converged);
    CHECK(sup_norm(two.u - 2.0 * pic.u) <= 1e-7);
}

TEST_CASE("zero data gives the zero solution") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    SystemProblem prob = laplace_system(g, 4.0, 4.0, 0.0);
    SystemSolution sol = solve_system_picard(prob);
    CHECK(sol.report.converged);
    CHECK(sup_norm(sol.u) == 0.0);
    CHECK(sup_norm(sol.v) == 0.0);
}

TEST_CASE("picard escalates to the block solve between the curves") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    double lam = 1.5 * tridiag_lambda(99);  // above lambda_1, below lambda_2
    SystemProblem prob = laplace_system(g, lam, lam, -1.0);
    SystemSolution sol = solve_system_picard(prob);
    CHECK(sol.report.converged);
    CHECK(sol.report.method == "block");

    // Newton from zero hits the same solution (the problem is linear).
    SystemSolution nwt = solve_system_newton(prob);
    CHECK(nwt.report.converged);
    CHECK(nwt.report.method == "newton");
    CHECK(sup_norm(nwt.u - sol.u) <= 1e-7);
}

TEST_CASE("monotone signed iteration") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    SystemProblem prob = laplace_system(g, 5.0, 4.0, -1.0);
    SystemSolution mon = solve_system_monotone_signed(prob);
    REQUIRE(mon.report.converged);
    SystemSolveOptions no_fallback;
    no_fallback.allow_block_fallback = false;
    SystemSolution pic = solve_system_picard(prob, no_fallback);
    REQUIRE(pic.report.converged);
    CHECK(sup_norm(mon.u - pic.u) <= 1e-7);

    // Nonpositive data below the curve: positive solutions with Hopf margin.
    CHECK(interior_min(mon.u) > 0.0);
    CHECK(interior_min(mon.v) > 0.0);
    g.for_boundary([&](NodeIndex nd) {
        CHECK(inward_boundary_derivative(mon.u, nd) > 0.0);
        CHECK(inward_boundary_derivative(mon.v, nd) > 0.0);
    });

    // Mirrored use: reflected operators on negated data solve the original
    // problem for nonnegative data after negating back.
    SystemProblem refl = prob;
    refl.f1_op = reflect(prob.f1_op);
    refl.f2_op = reflect(prob.f2_op);
    SystemSolution mir = solve_system_monotone_signed(refl);
    REQUIRE(mir.report.converged);
    CHECK(sup_norm((-1.0 * mir.u) - (-1.0 * mon.u)) <= 1e-7);  // symmetric op: equal

    SystemProblem bad = prob;
    bad.f1 = Field(g, 0.5);
    CHECK_THROWS_AS(solve_system_monotone_signed(bad), std::invalid_argument);
    SystemProblem negp = prob;
    negp.lambda = -1.0;
    CHECK_THROWS_AS(solve_system_monotone_signed(negp), std::invalid_argument);
}

TEST_CASE("monotone iteration diverges above the first curve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    double lam = 1.3 * tridiag_lambda(49);
    SystemProblem prob = laplace_system(g, lam, lam, -1.0);
    SystemSolveOptions opts;
    opts.max_sweeps = 400;
    bool converged = true;
    try {
        converged = solve_system_monotone_signed(prob, opts).report.converged;
    } catch (const std::runtime_error&) {
        converged = false;
    }
    CHECK_FALSE(converged);
}

TEST_CASE("sublinear solve: existence, oracle match, uniqueness") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {199});
    double p = 0.5, q = 1.0;
    SystemProblem prob = laplace_system(g, 1.0, 1.0, 0.0, p, q);
    SystemSolution sol = solve_sublinear(prob);
    REQUIRE(sol.report.converged);
    CHECK(sol.report.method == "sublinear-monotone");
    CHECK(interior_min(sol.u) > 0.0);
    CHECK(interior_min(sol.v) > 0.0);

    auto [ou, ov] = shooting::sublinear_solution(p, q, g);
    CHECK(sup_norm(sol.u - ou) <= 0.01 * sup_norm(ou));
    CHECK(sup_norm(sol.v - ov) <= 0.01 * sup_norm(ov));

    // A second admissible start converges to the same positive solution.
    Field su = 0.9 * sol.u, sv = 0.9 * sol.v;
    SystemSolution again = solve_system_monotone_signed(prob, {}, &su, &sv);
    REQUIRE(again.report.converged);
    CHECK(sup_norm(again.u - sol.u) <= 1e-6);
    CHECK(sup_norm(again.v - sol.v) <= 1e-6);

    CHECK_THROWS_AS(solve_sublinear(laplace_system(g, 1.0, 1.0, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("mp check verdicts") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field tau(g, 1.0);
    EigenPair e = system_principal_eigen(OperatorSpec::laplacian(), OperatorSpec::laplacian(),
                                         tau, tau, ExponentPair(1.0, 1.0), +1);
    double anchor = e.lambda1;
    Field v_diag = (anchor / e.lambda_raw[1]) * (*e.v);

    // Slightly above the curve: the pushed eigenpair is a positive
    // subsolution, so the sign conclusion fails and a witness is attached.
    {
        double lam = 1.05 * anchor;
        ScaledPair w = scaling_map(e.u, v_diag, anchor, lam, 1.0);
        SystemProblem prob = laplace_system(g, lam, w.mu, 0.0);
        PrincipleReport rep = mp_check(prob, w.u, w.v);
        CHECK_FALSE(rep.verdict);
        REQUIRE(rep.witness.has_value());
        CHECK(interior_max(rep.witness->first) > 0.5);
    }
    // Deep inside C1+: subsolutions with nonnegative data stay nonpositive.
    {
        double lam = 0.5 * anchor;
        Field a = Field::sample(g, [](double x, double) { return std::sin(M_PI * x); });
        g.for_boundary([&](NodeIndex nd) { a.at(nd) = 0.0; });
        SystemProblem refl = laplace_system(g, lam, lam, 0.0);
        refl.f1 = -1.0 * a;
        refl.f2 = -1.0 * a;
        SystemSolution sol = solve_system_monotone_signed(refl);
        REQUIRE(sol.report.converged);
        SystemProblem prob = laplace_system(g, lam, lam, 0.0);
        prob.f1 = a;
        prob.f2 = a;
        PrincipleReport rep = mp_check(prob, -1.0 * sol.u, -1.0 * sol.v);
        CHECK(rep.verdict);
    }
    // Negative multipliers: (phi, -phi) is a subsolution at
    // lambda = mu = -anchor, and it violates the sign conclusion.
    {
        SystemProblem prob = laplace_system(g, -anchor, -anchor, 0.0);
        PrincipleReport rep = mp_check(prob, e.u, -1.0 * e.u);
        CHECK_FALSE(rep.verdict);
    }
    // Pairs that are not subsolutions are rejected outright.
    {
        SystemProblem prob = laplace_system(g, 0.5 * anchor, 0.5 * anchor, 0.0);
        Field bump = boundary_distance_bump(g);
        CHECK_THROWS_AS(mp_check(prob, -1.0 * bump, bump), std::invalid_argument);
    }
}

TEST_CASE("mp grid experiment agrees with the region prediction") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    Field tau(g, 1.0);
    ExponentPair exps(2.0, 0.5);
    OperatorSpec f1 = OperatorSpec::max_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(2.0)});
    OperatorSpec f2 = OperatorSpec::min_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(2.0)});
    EigenPair plus = system_principal_eigen(f1, f2, tau, tau, exps, +1);

    std::vector<std::pair<double, double>> pts = {
        {6.0, 6.0}, {20.0, 20.0}, {9.0, 30.0}, {30.0, 9.0}, {12.0, 4.0}};
    MpGridResult res = mp_grid_experiment(f1, f2, tau, tau, exps, pts, plus, 2);
    CHECK(res.total == 5);
    CHECK(res.agreements == res.total);
}

TEST_CASE("anti-maximum scan finds a negativity window above the minus anchor") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {79});
    Field tau(g, 1.0);
    ExponentPair exps(2.0, 0.5);
    OperatorSpec f1 = OperatorSpec::max_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(2.0)});
    OperatorSpec f2 = OperatorSpec::min_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(2.0)});
    EigenPair plus = system_principal_eigen(f1, f2, tau, tau, exps, +1);
    EigenPair minus = system_principal_eigen(f1, f2, tau, tau, exps, -1);
    REQUIRE(plus.lambda1 < minus.lambda1);

    Field df(g, -1.0);
    g.for_boundary([&](NodeIndex nd) { df.at(nd) = 0.0; });
    double a = minus.lambda1;
    std::vector<double> lambdas = {0.9 * a, 1.02 * a, 1.08 * a, 1.15 * a};
    PrincipleReport rep = amp_scan(f1, f2, tau, tau, exps, df, df, lambdas, plus, minus);
    CHECK(rep.verdict);
    CHECK(rep.threshold >= 0.02 * a);
    REQUIRE(rep.table.size() == 4);
    CHECK_FALSE(rep.table[0].converged);  // below the anchor: not scanned
    CHECK(rep.table[1].flag);             // strictly negative just above
    CHECK(rep.table[1].value < 0.0);

    CHECK_THROWS_AS(amp_scan(f1, f2, tau, tau, exps, df, df, lambdas, minus, plus),
                    std::invalid_argument);
    Field pos(g, 1.0);
    CHECK_THROWS_AS(amp_scan(f1, f2, tau, tau, exps, pos, pos, lambdas, plus, minus),
                    std::invalid_argument);
}

TEST_CASE("small domain threshold") {
    SmallDomainOptions opts;
    opts.battery = 8;
    opts.interior_nodes = 49;
    opts.bisections = 22;
    Profile one = Profile::constant(1.0);

    // Decoupled (lambda = mu = 0): the sign conclusion holds at any length.
    PrincipleReport trivial = small_domain_threshold(
        OperatorSpec::laplacian(), OperatorSpec::laplacian(), one, one,
        ExponentPair(1.0, 1.0), 0.0, 0.0, 0.2, 2.0, opts);
    CHECK(trivial.threshold == Catch::Approx(2.0));
    CHECK(trivial.notes == "MP holds on the whole bracket");

    // lambda = mu = 2 pi^2: MP holds iff (pi/L)^2 > 2 pi^2, i.e. L < 1/sqrt(2),
    // and at L = 2 iff the weight multiplier drops below 1/8.
    PrincipleReport rep = small_domain_threshold(
        OperatorSpec::laplacian(), OperatorSpec::laplacian(), one, one,
        ExponentPair(1.0, 1.0), 2.0 * M_PI * M_PI, 2.0 * M_PI * M_PI, 0.2, 2.0, opts);
    CHECK(rep.verdict);
    CHECK(rep.threshold == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    CHECK(rep.threshold2 == Catch::Approx(0.125).epsilon(0.05));
}

TEST_CASE("isolation probe separates the first eigenvalue from the band above") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field tau(g, 1.0);
    double l1 = tridiag_lambda(99), l2 = tridiag_lambda(99, 2);
    std::vector<double> lambdas = {0.5 * l1, l1, 0.5 * (l1 + l2)};
    PrincipleReport rep = isolation_scan(OperatorSpec::laplacian(), OperatorSpec::laplacian(),
                                         tau, tau, ExponentPair(1.0, 1.0), lambdas);
    REQUIRE(rep.table.size() == 3);
    double at_half = rep.table[0].value, at_l1 = rep.table[1].value,
           mid = rep.table[2].value;
    CHECK(at_l1 <= 1e-6);
    CHECK(mid >= 1e3 * at_l1);
    CHECK(at_half >= 1e-2);
}

TEST_CASE("weight validation for coupled problems") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {49});
    SystemProblem prob = laplace_system(g, 1.0, 1.0, -1.0);
    prob.tau2 = Field::sample(g, [](double x, double) { return x > 0.5 ? 1.0 : 0.0; });
    prob.tau1 = Field::sample(g, [](double x, double) { return x < 0.5 ? 1.0 : 0.0; });
    CHECK_THROWS_AS(solve_system_picard(prob), std::invalid_argument);
}
