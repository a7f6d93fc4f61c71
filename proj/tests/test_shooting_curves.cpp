#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "lespectra/curves.hpp"
#include "lespectra/eigen.hpp"
#include "lespectra/shooting.hpp"

using namespace lespectra;

// Regression constant: shooting value for (p,q) = (2, 1/2), recorded once
// from the oracle itself and frozen.
static constexpr double kLambda1_2_half = 9.7356142910790524;

TEST_CASE("shooting recovers pi^2 in the linear case") {
    double l = shooting::principal_eigenvalue(1.0, 1.0);
    CHECK(l == Catch::Approx(M_PI * M_PI).epsilon(1e-10));
}

TEST_CASE("shooting value for (2, 1/2) is stable") {
    double l = shooting::principal_eigenvalue(2.0, 0.5);
    CHECK(l == Catch::Approx(kLambda1_2_half).epsilon(1e-10));
    // p <-> q symmetry of the matched system.
    double l2 = shooting::principal_eigenvalue(0.5, 2.0);
    CHECK(l2 == Catch::Approx(l).epsilon(1e-10));

    CHECK_THROWS_AS(shooting::principal_eigenvalue(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("boundary miss is positive below the eigenvalue, zero at it") {
    CHECK(shooting::boundary_miss(1.0, 1.0, 5.0) > 0.1);
    CHECK(shooting::boundary_miss(1.0, 1.0, 9.0) > 0.0);
    CHECK(std::abs(shooting::boundary_miss(1.0, 1.0, M_PI * M_PI)) <= 1e-6);
}

TEST_CASE("sublinear shot satisfies the system on a grid") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {199});
    double p = 0.5, q = 1.0;
    auto [u, v] = shooting::sublinear_solution(p, q, g);
    CHECK(interior_min(u) > 0.0);
    CHECK(interior_min(v) > 0.0);
    CHECK(u.at({0, 0}) == 0.0);
    CHECK(std::abs(u.at({g.npts(0) - 1, 0})) <= 1e-10);

    double h = g.h(0);
    double worst = 0.0, scale = 0.0;
    g.for_interior([&](NodeIndex nd) {
        // Skip a boundary layer: with p < 1 the fourth derivative of v blows
        // up like dist^(p - 3/2) at the endpoints, degrading the finite
        // difference there even though the solution itself is accurate.
        double x = g.point(nd)[0];
        if (std::min(x, 1.0 - x) < 0.05) return;
        double d2u = (u.at({nd.i + 1, 0}) - 2 * u.at(nd) + u.at({nd.i - 1, 0})) / (h * h);
        double d2v = (v.at({nd.i + 1, 0}) - 2 * v.at(nd) + v.at({nd.i - 1, 0})) / (h * h);
        worst = std::max(worst, std::abs(d2u + signed_power(v.at(nd), q)));
        worst = std::max(worst, std::abs(d2v + signed_power(u.at(nd), p)));
        scale = std::max(scale, std::abs(signed_power(u.at(nd), p)));
    });
    CHECK(worst <= 1e-3 * scale);

    CHECK_THROWS_AS(shooting::sublinear_solution(1.0, 1.0, g), std::invalid_argument);
}

TEST_CASE("curve arithmetic") {
    SpectralCurve c(2.0, 1.0, CurveLabel::Plus);
    CHECK(curve_mu(c, 2.0) == Catch::Approx(2.0));   // fixed point on the diagonal
    CHECK(curve_mu(c, 1.0) == Catch::Approx(4.0));
    CHECK(curve_mu(c, 4.0) == Catch::Approx(1.0));
    SpectralCurve d(3.0, 2.0, CurveLabel::Minus);
    CHECK(curve_mu(d, 1.0) == Catch::Approx(27.0));
    CHECK(curve_mu(d, 3.0) == Catch::Approx(3.0));
    CHECK_THROWS_AS(curve_mu(c, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(SpectralCurve(-1.0, 1.0, CurveLabel::Plus), std::invalid_argument);
}

TEST_CASE("anchor recovery inverts the curve") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> anch(0.1, 50.0), pd(0.1, 3.0), ld(0.05, 80.0);
    for (int it = 0; it < 100; ++it) {
        double a = anch(rng), p = pd(rng), lam = ld(rng);
        double mu = curve_mu(SpectralCurve(a, p, CurveLabel::Plus), lam);
        CHECK(std::abs(anchor_recovery(lam, mu, p) - a) <= 1e-14 * a);
    }
    CHECK_THROWS_AS(anchor_recovery(-1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("scaling map pushes an eigenpair along its curve") {
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field tau(g, 1.0);
    EigenPair e = system_principal_eigen(OperatorSpec::laplacian(), OperatorSpec::laplacian(),
                                         tau, tau, ExponentPair(1.0, 1.0), +1);
    double lam0 = e.lambda1;

    // Identity at lambda = lambda0.
    ScaledPair id = scaling_map(e.u, *e.v, lam0, lam0, 1.0);
    CHECK(sup_norm(id.v - *e.v) == 0.0);
    CHECK(id.mu == Catch::Approx(lam0));

    // Pushed pair solves both equations at (lambda, mu(lambda)).
    DiscreteOperator lap(g, OperatorSpec::laplacian());
    for (double lam : {0.5 * lam0, 2.0 * lam0}) {
        ScaledPair sp = scaling_map(e.u, *e.v, lam0, lam, 1.0);
        CHECK(sp.mu == Catch::Approx(lam0 * lam0 / lam).epsilon(1e-14));
        double worst = 0.0;
        g.for_interior([&](NodeIndex nd) {
            worst = std::max(worst, std::abs(lap.residual_at(sp.u, nd) +
                                             lam * tau.at(nd) * sp.v.at(nd)));
            worst = std::max(worst, std::abs(lap.residual_at(sp.v, nd) +
                                             sp.mu * tau.at(nd) * sp.u.at(nd)));
        });
        CHECK(worst <= 1e-6);
    }
    CHECK_THROWS_AS(scaling_map(e.u, *e.v, lam0, -1.0, 1.0), std::invalid_argument);
}

TEST_CASE("region classification") {
    CurveSet cs;
    cs.plus = SpectralCurve(10.0, 1.0, CurveLabel::Plus);
    cs.minus = SpectralCurve(12.0, 1.0, CurveLabel::Minus);
    cs.second = SpectralCurve(40.0, 1.0, CurveLabel::Second);

    RegionVerdict below = classify(5.0, 10.0, cs);  // recovered anchor sqrt(50) ~ 7.07
    CHECK(below.in_c1_plus);
    CHECK(below.in_c1_minus);
    CHECK_FALSE(below.on_lambda1_plus);
    CHECK_FALSE(below.between_m1_and_lambda2);

    RegionVerdict onp = classify(10.0, 10.0, cs);
    CHECK(onp.on_lambda1_plus);
    CHECK_FALSE(onp.in_c1_plus);
    CHECK(onp.in_c1_minus);

    RegionVerdict mid = classify(20.0, 20.0, cs);  // anchor 20 in (12, 40)
    CHECK(mid.between_m1_and_lambda2);
    CHECK_FALSE(mid.in_c1_minus);

    RegionVerdict neg = classify(-3.0, 5.0, cs);
    CHECK(neg.outside_first_quadrant);
    CHECK_FALSE(neg.in_c1_plus);

    CurveSet bad = cs;
    bad.minus = SpectralCurve(12.0, 2.0, CurveLabel::Minus);
    CHECK_THROWS_AS(classify(1.0, 1.0, bad), std::invalid_argument);
}

TEST_CASE("curve samples are monotone and curves never cross") {
    SpectralCurve lo(9.0, 2.0, CurveLabel::Plus), hi(11.0, 2.0, CurveLabel::Minus);
    auto s = sample_curve(lo, 0.5, 50.0, 40);
    REQUIRE(s.size() == 40);
    CHECK(s.front().lambda == Catch::Approx(0.5));
    CHECK(s.back().lambda == Catch::Approx(50.0));
    for (std::size_t k = 1; k < s.size(); ++k) {
        CHECK(s[k].lambda > s[k - 1].lambda);
        CHECK(s[k].mu < s[k - 1].mu);
    }
    for (const auto& pt : s) CHECK(pt.mu < curve_mu(hi, pt.lambda));
    CHECK_THROWS_AS(sample_curve(lo, 2.0, 1.0, 10), std::invalid_argument);
}

TEST_CASE("asymmetric branches order as predicted") {
    // F1 = max(L, kappa L), F2 = min(L, kappa L), pq = 1: against the
    // symmetric baseline sigma, the branch ratios are exact powers of kappa
    // and the plus branch sits below the minus branch.
    Grid g = make_uniform_grid({{0.0, 1.0}}, {99});
    Field tau(g, 1.0);
    ExponentPair exps(2.0, 0.5);
    double kappa = 4.0;
    OperatorSpec f1 = OperatorSpec::max_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(kappa)});
    OperatorSpec f2 = OperatorSpec::min_of(
        {LinearOpSpec::laplacian(), LinearOpSpec::scaled_laplacian(kappa)});

    double sigma = system_principal_eigen(OperatorSpec::laplacian(), OperatorSpec::laplacian(),
                                          tau, tau, exps, +1).lambda1;
    double lp = system_principal_eigen(f1, f2, tau, tau, exps, +1).lambda1;
    double lm = system_principal_eigen(f1, f2, tau, tau, exps, -1).lambda1;

    double q = exps.q;
    CHECK(lp / sigma == Catch::Approx(std::pow(kappa, q / (q + 1))).epsilon(1e-9));
    CHECK(lm / sigma == Catch::Approx(std::pow(kappa, 1.0 / (q + 1))).epsilon(1e-9));
    CHECK(lp < lm);
}
