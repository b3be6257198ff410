#include <doctest.h>

#include <cmath>
#include <memory>

#include "dualopt/closedform.hpp"
#include "dualopt/normal.hpp"
#include "dualopt/primal.hpp"

using namespace dualopt;

TEST_CASE("capped value examples") {
    CHECK(capped_value(1.0, 0.2, 0.5) == doctest::Approx(0.579259709439).epsilon(1e-10));
    CHECK(capped_value(1.0, 0.0, 0.5) == doctest::Approx(0.5));            // identity at maturity
    CHECK(capped_value(1.0, 0.2, 1.0 - 1e-12) == doctest::Approx(1.0));    // x -> H
    CHECK_THROWS_AS(capped_value(1.0, 0.2, 0.0), std::domain_error);
    CHECK_THROWS_AS(capped_value(1.0, 0.2, 1.5), std::domain_error);
}

TEST_CASE("capped control and dual point examples") {
    CHECK(capped_control(1.0, 0.2, 0.5, 1.0) == doctest::Approx(3.98942280401).epsilon(1e-10));
    CHECK(capped_dual_point(1.0, 0.2, 0.5) == doctest::Approx(std::exp(-0.02)).epsilon(1e-12));
    CHECK_THROWS_AS(capped_control(1.0, 0.0, 0.5, 1.0), std::domain_error);
    // phi vanishes faster than 1/x blows up as x -> H
    CHECK(capped_control(1.0, 0.2, 1.0 - 1e-9, 1.0) < 1e-6);
}

TEST_CASE("terminal probabilities") {
    auto [p_hit, p_zero] = capped_terminal_probs(1.0, 0.2, 0.5);
    CHECK(p_hit == doctest::Approx(0.579259709439).epsilon(1e-10));
    CHECK(p_zero == doctest::Approx(0.420740290561).epsilon(1e-10));
    CHECK(p_hit + p_zero == doctest::Approx(1.0).epsilon(1e-14));
    // E[X_T] = H P{X_T = H} equals the optimal value
    CHECK(1.0 * p_hit == doctest::Approx(capped_value(1.0, 0.2, 0.5)).epsilon(1e-12));
}

TEST_CASE("H sensitivity") {
    const double x = 0.5, a = 0.2;
    // positive derivative across a wide H grid
    for (double H = 0.51; H <= 50.0; H *= 1.6) {
        HSensitivity s = capped_h_sensitivity(H, x, a);
        CHECK(s.g_prime > 0.0);
        double h = 1e-6 * H;
        double fd = (capped_h_sensitivity(H + h, x, a).g - capped_h_sensitivity(H - h, x, a).g) /
                    (2.0 * h);
        CHECK(s.g_prime == doctest::Approx(fd).epsilon(1e-6));
    }
    // g'(x+) -> 1 and g'(inf) -> 0.  The H -> x+ limit closes like
    // exp(-theta sqrt(T) Phi^{-1}(x/H)), so probe it with a larger variance
    // budget where the decay is visible in double precision.
    CHECK(capped_h_sensitivity(x * (1.0 + 1e-12), x, 3.0).g_prime ==
          doctest::Approx(1.0).epsilon(1e-6));
    CHECK(capped_h_sensitivity(1e9 * x, x, a).g_prime == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("closed forms agree with the generic pipeline") {
    MarketModel m(0.0, 0.04, 0.2, 1.0);
    CappedSolution sol(1.0, m);
    PiecewiseLinearUtility u = PiecewiseLinearUtility::capped(1.0);
    auto s = std::make_shared<DualValueSurface>(DualValueSurface::piecewise_closed_form(m, u));
    PrimalValueSurface primal(s, [u](double x) { return u(x); });

    for (double t : {0.0, 0.25, 0.5, 0.75}) {
        for (int i = 1; i <= 19; ++i) {
            double x = 0.05 * i;
            CHECK(std::abs(primal.value(t, x) - sol.value(t, x)) <= 1e-6);
            CHECK(primal.feedback_control(t, x) ==
                  doctest::Approx(sol.control(t, x)).epsilon(1e-6));
            CHECK(primal.y_of_x(t, x) == doctest::Approx(sol.dual_point(t, x)).epsilon(1e-9));
        }
    }
}
