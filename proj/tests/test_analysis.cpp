#include <doctest.h>

#include <cmath>
#include <memory>

#include "dualopt/analysis.hpp"

using namespace dualopt;

namespace {

MarketModel capped_market() { return MarketModel(0.0, 0.04, 0.2, 1.0); }

MarketModel merton_market() { return MarketModel(0.05, 0.09, 0.2, 1.0); }  // theta = 0.2

// Constant terminal data solves the dual equation exactly.
class ConstantDual : public DualFunction {
  public:
    explicit ConstantDual(double c) : c_(c) {}
    double operator()(double) const override { return c_; }
    double derivative(double) const override { return 0.0; }
    double value_at_zero() const override { return c_; }
    double slope_at_zero() const override { return 0.0; }
    double limit_at_infinity() const override { return c_; }
    double growth_exponent() const override { return 0.0; }

  private:
    double c_;
};

}  // namespace

TEST_CASE("dual residual of the capped closed form") {
    DualValueSurface s = DualValueSurface::piecewise_closed_form(
        capped_market(), PiecewiseLinearUtility::capped(1.0));
    GridSpec grid{0.1, 0.9, 20, 0.1, 10.0, 40, true};
    ResidualReport rep = dual_residual(s, grid);
    CHECK(rep.max_abs <= 1e-4);

    // second-order differences: halving the step cuts the residual ~4x
    FdOptions coarse{1e-3, false};
    FdOptions fine{5e-4, false};
    double r1 = dual_residual(s, grid, coarse).max_abs;
    double r2 = dual_residual(s, grid, fine).max_abs;
    CHECK(r1 / r2 >= 3.0);

    GridSpec touching{0.1, 1.0, 20, 0.1, 10.0, 40, true};
    CHECK_THROWS_AS(dual_residual(s, touching), std::domain_error);
}

TEST_CASE("quadrature backend residual is comparable to closed form") {
    GridSpec grid{0.1, 0.9, 10, 0.1, 10.0, 20, true};
    DualValueSurface closed = DualValueSurface::piecewise_closed_form(
        capped_market(), PiecewiseLinearUtility::capped(1.0));
    DualValueSurface quad = DualValueSurface::piecewise_quadrature(
        capped_market(), PiecewiseLinearUtility::capped(1.0), Regime::Discounted);
    double rc = dual_residual(closed, grid).max_abs;
    double rq = dual_residual(quad, grid).max_abs;
    CHECK(rq <= 10.0 * std::max(rc, 1e-10));
}

TEST_CASE("with-rate dual residual via quadrature backends") {
    MarketModel m = merton_market();
    GridSpec grid{0.1, 0.9, 10, 0.2, 5.0, 20, true};
    // piecewise terminal data through exact segment moments
    DualValueSurface pw = DualValueSurface::piecewise_quadrature(
        m, PiecewiseLinearUtility::capped(1.0), Regime::WithRate);
    CHECK(dual_residual(pw, grid).max_abs <= 1e-4);
    // kink-split composite rule for the capped-power dual
    auto cp = std::make_shared<CappedPowerDual>(1.0, 0.5);
    DualValueSurface cps = DualValueSurface::quadrature(m, cp, Regime::WithRate, 128);
    CHECK(dual_residual(cps, grid).max_abs <= 1e-4);
}

TEST_CASE("constant dual data has zero residual") {
    auto dual = std::make_shared<ConstantDual>(0.7);
    DualValueSurface s =
        DualValueSurface::quadrature(capped_market(), dual, Regime::Discounted, 64);
    GridSpec grid{0.1, 0.9, 8, 0.2, 5.0, 10, true};
    CHECK(dual_residual(s, grid).max_abs <= 1e-12);
}

TEST_CASE("primal residual: capped discounted and Merton with-rate") {
    PiecewiseLinearUtility u = PiecewiseLinearUtility::capped(1.0);
    auto sc = std::make_shared<DualValueSurface>(
        DualValueSurface::piecewise_closed_form(capped_market(), u));
    PrimalValueSurface pc(sc, [u](double x) { return u(x); });
    GridSpec cap_grid{0.1, 0.9, 20, 0.05, 0.95, 40, false};
    CHECK(primal_residual(pc, cap_grid).max_abs <= 1e-4);

    auto dual = std::make_shared<PowerDual>(PowerDual::of_power_utility(2.0, 0.5));
    auto sm = std::make_shared<DualValueSurface>(
        DualValueSurface::quadrature(merton_market(), dual, Regime::WithRate, 128));
    PrimalValueSurface pm(sm, [](double x) { return 2.0 * std::sqrt(x); });
    GridSpec merton_grid{0.1, 0.9, 20, 0.2, 3.0, 40, true};
    CHECK(primal_residual(pm, merton_grid).max_abs <= 1e-4);

    // rows whose stencil would touch t = T are flagged, not evaluated
    GridSpec edge{0.1, 0.99999, 5, 0.2, 0.8, 5, false};
    ResidualReport rep = primal_residual(pc, edge, FdOptions{1e-4, true});
    CHECK(!rep.near_terminal_rows.empty());
}

TEST_CASE("TurnpikeSpec derived quantities") {
    TurnpikeSpec spec(PowerTailUtility::linear_then_power(0.5, 1.0), merton_market(),
                      {1.0, 5.0}, 1.0);
    CHECK(spec.q() == doctest::Approx(-1.0));
    // theta^2 q(q-1)/2 - r q = 0.04 + 0.05
    CHECK(spec.lambda_exponent() == doctest::Approx(0.09).epsilon(1e-14));
    CHECK(spec.merton_target() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("pure power utility is on the turnpike at every tau") {
    TurnpikeSpec spec(PowerTailUtility::pure_power(0.5, 2.0), merton_market(),
                      {1.0, 5.0, 10.0}, 1.0);
    auto points = turnpike_sweep(spec);
    for (const auto& p : points) {
        CHECK(p.gap <= 1e-4);
    }
}

TEST_CASE("merton invariance: A/x constant in tau and x") {
    for (double x : {0.5, 2.0}) {
        TurnpikeSpec spec(PowerTailUtility::pure_power(0.5, 2.0), merton_market(),
                          {1.0, 20.0}, x);
        auto pts = turnpike_sweep(spec);
        for (const auto& p : pts) {
            CHECK(p.amount / x == doctest::Approx(2.0).epsilon(1e-4));
        }
    }
}

TEST_CASE("capped power tail approaches the turnpike") {
    TurnpikeSpec spec(PowerTailUtility::linear_then_power(0.5, 1.0), merton_market(),
                      {1.0, 2.0, 5.0, 10.0, 20.0, 40.0}, 1.0);
    auto pts = turnpike_sweep(spec);
    REQUIRE(pts.size() == 6);
    // gap decreasing over the last half of the grid, small at the far end
    CHECK(pts[5].gap < pts[4].gap);
    CHECK(pts[4].gap < pts[3].gap);
    CHECK(pts[3].gap < pts[2].gap);
    CHECK(pts[5].gap <= 0.05);
}

TEST_CASE("affine utility changes leave the risky amount unchanged") {
    PowerTailUtility base = PowerTailUtility::linear_then_power(0.5, 1.0);
    PowerTailUtility shifted = base.scaled(2.0, 1.0);
    TurnpikeSpec s1(base, merton_market(), {5.0}, 1.0);
    TurnpikeSpec s2(shifted, merton_market(), {5.0}, 1.0);
    double a1 = turnpike_sweep(s1)[0].amount;
    double a2 = turnpike_sweep(s2)[0].amount;
    CHECK(a1 == doctest::Approx(a2).epsilon(1e-8));
}

TEST_CASE("corollary rate: power terminal data grows like e^(lambda tau)") {
    // v(tau, y) = e^{lambda tau} y^q exactly for terminal data y^q
    auto dual = std::make_shared<PowerDual>(1.0, -1.0);
    DualValueSurface s =
        DualValueSurface::quadrature(merton_market(), dual, Regime::WithRate, 128);
    double lambda = 0.09;
    for (double tau : {0.5, 1.0, 5.0, 20.0, 40.0}) {
        CorollaryReport rep = corollary_limits(s, -1.0, lambda, tau);
        CHECK(rep.max_dev <= 1e-6);
        for (const auto& row : rep.rows) {
            CHECK(row.ratio_v == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(row.ratio_vy == doctest::Approx(1.0).epsilon(1e-6));
            CHECK(row.ratio_vyy == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("corollary ratios approach 1 from the tail for the capped power tail") {
    TurnpikeSpec spec(PowerTailUtility::linear_then_power(0.5, 1.0), merton_market(), {10.0},
                      1.0);
    CorollaryReport rep = corollary_limits(spec, 10.0);
    REQUIRE(rep.rows.size() == 3);  // y = 1e-3, 1e-4, 1e-5
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
        CHECK(std::abs(rep.rows[i].ratio_v - 1.0) <=
              std::abs(rep.rows[i - 1].ratio_v - 1.0) + 1e-9);
    }
    CHECK(std::abs(rep.rows.back().ratio_v - 1.0) <= 1e-2);
}

TEST_CASE("large-y limits vanish for normalized tails") {
    TurnpikeSpec spec(PowerTailUtility::linear_then_power(0.5, 1.0), merton_market(), {1.0},
                      1.0);
    LargeYReport rep = large_y_limits(spec, 1.0);
    CHECK(rep.max_abs <= 1e-3);
    for (const auto& row : rep.rows) {
        CHECK(row.y_vy <= 1e-12);  // v_y <= 0 throughout
    }

    auto zero = std::make_shared<ConstantDual>(0.0);
    DualValueSurface s0 =
        DualValueSurface::quadrature(capped_market(), zero, Regime::Discounted, 64);
    LargeYReport rep0 = large_y_limits(s0, 0.5);
    CHECK(rep0.max_abs == doctest::Approx(0.0));
}

TEST_CASE("residual report serialization") {
    DualValueSurface s = DualValueSurface::piecewise_closed_form(
        capped_market(), PiecewiseLinearUtility::capped(1.0));
    GridSpec grid{0.1, 0.9, 4, 0.2, 5.0, 4, true};
    std::string json = residual_json(dual_residual(s, grid));
    CHECK(json.find("max_abs_residual") != std::string::npos);
    CHECK(json.find("near_terminal_rows") != std::string::npos);
}
