#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dualopt/closedform.hpp"
#include "dualopt/dualvalue.hpp"
#include "dualopt/riskfrontier.hpp"

using namespace dualopt;

namespace {

MarketModel capped_market() { return MarketModel(0.0, 0.04, 0.2, 1.0); }  // theta = 0.2

// Brute-force minimizer of y + delta E(Z-y)^+ over a fine grid spanning the
// atoms; the independent oracle for cvar_ru.
double cvar_grid_oracle(const DiscreteLossDistribution& d, double beta) {
    double lo = d.atoms.front().first, hi = lo;
    for (const auto& [z, p] : d.atoms) {
        (void)p;
        lo = std::min(lo, z);
        hi = std::max(hi, z);
    }
    double delta = 1.0 / (1.0 - beta);
    double best = std::numeric_limits<double>::infinity();
    const int n = 2000000;
    for (int i = 0; i <= n; ++i) {
        double y = lo + (hi - lo) * i / n;
        double tail = 0.0;
        for (const auto& [z, p] : d.atoms) tail += p * std::max(z - y, 0.0);
        best = std::min(best, y + delta * tail);
    }
    return best;
}

DiscreteLossDistribution bernoulli_example() {
    // losses of the capped optimum at x = 0.5, H = 1, theta sqrt(T) = 0.2
    auto [p_hit, p_zero] = capped_terminal_probs(1.0, 0.2, 0.5);
    return DiscreteLossDistribution{{{-0.5, p_hit}, {0.5, p_zero}}};
}

}  // namespace

TEST_CASE("cvar_ru on the Bernoulli example") {
    DiscreteLossDistribution d = bernoulli_example();
    CvarResult r = cvar_ru(d, 0.5);
    CHECK(r.cvar == doctest::Approx(0.341480581122).epsilon(1e-10));
    CHECK(r.cvar == doctest::Approx(cvar_grid_oracle(d, 0.5)).epsilon(1e-6));
    // left endpoint of the argmin set = the beta-quantile of the losses
    CHECK(r.var == doctest::Approx(-0.5));

    CvarResult r9 = cvar_ru(d, 0.9);
    CHECK(r9.cvar == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r9.var == doctest::Approx(0.5));
}

TEST_CASE("cvar_ru degenerate and edge cases") {
    DiscreteLossDistribution single{{{0.7, 1.0}}};
    for (double beta : {0.1, 0.5, 0.99}) {
        CvarResult r = cvar_ru(single, beta);
        CHECK(r.var == doctest::Approx(0.7));
        CHECK(r.cvar == doctest::Approx(0.7));
    }
    DiscreteLossDistribution empty;
    CHECK_THROWS_AS(cvar_ru(empty, 0.5), std::domain_error);
    DiscreteLossDistribution bad{{{0.0, 0.6}, {1.0, 0.6}}};
    CHECK_THROWS_AS(cvar_ru(bad, 0.5), std::invalid_argument);

    DiscreteLossDistribution d = bernoulli_example();
    // beta -> 0+: the objective tends to E[Z]
    double ez = -0.5 * d.atoms[0].second + 0.5 * d.atoms[1].second;
    CHECK(cvar_ru(d, 1e-9).cvar == doctest::Approx(ez).epsilon(1e-6));
    // beta above the largest cumulative tail: the max loss
    CHECK(cvar_ru(d, 1.0 - 1e-12).cvar == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("cvar_ru equals the grid oracle on random discrete distributions") {
    std::mt19937 gen(23);
    std::uniform_real_distribution<double> uz(-2.0, 3.0), up(0.05, 1.0);
    std::uniform_int_distribution<int> un(2, 10);
    for (int rep = 0; rep < 20; ++rep) {
        int n = un(gen);
        std::vector<std::pair<double, double>> atoms(n);
        double total = 0.0;
        for (auto& [z, p] : atoms) {
            z = uz(gen);
            p = up(gen);
            total += p;
        }
        for (auto& [z, p] : atoms) p /= total;
        double fix = 1.0;
        for (int i = 0; i + 1 < n; ++i) fix -= atoms[i].second;
        atoms.back().second = fix;
        DiscreteLossDistribution d{atoms};
        for (double beta : {0.3, 0.8, 0.95}) {
            CHECK(cvar_ru(d, beta).cvar ==
                  doctest::Approx(cvar_grid_oracle(d, beta)).epsilon(5e-6));
        }
    }
}

TEST_CASE("closed-form capped CVaR") {
    auto probs = capped_terminal_probs(1.0, 0.2, 0.5);
    CHECK(cvar_cap_closed(0.5, 1.0, probs, 0.9) == doctest::Approx(0.5));
    CHECK(cvar_cap_closed(0.5, 1.0, probs, 0.5) ==
          doctest::Approx(0.341480581122).epsilon(1e-10));
    for (double beta : {0.5, 0.9, 0.95, 0.99}) {
        DiscreteLossDistribution d = bernoulli_example();
        CHECK(cvar_cap_closed(0.5, 1.0, probs, beta) ==
              doctest::Approx(cvar_ru(d, beta).cvar).epsilon(1e-10));
    }
    // H -> inf: ruin is certain and the CVaR approaches the benchmark x
    double x = 0.5;
    for (double H : {1e4, 1e8}) {
        auto pr = capped_terminal_probs(H, 0.2, x);
        CHECK(cvar_cap_closed(x, H, pr, 0.95) == doctest::Approx(x).epsilon(1e-6));
    }
}

TEST_CASE("inner utility case encodings") {
    RiskSpec risk(0.95, 0.5);
    const double H = 1.0, lambda = 0.4;
    const double k = lambda * risk.delta();

    // y = c: the penalized piece collapses to the base utility
    InnerUtility at_c = inner_utility(risk.benchmark, lambda, risk, H);
    for (double x : {0.0, 0.3, 0.9, 2.0}) {
        CHECK(at_c(x) == doctest::Approx(std::min(x, H)));
    }
    // y = c - H: case-1 and case-2 encodings agree pointwise
    InnerUtility low = inner_utility(risk.benchmark - H - 1e-12, lambda, risk, H);
    InnerUtility mid = inner_utility(risk.benchmark - H, lambda, risk, H);
    for (double x : {0.0, 0.2, 0.5, 0.99, 1.5}) {
        CHECK(low(x) == doctest::Approx(mid(x)).epsilon(1e-9));
    }
    // lambda = 0: base utility for every y
    for (double y : {-0.7, 0.1, 0.45}) {
        InnerUtility u0 = inner_utility(y, 0.0, risk, H);
        for (double x : {0.1, 0.7, 1.4}) CHECK(u0(x) == doctest::Approx(std::min(x, H)));
    }
    // generic case 2 matches the definition U - lambda delta (c - U - y)^+
    double y = 0.2;
    InnerUtility uy = inner_utility(y, lambda, risk, H);
    for (double x : {0.05, 0.25, 0.31, 0.7, 1.2}) {
        double base = std::min(x, H);
        double expected = base - k * std::max(risk.benchmark - base - y, 0.0);
        CHECK(uy(x) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK_THROWS_AS(inner_utility(0.2, lambda, risk, 0.0), std::domain_error);
}

TEST_CASE("inner value closed forms in cases 1 and 3") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    const double H = 1.0, lambda = 0.4, x = 0.5, t = 0.0;
    const double k = lambda * risk.delta();
    double base_value = capped_value(H, m.alpha(t), x);

    // case 1 (y <= c - H): (1 + lambda delta) u_cap - lambda delta (c - y)
    for (double y : {risk.benchmark - H, risk.benchmark - H - 0.4}) {
        double expected = (1.0 + k) * base_value - k * (risk.benchmark - y);
        CHECK(inner_value(y, lambda, risk, m, t, x, H) ==
              doctest::Approx(expected).epsilon(1e-9));
    }
    // case 3 (y >= c): u_cap itself
    for (double y : {risk.benchmark, risk.benchmark + 0.3}) {
        CHECK(inner_value(y, lambda, risk, m, t, x, H) ==
              doctest::Approx(base_value).epsilon(1e-9));
    }
}

TEST_CASE("inner value is concave in y") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    const double H = 1.0, lambda = 0.6, x = 0.5, t = 0.0;
    double lo = risk.benchmark - H, hi = risk.benchmark;
    std::vector<double> vals;
    const int n = 40;
    for (int i = 0; i <= n; ++i) {
        double y = lo + (hi - lo) * i / n;
        vals.push_back(inner_value(y, lambda, risk, m, t, x, H));
    }
    for (int i = 1; i + 1 <= n; ++i) {
        double second = vals[i + 1] - 2.0 * vals[i] + vals[i - 1];
        CHECK(second <= 1e-9);
    }
}

TEST_CASE("inner bracket signs") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    const double H = 1.0, lambda = 0.5, x = 0.5;
    for (int i = 0; i <= 10; ++i) {
        double y = risk.benchmark - H + H * i / 10.0;
        InnerUtility uy = inner_utility(y, lambda, risk, H);
        DualValueSurface s = DualValueSurface::piecewise_closed_form(m, uy.core);
        CHECK(s.dy(0.0, 1e-10) + x < 0.0);
        CHECK(s.dy(0.0, 1e10) + x > 0.0);
    }
}

TEST_CASE("terminal distribution of the capped optimum") {
    MarketModel m = capped_market();
    PiecewiseLinearUtility u = PiecewiseLinearUtility::capped(1.0);
    double y0 = capped_dual_point(1.0, m.alpha(0.0), 0.5);
    auto atoms = terminal_distribution(u, m, 0.0, y0);
    REQUIRE(atoms.size() == 2);
    auto [p_hit, p_zero] = capped_terminal_probs(1.0, 0.2, 0.5);
    CHECK(atoms[0].wealth == doctest::Approx(0.0));
    CHECK(atoms[0].prob == doctest::Approx(p_zero).epsilon(1e-10));
    CHECK(atoms[1].wealth == doctest::Approx(1.0));
    CHECK(atoms[1].prob == doctest::Approx(p_hit).epsilon(1e-10));
    CHECK(atoms[0].prob + atoms[1].prob == doctest::Approx(1.0).epsilon(1e-14));

    // E[U(X_T)] from the atoms equals the primal value
    double eu = 0.0;
    for (const auto& a : atoms) eu += a.prob * u(a.wealth);
    CHECK(eu == doctest::Approx(capped_value(1.0, 0.2, 0.5)).epsilon(1e-10));
}

TEST_CASE("outer maximizer at lambda = 0 reduces to the pure wealth problem") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    FrontierPoint pt = outer_maximize(0.0, risk, m, 0.0, 0.5, 1.0);
    CHECK(pt.flat_objective);
    auto probs = capped_terminal_probs(1.0, 0.2, 0.5);
    CHECK(pt.cvar == doctest::Approx(cvar_cap_closed(0.5, 1.0, probs, 0.95)).epsilon(1e-10));
    CHECK(pt.expected_utility == doctest::Approx(capped_value(1.0, 0.2, 0.5)).epsilon(1e-9));
    CHECK(pt.objective == doctest::Approx(pt.expected_utility).epsilon(1e-12));
}

TEST_CASE("outer maximizer beats the endpoints") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    const double lambda = 0.5, x = 0.5, H = 1.0;
    FrontierPoint pt = outer_maximize(lambda, risk, m, 0.0, x, H);
    auto objective = [&](double y) {
        return inner_value(y, lambda, risk, m, 0.0, x, H) - lambda * y;
    };
    double at_star = objective(pt.y_star);
    CHECK(at_star >= objective(risk.benchmark - H) - 1e-6);
    CHECK(at_star >= objective(risk.benchmark) - 1e-6);
    // the scalarized pipeline objective matches the atom-based record
    CHECK(pt.objective == doctest::Approx(at_star).epsilon(1e-6));
    CHECK(pt.objective ==
          doctest::Approx(pt.expected_utility - lambda * pt.cvar).epsilon(1e-12));
}

TEST_CASE("large lambda drives the strategy toward the benchmark") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    FrontierPoint pt = outer_maximize(1000.0, risk, m, 0.0, 0.5, 1.0);
    CHECK(pt.cvar <= 0.05);                    // nearly no loss vs the benchmark
    CHECK(pt.expected_utility >= 0.5 - 0.05);  // close to U(x)
    CHECK(pt.expected_utility <= capped_value(1.0, 0.2, 0.5));
}

TEST_CASE("frontier sweep monotonicity") {
    MarketModel m = capped_market();
    RiskSpec risk(0.95, 0.5);
    std::vector<double> lambdas{0.0, 0.25, 0.5, 1.0, 2.0};
    auto pts = frontier_sweep(lambdas, risk, m, 0.0, 0.5, 1.0);
    REQUIRE(pts.size() == 5);
    for (std::size_t i = 1; i < pts.size(); ++i) {
        CHECK(pts[i].cvar <= pts[i - 1].cvar + 1e-9);
        CHECK(pts[i].expected_utility <= pts[i - 1].expected_utility + 1e-9);
    }
    for (const auto& p : pts) {
        CHECK(p.objective ==
              doctest::Approx(p.expected_utility - p.lambda * p.cvar).epsilon(1e-9));
        CHECK(p.cvar >= p.var - 1e-12);
    }
    CHECK_THROWS_AS(frontier_sweep({1.0, 0.5}, risk, m, 0.0, 0.5, 1.0), std::invalid_argument);
}
