#include "dualopt/riskfrontier.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "dualopt/dualvalue.hpp"
#include "dualopt/normal.hpp"
#include "dualopt/primal.hpp"

namespace dualopt {

void DiscreteLossDistribution::validate() const {
    if (atoms.empty()) throw std::domain_error("DiscreteLossDistribution: empty");
    // Neumaier summation: a plain sum of 1e5 equal atoms already drifts past
    // the 1e-12 gate.
    double total = 0.0, comp = 0.0;
    for (const auto& [z, p] : atoms) {
        (void)z;
        if (p < 0.0) throw std::invalid_argument("DiscreteLossDistribution: negative probability");
        double t = total + p;
        comp += std::abs(total) >= std::abs(p) ? (total - t) + p : (p - t) + total;
        total = t;
    }
    if (std::abs(total + comp - 1.0) > 1e-12)
        throw std::invalid_argument("DiscreteLossDistribution: probabilities must sum to 1");
}

CvarResult cvar_ru(const DiscreteLossDistribution& d, double beta) {
    d.validate();
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("cvar_ru: beta must lie in (0, 1)");
    const double delta = 1.0 / (1.0 - beta);

    std::vector<std::pair<double, double>> sorted = d.atoms;
    std::sort(sorted.begin(), sorted.end());

    // The objective y + delta E(Z-y)^+ is piecewise linear with breakpoints at
    // the atoms; its argmin's left endpoint is the smallest atom whose
    // cumulative probability reaches beta.
    double cum = 0.0;
    double var = sorted.back().first;
    for (const auto& [z, p] : sorted) {
        cum += p;
        if (cum >= beta - 1e-15) {
            var = z;
            break;
        }
    }
    double tail = 0.0;
    for (const auto& [z, p] : sorted)
        if (z > var) tail += p * (z - var);
    return {var, var + delta * tail};
}

double cvar_cap_closed(double x, double H, std::pair<double, double> probs, double beta) {
    const double p_hit = probs.first, p_zero = probs.second;
    if (beta >= p_hit) return x;
    double delta = 1.0 / (1.0 - beta);
    return x - H * (1.0 - delta * p_zero);
}

InnerUtility inner_utility(double y, double lambda, const RiskSpec& risk, double H) {
    if (!(H > 0.0)) throw std::domain_error("inner_utility: H must be > 0");
    if (lambda < 0.0) throw std::invalid_argument("inner_utility: lambda must be >= 0");
    const double c = risk.benchmark;
    const double k = lambda * risk.delta();
    const double h = c - y;

    if (k == 0.0 || h <= 0.0) {
        // No penalty bites (lambda = 0, or y >= c): the base utility itself.
        return {PiecewiseLinearUtility::capped(H), 0.0};
    }
    if (h >= H) {
        // Penalty active on the whole range: (1+k)(x ^ H) - k (c - y).
        return {PiecewiseLinearUtility({H}, {1.0 + k}, (1.0 + k) * H), -k * h};
    }
    // Three pieces: slope 1+k below h = c-y, slope 1 up to H, flat at H after.
    return {PiecewiseLinearUtility({h, H}, {1.0 + k, 1.0}, H), 0.0};
}

std::vector<WealthAtom> terminal_distribution(const PiecewiseLinearUtility& plu,
                                              const MarketModel& market, double t, double y0) {
    if (!(y0 > 0.0)) throw std::domain_error("terminal_distribution: y0 must be > 0");
    const double alpha = market.alpha(t);
    const auto& xs = plu.breakpoints();
    const auto& cs = plu.slopes();
    const std::size_t n = xs.size();

    // P{c_{i+1} <= Y_T < c_i}; thresholds z_i = (ln c_i - ln y0 + alpha^2/2)/alpha.
    auto z_at = [&](std::size_t i) {
        if (i == 0) return std::numeric_limits<double>::infinity();
        if (i == n + 1) return -std::numeric_limits<double>::infinity();
        return (std::log(cs[i - 1]) - std::log(y0)) / alpha + 0.5 * alpha;
    };

    std::vector<WealthAtom> atoms;
    atoms.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        double prob = norm_cdf_diff(z_at(i + 1), z_at(i));
        double wealth = i == 0 ? 0.0 : xs[i - 1];
        atoms.push_back({wealth, prob});
    }
    return atoms;
}

DiscreteLossDistribution to_losses(const std::vector<WealthAtom>& atoms, double benchmark,
                                   const PiecewiseLinearUtility& score) {
    DiscreteLossDistribution d;
    d.atoms.reserve(atoms.size());
    for (const auto& a : atoms) d.atoms.push_back({benchmark - score(a.wealth), a.prob});
    return d;
}

namespace {

struct InnerSolution {
    double value;    // u^y(x)
    double y_prime;  // dual point of the inner problem
    InnerUtility utility;
};

InnerSolution solve_inner(double y, double lambda, const RiskSpec& risk,
                          const MarketModel& market, double t, double x, double H) {
    InnerUtility uy = inner_utility(y, lambda, risk, H);
    auto surface = std::make_shared<DualValueSurface>(
        DualValueSurface::piecewise_closed_form(market, uy.core));
    PiecewiseLinearUtility core = uy.core;
    PrimalValueSurface primal(surface, [core](double w) { return core(w); });
    double yp = primal.y_of_x(t, x);
    double value = surface->value(t, yp) + x * yp + uy.offset;
    return {value, yp, std::move(uy)};
}

}  // namespace

double inner_value(double y, double lambda, const RiskSpec& risk, const MarketModel& market,
                   double t, double x, double H) {
    return solve_inner(y, lambda, risk, market, t, x, H).value;
}

FrontierPoint outer_maximize(double lambda, const RiskSpec& risk, const MarketModel& market,
                             double t, double x, double H) {
    if (!(x > 0.0 && x < H)) throw std::domain_error("outer_maximize: x must lie in (0, H)");
    const double c = risk.benchmark;

    FrontierPoint pt{};
    pt.lambda = lambda;
    pt.flat_objective = lambda == 0.0;

    double y_star = c - H;
    if (lambda > 0.0) {
        // The maximum of u^y(x) - lambda y over all y lies in [c-H, c]
        // (u^y is concave and continuous in y); golden-section with ties
        // broken toward smaller y.
        auto objective = [&](double y) {
            return inner_value(y, lambda, risk, market, t, x, H) - lambda * y;
        };
        const double gr = 0.6180339887498949;
        double a = c - H, b = c;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = objective(x1), f2 = objective(x2);
        const double tol = 1e-8 * H;
        while (b - a > tol) {
            if (f1 >= f2) {  // ties move left
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = objective(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = objective(x2);
            }
        }
        y_star = a;
    }
    pt.y_star = y_star;

    InnerSolution inner = solve_inner(y_star, lambda, risk, market, t, x, H);
    std::vector<WealthAtom> atoms = terminal_distribution(inner.utility.core, market, t,
                                                          inner.y_prime);
    PiecewiseLinearUtility base = PiecewiseLinearUtility::capped(H);
    double eu = 0.0;
    for (const auto& a : atoms) eu += a.prob * base(a.wealth);
    CvarResult cv = cvar_ru(to_losses(atoms, c, base), risk.beta);

    pt.var = cv.var;
    pt.cvar = cv.cvar;
    pt.expected_utility = eu;
    pt.objective = eu - lambda * cv.cvar;
    return pt;
}

std::vector<FrontierPoint> frontier_sweep(const std::vector<double>& lambda_grid,
                                          const RiskSpec& risk, const MarketModel& market,
                                          double t, double x, double H) {
    if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
        throw std::invalid_argument("frontier_sweep: lambda grid must be ascending");
    std::vector<FrontierPoint> points;
    points.reserve(lambda_grid.size());
    for (double lambda : lambda_grid)
        points.push_back(outer_maximize(lambda, risk, market, t, x, H));
    return points;
}

void write_frontier_csv(std::ostream& os, const std::vector<FrontierPoint>& points,
                        const std::string& provenance) {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "lambda,var,cvar,expected_utility,objective\n";
    char buf[200];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", p.lambda, p.var, p.cvar,
                      p.expected_utility, p.objective);
        os << buf;
    }
}

}  // namespace dualopt
