#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "dualopt/market.hpp"
#include "dualopt/utility.hpp"

namespace dualopt {

struct RiskSpec {
    double beta;       // confidence level in (0, 1)
    double benchmark;  // certain wealth c the loss is measured against

    RiskSpec(double beta_, double benchmark_) : beta(beta_), benchmark(benchmark_) {
        if (!(beta > 0.0 && beta < 1.0))
            throw std::invalid_argument("RiskSpec: beta must lie in (0, 1)");
    }
    double delta() const { return 1.0 / (1.0 - beta); }
};

struct DiscreteLossDistribution {
    // (loss value, probability); probabilities >= 0 and sum to 1 within 1e-12.
    std::vector<std::pair<double, double>> atoms;

    void validate() const;
};

struct CvarResult {
    double var;   // left endpoint of the argmin set of y + delta E(Z-y)^+
    double cvar;  // the minimum value
};

// Rockafellar-Uryasev representation on a discrete loss distribution.
CvarResult cvar_ru(const DiscreteLossDistribution& d, double beta);

// Closed-form CVaR of the capped problem's Bernoulli terminal wealth:
// x if beta >= P{X_T = H}, else x - H (1 - delta P{X_T = 0}).
double cvar_cap_closed(double x, double H, std::pair<double, double> probs, double beta);

// Inner utility U^y = U - lambda delta (c - U - y)^+ for U = x ^ H, encoded
// as a canonical piecewise-linear core plus an additive constant.
struct InnerUtility {
    PiecewiseLinearUtility core;
    double offset;

    double operator()(double x) const { return core(x) + offset; }
};
InnerUtility inner_utility(double y, double lambda, const RiskSpec& risk, double H);

// Optimal value u^y(x) of the inner problem via the closed-form dual pipeline.
double inner_value(double y, double lambda, const RiskSpec& risk, const MarketModel& market,
                   double t, double x, double H);

struct WealthAtom {
    double wealth;
    double prob;
};

// Terminal-wealth law of the optimal strategy for a piecewise-linear utility:
// the optimum sits on the breakpoints, P{X_T = x_i} = P{c_{i+1} <= Y_T < c_i}
// with ln Y_T ~ Normal(ln y0 - alpha^2/2, alpha^2).
std::vector<WealthAtom> terminal_distribution(const PiecewiseLinearUtility& plu,
                                              const MarketModel& market, double t, double y0);

DiscreteLossDistribution to_losses(const std::vector<WealthAtom>& atoms, double benchmark,
                                   const PiecewiseLinearUtility& score);

struct FrontierPoint {
    double lambda;
    double y_star;            // inner maximizer of u^y(x) - lambda y
    double var;
    double cvar;
    double expected_utility;  // E[U(X_T)] under the point's optimal strategy
    double objective;         // expected_utility - lambda * cvar
    bool flat_objective;      // golden section saw a flat objective (lambda = 0)
};

// One frontier point: golden-section maximization of u^y(x) - lambda y over
// y in [c-H, c], then risk/reward of the inner-optimal strategy.
FrontierPoint outer_maximize(double lambda, const RiskSpec& risk, const MarketModel& market,
                             double t, double x, double H);

std::vector<FrontierPoint> frontier_sweep(const std::vector<double>& lambda_grid,
                                          const RiskSpec& risk, const MarketModel& market,
                                          double t, double x, double H);

// CSV: header lambda,var,cvar,expected_utility,objective; rows at 9
// significant digits; provenance emitted first as a '#' comment line.
void write_frontier_csv(std::ostream& os, const std::vector<FrontierPoint>& points,
                        const std::string& provenance);

}  // namespace dualopt
