#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dualopt/market.hpp"
#include "dualopt/primal.hpp"
#include "dualopt/riskfrontier.hpp"

namespace dualopt {

enum class Scheme { ExactCapped, EulerFeedback };

struct SimConfig {
    long paths = 100000;
    long steps = 2000;
    std::uint64_t seed = 42;
    Scheme scheme = Scheme::ExactCapped;
    int threads = 1;
    bool antithetic = false;

    void validate() const {
        if (paths < 1) throw std::invalid_argument("SimConfig: paths must be >= 1");
        if (steps < 1) throw std::invalid_argument("SimConfig: steps must be >= 1");
        if (threads < 1) throw std::invalid_argument("SimConfig: threads must be >= 1");
    }
};

struct PathStats {
    double mean = 0.0;    // estimate of E[U(X_T)]
    double stderr_ = 0.0;
    long paths = 0;
    std::vector<double> terminal_wealth;   // per path
    std::vector<double> terminal_utility;  // per path
    bool stability_warning = false;

    // Atom histogram when few distinct terminal values, else equal-width bins.
    struct HistogramBin {
        double lo, hi, mass;
    };
    std::vector<HistogramBin> histogram(int bins = 50) const;
};

// Exact simulation of the capped problem's terminal wealth:
// X_T = H 1{Z0 sqrt(T) + theta T + W_T > 0}.
PathStats simulate_exact_capped(const MarketModel& m, double H, double x, const SimConfig& cfg);

// Core with the Sharpe ratio passed explicitly (the theta = 0 boundary case
// cannot be expressed as a MarketModel).
PathStats simulate_exact_capped_theta(double theta, double T, double H, double x,
                                      const SimConfig& cfg);

// Euler-Maruyama on dX = X[pi(mu-r) + r]dt + X pi sigma dW with the surface's
// feedback control; state clamped into (eps, x_star - eps) for control
// evaluation, absorbed at zero.  Optional score overrides the utility used
// for the mean estimate.
PathStats simulate_euler(const MarketModel& m, const PrimalValueSurface& primal, double x,
                         const SimConfig& cfg,
                         const std::function<double(double)>& score = {});

// Constant-proportion strategy, exact GBM terminal draw.  Used to probe the
// suboptimality side of the verification inequality.
PathStats simulate_constant_control(const MarketModel& m, double pi, double x,
                                    const SimConfig& cfg,
                                    const std::function<double(double)>& score);

// Rockafellar-Uryasev CVaR of the empirical losses benchmark - U(X_T).
double empirical_cvar(const PathStats& stats, const RiskSpec& risk);

struct MartingaleReport {
    struct Checkpoint {
        double t;
        double estimate;
        double stderr_;
        double deviation;  // |estimate - u(0,x)| / stderr
    };
    std::vector<Checkpoint> checkpoints;
    double max_deviation = 0.0;
};

// Estimates E[u(t_i, X_{t_i})] along optimal paths; the value process is
// driftless under the optimal control, so deviations are pure noise.
MartingaleReport martingale_diagnostic(const MarketModel& m, const PrimalValueSurface& primal,
                                       double x, const SimConfig& cfg,
                                       const std::vector<double>& checkpoints);

void write_checkpoint_csv(std::ostream& os, const MartingaleReport& report,
                          const std::string& provenance);
std::string histogram_json(const PathStats& stats, int bins = 50);

}  // namespace dualopt
