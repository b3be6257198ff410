#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dualopt/dualvalue.hpp"
#include "dualopt/market.hpp"
#include "dualopt/primal.hpp"

namespace dualopt {

enum class UtilityKind { Cap, CappedPower, Piecewise, Power, PowerTail };

struct UtilitySpec {
    UtilityKind kind = UtilityKind::Cap;
    double H = 1.0;                   // cap / capped_power
    double p = 0.5;                   // capped_power / power / power_tail
    double k = 1.0;                   // power scale
    double switch_x = 1.0;            // power_tail switch point
    std::vector<double> breakpoints;  // piecewise
    std::vector<double> slopes;
    double terminal = 1.0;  // piecewise d_{N+1}
};

// Parsed CLI configuration; JSON on disk, sections per command.
struct RunConfig {
    // market
    double r = 0.0, mu = 0.04, sigma = 0.2, T = 1.0;
    Constraint constraint = Constraint::Unconstrained;
    Regime regime = Regime::Discounted;

    UtilitySpec utility;

    // value
    double value_t = 0.0, value_x = 0.5;

    // simulation
    long sim_paths = 100000, sim_steps = 2000;
    std::uint64_t sim_seed = 42;
    std::string sim_scheme = "exact_capped";
    int sim_threads = 1;
    bool sim_antithetic = false;
    double sim_beta = 0.95;

    // frontier
    double frontier_beta = 0.95;
    std::optional<double> frontier_c;  // defaults to the frontier x
    double frontier_t = 0.0, frontier_x = 0.5;
    std::vector<double> frontier_lambdas = {0.0, 0.25, 0.5, 1.0, 2.0};

    // turnpike
    std::vector<double> turnpike_taus = {1.0, 2.0, 5.0, 10.0, 20.0, 40.0};
    double turnpike_x = 1.0;

    // check
    int check_nt = 20, check_nz = 40;

    static RunConfig from_json_text(const std::string& text);
    static RunConfig from_file(const std::string& path);
    std::string to_json_text() const;  // canonical echo; re-parses identically
    std::uint64_t config_hash() const;

    MarketModel market_model() const { return MarketModel(r, mu, sigma, T, constraint); }
};

// Surfaces assembled from the configured market + utility.
struct BuiltProblem {
    MarketModel market;
    Regime regime;
    std::shared_ptr<const DualValueSurface> surface;
    std::shared_ptr<const PrimalValueSurface> primal;
    std::function<double(double)> utility_fn;
    double cap_H;  // NaN when the utility has no cap
};

BuiltProblem build_problem(const RunConfig& cfg);

std::string version_string();

}  // namespace dualopt
