#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dualopt/analysis.hpp"
#include "dualopt/config.hpp"
#include "dualopt/riskfrontier.hpp"
#include "dualopt/simulate.hpp"

namespace {

using namespace dualopt;

std::string provenance(const RunConfig& cfg) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%s seed=%llu config_hash=%016llx",
                  version_string().c_str(),
                  static_cast<unsigned long long>(cfg.sim_seed),
                  static_cast<unsigned long long>(cfg.config_hash()));
    return buf;
}

std::ostream& open_sink(std::ofstream& file, const std::string& out_path) {
    if (out_path.empty()) return std::cout;
    file.open(out_path);
    if (!file) throw std::invalid_argument("cannot open output file '" + out_path + "'");
    return file;
}

void echo_config(const RunConfig& cfg, const std::string& path) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw std::invalid_argument("cannot open echo-config file '" + path + "'");
    out << cfg.to_json_text() << "\n";
}

int cmd_value(const RunConfig& cfg) {
    BuiltProblem prob = build_problem(cfg);
    double t = cfg.value_t, x = cfg.value_x;
    double tau = prob.market.T - t;
    double u = prob.primal->value(t, x);
    char buf[512];
    if (x > 0.0 && x < prob.primal->x_star() && tau > 0.0) {
        double y = prob.primal->y_of_x(t, x);
        double ux = prob.primal->dx(t, x);
        double uxx = prob.primal->dxx(t, x);
        double pi = prob.primal->feedback_control(t, x);
        double amount = prob.primal->risky_amount_tau(tau, x);
        std::snprintf(buf, sizeof(buf),
                      "u=%.9g\ny=%.9g\nu_x=%.9g\nu_xx=%.9g\npi=%.9g\nA=%.9g\n", u, y, ux, uxx,
                      pi, amount);
    } else {
        std::snprintf(buf, sizeof(buf), "u=%.9g\npi=0\nA=0\n", u);
    }
    std::cout << "# " << provenance(cfg) << "\n" << buf;
    return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_path) {
    BuiltProblem prob = build_problem(cfg);
    SimConfig sim;
    sim.paths = cfg.sim_paths;
    sim.steps = cfg.sim_steps;
    sim.seed = cfg.sim_seed;
    sim.threads = cfg.sim_threads;
    sim.antithetic = cfg.sim_antithetic;

    PathStats stats;
    if (cfg.sim_scheme == "exact_capped") {
        if (!std::isfinite(prob.cap_H))
            throw std::invalid_argument("simulate: exact_capped needs a capped utility");
        sim.scheme = Scheme::ExactCapped;
        stats = simulate_exact_capped(prob.market, prob.cap_H, cfg.value_x, sim);
    } else if (cfg.sim_scheme == "euler") {
        sim.scheme = Scheme::EulerFeedback;
        stats = simulate_euler(prob.market, *prob.primal, cfg.value_x, sim);
    } else {
        throw std::invalid_argument("simulate: unknown scheme '" + cfg.sim_scheme + "'");
    }
    RiskSpec risk(cfg.sim_beta, cfg.value_x);
    double cvar = empirical_cvar(stats, risk);

    std::ofstream file;
    std::ostream& os = open_sink(file, out_path);
    os << "# " << provenance(cfg) << "\n";
    os << "mean,stderr,paths,empirical_cvar,stability_warning\n";
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%ld,%.9g,%d\n", stats.mean, stats.stderr_,
                  stats.paths, cvar, stats.stability_warning ? 1 : 0);
    os << buf;
    return 0;
}

int cmd_frontier(const RunConfig& cfg, const std::string& out_path) {
    if (cfg.utility.kind != UtilityKind::Cap)
        throw std::invalid_argument("frontier: requires the capped utility");
    MarketModel market = cfg.market_model();
    double x = cfg.frontier_x;
    RiskSpec risk(cfg.frontier_beta, cfg.frontier_c.value_or(x));
    auto points =
        frontier_sweep(cfg.frontier_lambdas, risk, market, cfg.frontier_t, x, cfg.utility.H);
    std::ofstream file;
    std::ostream& os = open_sink(file, out_path);
    write_frontier_csv(os, points, provenance(cfg));
    return 0;
}

int cmd_turnpike(const RunConfig& cfg, const std::string& out_path) {
    MarketModel market = cfg.market_model();
    PowerTailUtility u = cfg.utility.kind == UtilityKind::Power
                             ? PowerTailUtility::pure_power(cfg.utility.p, cfg.utility.k)
                             : PowerTailUtility::linear_then_power(cfg.utility.p,
                                                                   cfg.utility.switch_x);
    TurnpikeSpec spec(u, market, cfg.turnpike_taus, cfg.turnpike_x);
    auto points = turnpike_sweep(spec);
    std::ofstream file;
    std::ostream& os = open_sink(file, out_path);
    write_turnpike_csv(os, points, provenance(cfg));
    return 0;
}

int cmd_check(const RunConfig& cfg, const std::string& out_path) {
    BuiltProblem prob = build_problem(cfg);
    const MarketModel& m = prob.market;
    GridSpec grid{0.1 * m.T, 0.9 * m.T, cfg.check_nt, 0.1, 10.0, cfg.check_nz, true};
    ResidualReport dual = dual_residual(*prob.surface, grid);

    double x_hi = std::isfinite(prob.primal->x_star()) ? 0.95 * prob.primal->x_star() : 3.0;
    GridSpec pgrid{0.1 * m.T, 0.9 * m.T, cfg.check_nt, 0.05 * x_hi, x_hi, cfg.check_nz, true};
    ResidualReport primal = primal_residual(*prob.primal, pgrid);

    LimitsReport limits = prob.surface->limits_report(0.5 * m.T);

    // unbounded duals have infinite reference limits; emit null there
    auto num = [](double v) {
        if (!std::isfinite(v)) return std::string("null");
        char b[40];
        std::snprintf(b, sizeof(b), "%.9g", v);
        return std::string(b);
    };
    std::ofstream file;
    std::ostream& os = open_sink(file, out_path);
    os << "{\"provenance\":\"" << provenance(cfg) << "\",\n"
       << " \"dual_residual\":" << residual_json(dual) << ",\n"
       << " \"primal_residual\":" << residual_json(primal) << ",\n"
       << " \"limits\":{"
       << "\"dev_v_small\":" << num(limits.dev_v_small)
       << ",\"dev_v_large\":" << num(limits.dev_v_large)
       << ",\"dev_vy_small\":" << num(limits.dev_vy_small)
       << ",\"dev_vy_large\":" << num(limits.dev_vy_large) << "}}\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-control terminal-wealth toolkit"};
    app.require_subcommand(1);

    std::string config_path, out_path, echo_path;
    double opt_t = std::numeric_limits<double>::quiet_NaN();
    double opt_x = std::numeric_limits<double>::quiet_NaN();
    double opt_beta = std::numeric_limits<double>::quiet_NaN();
    long opt_paths = -1, opt_steps = -1;
    long long opt_seed = -1;
    int opt_threads = -1;
    std::string opt_lambdas, opt_scheme;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config path")->required();
        sub->add_option("--out", out_path, "write results to this file instead of stdout");
        sub->add_option("--echo-config", echo_path, "write the effective config to this file");
        sub->add_option("--t", opt_t, "override evaluation time");
        sub->add_option("--x", opt_x, "override wealth");
        sub->add_option("--seed", opt_seed, "override RNG seed");
        sub->add_option("--paths", opt_paths, "override path count");
        sub->add_option("--steps", opt_steps, "override step count");
        sub->add_option("--threads", opt_threads, "override thread count");
        sub->add_option("--scheme", opt_scheme, "override simulation scheme");
        sub->add_option("--beta", opt_beta, "override CVaR confidence");
        sub->add_option("--lambda", opt_lambdas, "override frontier lambdas (comma list)");
    };

    CLI::App* value = app.add_subcommand("value", "print u, y, u_x, u_xx, pi, A at (t, x)");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo estimate of E[U(X_T)]");
    CLI::App* frontier = app.add_subcommand("frontier", "wealth-CVaR efficient frontier CSV");
    CLI::App* turnpike = app.add_subcommand("turnpike", "risky-amount sweep over tau CSV");
    CLI::App* check = app.add_subcommand("check", "PDE residual and limit checks JSON");
    for (CLI::App* sub : {value, simulate, frontier, turnpike, check}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig cfg = dualopt::RunConfig::from_file(config_path);
        if (!std::isnan(opt_t)) cfg.value_t = cfg.frontier_t = opt_t;
        if (!std::isnan(opt_x)) cfg.value_x = cfg.frontier_x = opt_x;
        if (!std::isnan(opt_beta)) cfg.sim_beta = cfg.frontier_beta = opt_beta;
        if (opt_seed >= 0) cfg.sim_seed = static_cast<std::uint64_t>(opt_seed);
        if (opt_paths > 0) cfg.sim_paths = opt_paths;
        if (opt_steps > 0) cfg.sim_steps = opt_steps;
        if (opt_threads > 0) cfg.sim_threads = opt_threads;
        if (!opt_scheme.empty()) cfg.sim_scheme = opt_scheme;
        if (!opt_lambdas.empty()) {
            std::vector<double> ls;
            std::stringstream ss(opt_lambdas);
            std::string item;
            while (std::getline(ss, item, ',')) ls.push_back(std::stod(item));
            cfg.frontier_lambdas = ls;
        }
        echo_config(cfg, echo_path);

        if (*value) return cmd_value(cfg);
        if (*simulate) return cmd_simulate(cfg, out_path);
        if (*frontier) return cmd_frontier(cfg, out_path);
        if (*turnpike) return cmd_turnpike(cfg, out_path);
        if (*check) return cmd_check(cfg, out_path);
        std::cerr << "usage: dualopt <value|simulate|frontier|turnpike|check> --config PATH\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
}
