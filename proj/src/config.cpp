#include "dualopt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dualopt/utility.hpp"

namespace dualopt {

using nlohmann::json;

namespace {

std::string kind_name(UtilityKind k) {
    switch (k) {
        case UtilityKind::Cap: return "cap";
        case UtilityKind::CappedPower: return "capped_power";
        case UtilityKind::Piecewise: return "piecewise";
        case UtilityKind::Power: return "power";
        case UtilityKind::PowerTail: return "power_tail";
    }
    throw std::logic_error("unknown utility kind");
}

UtilityKind kind_from(const std::string& s) {
    if (s == "cap") return UtilityKind::Cap;
    if (s == "capped_power") return UtilityKind::CappedPower;
    if (s == "piecewise") return UtilityKind::Piecewise;
    if (s == "power") return UtilityKind::Power;
    if (s == "power_tail") return UtilityKind::PowerTail;
    throw std::invalid_argument("config: unknown utility kind '" + s + "'");
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    RunConfig c;
    if (j.contains("market")) {
        const json& m = j.at("market");
        maybe(m, "r", c.r);
        maybe(m, "mu", c.mu);
        maybe(m, "sigma", c.sigma);
        maybe(m, "T", c.T);
        std::string constraint = "unconstrained", regime = "discounted";
        maybe(m, "constraint", constraint);
        maybe(m, "regime", regime);
        if (constraint == "unconstrained")
            c.constraint = Constraint::Unconstrained;
        else if (constraint == "no_short_selling")
            c.constraint = Constraint::NoShortSelling;
        else
            throw std::invalid_argument("config: unknown constraint '" + constraint + "'");
        if (regime == "discounted")
            c.regime = Regime::Discounted;
        else if (regime == "with_rate")
            c.regime = Regime::WithRate;
        else
            throw std::invalid_argument("config: unknown regime '" + regime + "'");
    }
    if (j.contains("utility")) {
        const json& u = j.at("utility");
        std::string kind = "cap";
        maybe(u, "kind", kind);
        c.utility.kind = kind_from(kind);
        maybe(u, "H", c.utility.H);
        maybe(u, "p", c.utility.p);
        maybe(u, "k", c.utility.k);
        maybe(u, "switch_x", c.utility.switch_x);
        maybe(u, "breakpoints", c.utility.breakpoints);
        maybe(u, "slopes", c.utility.slopes);
        maybe(u, "terminal", c.utility.terminal);
    }
    if (j.contains("value")) {
        const json& v = j.at("value");
        maybe(v, "t", c.value_t);
        maybe(v, "x", c.value_x);
    }
    if (j.contains("simulation")) {
        const json& s = j.at("simulation");
        maybe(s, "paths", c.sim_paths);
        maybe(s, "steps", c.sim_steps);
        maybe(s, "seed", c.sim_seed);
        maybe(s, "scheme", c.sim_scheme);
        maybe(s, "threads", c.sim_threads);
        maybe(s, "antithetic", c.sim_antithetic);
        maybe(s, "beta", c.sim_beta);
    }
    if (j.contains("frontier")) {
        const json& f = j.at("frontier");
        maybe(f, "beta", c.frontier_beta);
        if (f.contains("c")) c.frontier_c = f.at("c").get<double>();
        maybe(f, "t", c.frontier_t);
        maybe(f, "x", c.frontier_x);
        maybe(f, "lambdas", c.frontier_lambdas);
    }
    if (j.contains("turnpike")) {
        const json& t = j.at("turnpike");
        maybe(t, "taus", c.turnpike_taus);
        maybe(t, "x", c.turnpike_x);
    }
    if (j.contains("check")) {
        const json& k = j.at("check");
        maybe(k, "nt", c.check_nt);
        maybe(k, "nz", c.check_nz);
    }
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string RunConfig::to_json_text() const {
    json u{{"kind", kind_name(utility.kind)}};
    switch (utility.kind) {
        case UtilityKind::Cap:
            u["H"] = utility.H;
            break;
        case UtilityKind::CappedPower:
            u["H"] = utility.H;
            u["p"] = utility.p;
            break;
        case UtilityKind::Piecewise:
            u["breakpoints"] = utility.breakpoints;
            u["slopes"] = utility.slopes;
            u["terminal"] = utility.terminal;
            break;
        case UtilityKind::Power:
            u["p"] = utility.p;
            u["k"] = utility.k;
            break;
        case UtilityKind::PowerTail:
            u["p"] = utility.p;
            u["switch_x"] = utility.switch_x;
            break;
    }
    json j{
        {"market",
         {{"r", r},
          {"mu", mu},
          {"sigma", sigma},
          {"T", T},
          {"constraint",
           constraint == Constraint::Unconstrained ? "unconstrained" : "no_short_selling"},
          {"regime", regime == Regime::Discounted ? "discounted" : "with_rate"}}},
        {"utility", u},
        {"value", {{"t", value_t}, {"x", value_x}}},
        {"simulation",
         {{"paths", sim_paths},
          {"steps", sim_steps},
          {"seed", sim_seed},
          {"scheme", sim_scheme},
          {"threads", sim_threads},
          {"antithetic", sim_antithetic},
          {"beta", sim_beta}}},
        {"frontier",
         {{"beta", frontier_beta},
          {"t", frontier_t},
          {"x", frontier_x},
          {"lambdas", frontier_lambdas}}},
        {"turnpike", {{"taus", turnpike_taus}, {"x", turnpike_x}}},
        {"check", {{"nt", check_nt}, {"nz", check_nz}}},
    };
    if (frontier_c) j["frontier"]["c"] = *frontier_c;
    return j.dump(2);
}

std::uint64_t RunConfig::config_hash() const {
    // FNV-1a over the canonical dump.  The thread count is normalized out:
    // it cannot change any result, and identical experiments must hash alike.
    RunConfig canon = *this;
    canon.sim_threads = 1;
    std::uint64_t h = 1469598103934665603ULL;
    for (char ch : canon.to_json_text()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    return h;
}

BuiltProblem build_problem(const RunConfig& cfg) {
    MarketModel market = cfg.market_model();
    const UtilitySpec& u = cfg.utility;
    const double nan = std::numeric_limits<double>::quiet_NaN();

    std::shared_ptr<const DualValueSurface> surface;
    std::function<double(double)> ufn;
    double cap = nan;

    switch (u.kind) {
        case UtilityKind::Cap: {
            PiecewiseLinearUtility plu = PiecewiseLinearUtility::capped(u.H);
            surface = std::make_shared<DualValueSurface>(
                cfg.regime == Regime::Discounted
                    ? DualValueSurface::piecewise_closed_form(market, plu)
                    : DualValueSurface::piecewise_quadrature(market, plu, cfg.regime));
            ufn = [plu](double x) { return plu(x); };
            cap = u.H;
            break;
        }
        case UtilityKind::Piecewise: {
            PiecewiseLinearUtility plu(u.breakpoints, u.slopes, u.terminal);
            surface = std::make_shared<DualValueSurface>(
                cfg.regime == Regime::Discounted
                    ? DualValueSurface::piecewise_closed_form(market, plu)
                    : DualValueSurface::piecewise_quadrature(market, plu, cfg.regime));
            ufn = [plu](double x) { return plu(x); };
            break;
        }
        case UtilityKind::CappedPower: {
            CappedPowerUtility cp(u.H, u.p);
            if (cfg.regime == Regime::Discounted) {
                surface = std::make_shared<DualValueSurface>(
                    DualValueSurface::capped_power_closed_form(market, cp));
            } else {
                auto dual = std::make_shared<CappedPowerDual>(u.H, u.p);
                surface = std::make_shared<DualValueSurface>(
                    DualValueSurface::quadrature(market, dual, cfg.regime));
            }
            ufn = [cp](double x) { return cp(x); };
            break;
        }
        case UtilityKind::Power: {
            auto dual = std::make_shared<PowerDual>(PowerDual::of_power_utility(u.k, u.p));
            surface = std::make_shared<DualValueSurface>(
                DualValueSurface::quadrature(market, dual, cfg.regime));
            double k = u.k, p = u.p;
            ufn = [k, p](double x) { return k * std::pow(x, p); };
            break;
        }
        case UtilityKind::PowerTail: {
            PowerTailUtility pt = PowerTailUtility::linear_then_power(u.p, u.switch_x);
            auto dual = std::make_shared<NumericDual>(pt);
            surface = std::make_shared<DualValueSurface>(
                DualValueSurface::quadrature(market, dual, cfg.regime));
            ufn = [pt](double x) { return pt(x); };
            break;
        }
    }

    BuiltProblem prob{market, cfg.regime, surface, nullptr, ufn, cap};
    prob.primal = std::make_shared<PrimalValueSurface>(surface, ufn);
    return prob;
}

std::string version_string() { return "dualopt 0.1.0"; }

}  // namespace dualopt
