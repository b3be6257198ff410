#include "dualopt/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "dualopt/normal.hpp"
#include "dualopt/rng.hpp"

namespace dualopt {

namespace {

// Disjoint path ranges per thread; outputs are written by path index, so the
// result does not depend on the thread count.
void parallel_paths(long n, int threads, const std::function<void(long, long)>& body) {
    threads = static_cast<int>(std::min<long>(threads, n));
    if (threads <= 1) {
        body(0, n);
        return;
    }
    std::vector<std::thread> pool;
    long chunk = (n + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
        long lo = k * chunk, hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(body, lo, hi);
    }
    for (auto& th : pool) th.join();
}

// Antithetic pairing: paths (2j, 2j+1) share stream j with mirrored draws.
double first_normal(std::uint64_t seed, long path, bool antithetic) {
    if (!antithetic) return NormalStream(seed, static_cast<std::uint64_t>(path)).next();
    NormalStream s(seed, static_cast<std::uint64_t>(path / 2));
    double z = s.next();
    return path % 2 == 0 ? z : -z;
}

void finalize_stats(PathStats& st) {
    const long n = st.paths;
    double sum = 0.0, comp = 0.0;
    for (double v : st.terminal_utility) {
        double t = sum + v;
        comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    st.mean = (sum + comp) / n;
    double ss = 0.0;
    for (double v : st.terminal_utility) {
        double d = v - st.mean;
        ss += d * d;
    }
    st.stderr_ = n > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

}  // namespace

PathStats simulate_exact_capped_theta(double theta, double T, double H, double x,
                                      const SimConfig& cfg) {
    cfg.validate();
    if (!(H > 0.0) || !(x > 0.0 && x < H))
        throw std::domain_error("simulate_exact_capped: need 0 < x < H");
    const double z0 = norm_cdf_inv(x / H);
    const double sqrtT = std::sqrt(T);
    const double drift = z0 * sqrtT + theta * T;

    PathStats st;
    st.paths = cfg.paths;
    st.terminal_wealth.assign(cfg.paths, 0.0);
    st.terminal_utility.assign(cfg.paths, 0.0);
    parallel_paths(cfg.paths, cfg.threads, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            double w_T = sqrtT * first_normal(cfg.seed, i, cfg.antithetic);
            double xt = drift + w_T > 0.0 ? H : 0.0;
            st.terminal_wealth[i] = xt;
            st.terminal_utility[i] = std::min(xt, H);
        }
    });
    finalize_stats(st);
    return st;
}

PathStats simulate_exact_capped(const MarketModel& m, double H, double x, const SimConfig& cfg) {
    return simulate_exact_capped_theta(m.effective_theta(), m.T, H, x, cfg);
}

PathStats simulate_euler(const MarketModel& m, const PrimalValueSurface& primal, double x,
                         const SimConfig& cfg, const std::function<double(double)>& score) {
    cfg.validate();
    if (!(x > 0.0)) throw std::domain_error("simulate_euler: x must be > 0");
    const DualValueSurface& dual = primal.dual_surface();
    const double T = m.T;
    const double dt = T / cfg.steps;
    const double sqrt_dt = std::sqrt(dt);
    const double b = m.mu - m.r;
    const double theta_over_sigma = m.effective_theta() / m.sigma;
    const double x_star = primal.x_star();
    const bool bounded = std::isfinite(x_star);
    const double eps = 1e-8 * (bounded ? x_star : 1.0);
    const double blowup = bounded ? 1e3 * x_star : std::numeric_limits<double>::infinity();

    std::function<double(double)> u = score;
    PathStats st;
    st.paths = cfg.paths;
    st.terminal_wealth.assign(cfg.paths, 0.0);
    st.terminal_utility.assign(cfg.paths, 0.0);
    std::vector<char> warn(cfg.paths, 0);

    parallel_paths(cfg.paths, cfg.threads, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            NormalStream stream(cfg.seed, static_cast<std::uint64_t>(i));
            double X = x;
            double y_hint = 0.0;
            for (long j = 0; j < cfg.steps; ++j) {
                double z = stream.next();
                if (X <= 0.0) {
                    X = 0.0;  // zero wealth is invariant for the multiplicative SDE
                    continue;
                }
                double pi = 0.0;
                if (!bounded || X < x_star - eps) {
                    double xc = std::max(X, eps);
                    double tau = T - j * dt;
                    double y = primal.y_of_x_tau(tau, xc, y_hint);
                    y_hint = y;
                    pi = theta_over_sigma * y * dual.dyy_tau(tau, y) / xc;
                }
                X += X * (pi * b + m.r) * dt + X * pi * m.sigma * sqrt_dt * z;
                if (X > blowup) warn[i] = 1;
            }
            double w = std::max(X, 0.0);
            st.terminal_wealth[i] = w;
            st.terminal_utility[i] = u ? u(w) : primal.value_tau(0.0, std::min(w, x_star));
        }
    });
    for (char c : warn)
        if (c) st.stability_warning = true;
    finalize_stats(st);
    return st;
}

PathStats simulate_constant_control(const MarketModel& m, double pi, double x,
                                    const SimConfig& cfg,
                                    const std::function<double(double)>& score) {
    cfg.validate();
    if (!score) throw std::invalid_argument("simulate_constant_control: score required");
    const double T = m.T;
    const double b = m.mu - m.r;
    const double drift = (pi * b + m.r - 0.5 * pi * pi * m.sigma * m.sigma) * T;
    const double vol = pi * m.sigma * std::sqrt(T);

    PathStats st;
    st.paths = cfg.paths;
    st.terminal_wealth.assign(cfg.paths, 0.0);
    st.terminal_utility.assign(cfg.paths, 0.0);
    parallel_paths(cfg.paths, cfg.threads, [&](long lo, long hi) {
        for (long i = lo; i < hi; ++i) {
            double z = first_normal(cfg.seed, i, cfg.antithetic);
            double w = x * std::exp(drift + vol * z);
            st.terminal_wealth[i] = w;
            st.terminal_utility[i] = score(w);
        }
    });
    finalize_stats(st);
    return st;
}

double empirical_cvar(const PathStats& stats, const RiskSpec& risk) {
    if (stats.terminal_utility.empty()) throw std::domain_error("empirical_cvar: no samples");
    DiscreteLossDistribution d;
    const double p = 1.0 / static_cast<double>(stats.paths);
    d.atoms.reserve(stats.terminal_utility.size());
    for (double v : stats.terminal_utility) d.atoms.push_back({risk.benchmark - v, p});
    return cvar_ru(d, risk.beta).cvar;
}

MartingaleReport martingale_diagnostic(const MarketModel& m, const PrimalValueSurface& primal,
                                       double x, const SimConfig& cfg,
                                       const std::vector<double>& checkpoints) {
    cfg.validate();
    if (checkpoints.empty()) throw std::invalid_argument("martingale_diagnostic: no checkpoints");
    for (double t : checkpoints)
        if (!(t > 0.0 && t < m.T))
            throw std::domain_error("martingale_diagnostic: checkpoints must lie in (0, T)");
    if (!std::is_sorted(checkpoints.begin(), checkpoints.end()))
        throw std::invalid_argument("martingale_diagnostic: checkpoints must be ascending");

    const double u0 = primal.value(0.0, x);
    const std::size_t nc = checkpoints.size();
    std::vector<std::vector<double>> values(nc, std::vector<double>(cfg.paths, 0.0));

    if (cfg.scheme == Scheme::ExactCapped) {
        // Exact capped state at arbitrary t: X_t = H Phi(Z_t),
        // Z_t = (Z0 sqrt(T) + theta t + W_t) / sqrt(T - t).
        const double H = primal.x_star();
        if (!std::isfinite(H))
            throw std::domain_error("martingale_diagnostic: exact scheme needs a capped utility");
        const double theta = m.effective_theta();
        const double z0 = norm_cdf_inv(x / H);
        parallel_paths(cfg.paths, cfg.threads, [&](long lo, long hi) {
            for (long i = lo; i < hi; ++i) {
                NormalStream stream(cfg.seed, static_cast<std::uint64_t>(i));
                double w = 0.0, t_prev = 0.0;
                for (std::size_t k = 0; k < nc; ++k) {
                    double t = checkpoints[k];
                    w += std::sqrt(t - t_prev) * stream.next();
                    t_prev = t;
                    double zt = (z0 * std::sqrt(m.T) + theta * t + w) / std::sqrt(m.T - t);
                    double xt = H * norm_cdf(zt);
                    values[k][i] = primal.value(t, xt);
                }
            }
        });
    } else {
        const DualValueSurface& dual = primal.dual_surface();
        const double dt = m.T / cfg.steps;
        const double sqrt_dt = std::sqrt(dt);
        const double b = m.mu - m.r;
        const double theta_over_sigma = m.effective_theta() / m.sigma;
        const double x_star = primal.x_star();
        const bool bounded = std::isfinite(x_star);
        const double eps = 1e-8 * (bounded ? x_star : 1.0);
        parallel_paths(cfg.paths, cfg.threads, [&](long lo, long hi) {
            for (long i = lo; i < hi; ++i) {
                NormalStream stream(cfg.seed, static_cast<std::uint64_t>(i));
                double X = x, y_hint = 0.0;
                std::size_t next_cp = 0;
                for (long j = 0; j < cfg.steps; ++j) {
                    double t_now = j * dt;
                    while (next_cp < nc && t_now >= checkpoints[next_cp]) {
                        values[next_cp][i] =
                            primal.value(t_now, std::min(std::max(X, 0.0), x_star));
                        ++next_cp;
                    }
                    double z = stream.next();
                    if (X <= 0.0) continue;
                    double pi = 0.0;
                    if (!bounded || X < x_star - eps) {
                        double xc = std::max(X, eps);
                        double tau = m.T - t_now;
                        double y = primal.y_of_x_tau(tau, xc, y_hint);
                        y_hint = y;
                        pi = theta_over_sigma * y * dual.dyy_tau(tau, y) / xc;
                    }
                    X += X * (pi * b + m.r) * dt + X * pi * m.sigma * sqrt_dt * z;
                }
                for (; next_cp < nc; ++next_cp)
                    values[next_cp][i] =
                        primal.value(checkpoints[next_cp], std::min(std::max(X, 0.0), x_star));
            }
        });
    }

    MartingaleReport report;
    for (std::size_t k = 0; k < nc; ++k) {
        double sum = 0.0;
        for (double v : values[k]) sum += v;
        double mean = sum / cfg.paths;
        double ss = 0.0;
        for (double v : values[k]) {
            double dvv = v - mean;
            ss += dvv * dvv;
        }
        double se = cfg.paths > 1 ? std::sqrt(ss / (cfg.paths - 1.0) / cfg.paths) : 0.0;
        double dev = se > 0.0 ? std::abs(mean - u0) / se : 0.0;
        report.checkpoints.push_back({checkpoints[k], mean, se, dev});
        report.max_deviation = std::max(report.max_deviation, dev);
    }
    return report;
}

std::vector<PathStats::HistogramBin> PathStats::histogram(int bins) const {
    std::vector<HistogramBin> out;
    if (terminal_wealth.empty()) return out;
    const double n = static_cast<double>(terminal_wealth.size());
    std::map<double, long> counts;
    bool few_atoms = true;
    for (double w : terminal_wealth) {
        counts[w]++;
        if (counts.size() > 16) {
            few_atoms = false;
            break;
        }
    }
    if (few_atoms) {
        for (const auto& [w, c] : counts) out.push_back({w, w, c / n});
        return out;
    }
    auto [lo_it, hi_it] = std::minmax_element(terminal_wealth.begin(), terminal_wealth.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi <= lo) {
        out.push_back({lo, hi, 1.0});
        return out;
    }
    out.assign(bins, HistogramBin{0, 0, 0});
    double width = (hi - lo) / bins;
    for (int k = 0; k < bins; ++k) {
        out[k].lo = lo + k * width;
        out[k].hi = out[k].lo + width;
    }
    for (double w : terminal_wealth) {
        int k = std::min(bins - 1, static_cast<int>((w - lo) / width));
        out[k].mass += 1.0 / n;
    }
    return out;
}

void write_checkpoint_csv(std::ostream& os, const MartingaleReport& report,
                          const std::string& provenance) {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "t,estimate,stderr,deviation\n";
    char buf[160];
    for (const auto& c : report.checkpoints) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g\n", c.t, c.estimate, c.stderr_,
                      c.deviation);
        os << buf;
    }
}

std::string histogram_json(const PathStats& stats, int bins) {
    auto hist = stats.histogram(bins);
    std::ostringstream os;
    os << "{\"mean\":" << stats.mean << ",\"stderr\":" << stats.stderr_
       << ",\"paths\":" << stats.paths << ",\"stability_warning\":"
       << (stats.stability_warning ? "true" : "false") << ",\"bins\":[";
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (i) os << ",";
        os << "{\"lo\":" << hist[i].lo << ",\"hi\":" << hist[i].hi << ",\"mass\":" << hist[i].mass
           << "}";
    }
    os << "]}";
    return os.str();
}

}  // namespace dualopt
