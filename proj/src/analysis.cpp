#include "dualopt/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <sstream>

namespace dualopt {

std::vector<double> GridSpec::times() const {
    std::vector<double> ts(nt);
    for (int i = 0; i < nt; ++i) ts[i] = t_lo + (t_hi - t_lo) * i / std::max(1, nt - 1);
    return ts;
}

std::vector<double> GridSpec::states() const {
    std::vector<double> zs(nz);
    if (log_space) {
        double l0 = std::log(z_lo), l1 = std::log(z_hi);
        for (int i = 0; i < nz; ++i) zs[i] = std::exp(l0 + (l1 - l0) * i / std::max(1, nz - 1));
    } else {
        for (int i = 0; i < nz; ++i) zs[i] = z_lo + (z_hi - z_lo) * i / std::max(1, nz - 1);
    }
    return zs;
}

namespace {

void check_grid(const GridSpec& g, double T) {
    if (g.nt < 2 || g.nz < 2) throw std::invalid_argument("GridSpec: need at least a 2x2 grid");
    if (!(g.t_lo > 0.0 && g.t_hi < T && g.t_lo <= g.t_hi))
        throw std::domain_error("GridSpec: time rows must be interior to (0, T)");
    if (!(g.z_lo > 0.0 && g.z_lo <= g.z_hi)) throw std::invalid_argument("GridSpec: bad state range");
}

// Central difference in t, optionally Richardson-extrapolated to fourth order.
template <typename F>
double time_derivative(const F& f, double t, double h, bool richardson) {
    auto central = [&](double hh) { return (f(t + hh) - f(t - hh)) / (2.0 * hh); };
    if (!richardson) return central(h);
    double d1 = central(h), d2 = central(0.5 * h);
    return (4.0 * d2 - d1) / 3.0;
}

}  // namespace

ResidualReport dual_residual(const DualValueSurface& surface, const GridSpec& grid,
                             const FdOptions& fd) {
    const MarketModel& m = surface.market();
    check_grid(grid, m.T);
    const double h = fd.h_factor * m.T;
    const double theta = m.effective_theta();
    const bool with_rate = surface.regime() == Regime::WithRate;

    ResidualReport rep;
    rep.h_t = h;
    rep.richardson = fd.richardson;
    rep.nt = grid.nt;
    rep.nz = grid.nz;
    for (double t : grid.times()) {
        if (t + h >= m.T || t - h <= 0.0) {
            rep.near_terminal_rows.push_back(t);
            continue;
        }
        for (double y : grid.states()) {
            double vt = time_derivative([&](double tt) { return surface.value(tt, y); }, t, h,
                                        fd.richardson);
            double vy = surface.dy(t, y);
            double vyy = surface.dyy(t, y);
            double resid;
            if (with_rate) {
                // v_tau - theta^2 y^2 v_yy / 2 + r y v_y, with v_tau = -v_t
                resid = -vt - 0.5 * theta * theta * y * y * vyy + m.r * y * vy;
            } else {
                resid = vt + 0.5 * theta * theta * y * y * vyy;
            }
            if (std::abs(resid) > rep.max_abs) {
                rep.max_abs = std::abs(resid);
                rep.at_t = t;
                rep.at_state = y;
            }
        }
    }
    return rep;
}

ResidualReport primal_residual(const PrimalValueSurface& surface, const GridSpec& grid,
                               const FdOptions& fd) {
    const MarketModel& m = surface.dual_surface().market();
    check_grid(grid, m.T);
    const double h = fd.h_factor * m.T;
    const double theta = m.effective_theta();
    const bool with_rate = surface.dual_surface().regime() == Regime::WithRate;

    ResidualReport rep;
    rep.h_t = h;
    rep.richardson = fd.richardson;
    rep.nt = grid.nt;
    rep.nz = grid.nz;
    for (double t : grid.times()) {
        if (t + h >= m.T || t - h <= 0.0) {
            rep.near_terminal_rows.push_back(t);
            continue;
        }
        for (double x : grid.states()) {
            if (x >= surface.x_star()) continue;
            double ut = time_derivative([&](double tt) { return surface.value(tt, x); }, t, h,
                                        fd.richardson);
            double ux = surface.dx(t, x);
            double uxx = surface.dxx(t, x);
            // -u_tau - theta^2 u_x^2 / (2 u_xx) + r x u_x, u_tau = -u_t
            double resid = ut - 0.5 * theta * theta * ux * ux / uxx;
            if (with_rate) resid += m.r * x * ux;
            if (std::abs(resid) > rep.max_abs) {
                rep.max_abs = std::abs(resid);
                rep.at_t = t;
                rep.at_state = x;
            }
        }
    }
    return rep;
}

TurnpikeSpec::TurnpikeSpec(PowerTailUtility u, MarketModel m, std::vector<double> taus, double x)
    : utility(std::move(u)), market(m), tau_grid(std::move(taus)), x_probe(x) {
    if (tau_grid.empty()) throw std::invalid_argument("TurnpikeSpec: empty tau grid");
    for (double tau : tau_grid)
        if (!(tau > 0.0)) throw std::invalid_argument("TurnpikeSpec: taus must be > 0");
    if (!(x_probe > 0.0)) throw std::invalid_argument("TurnpikeSpec: x must be > 0");
}

double TurnpikeSpec::lambda_exponent() const {
    double theta = market.effective_theta();
    double qq = q();
    return 0.5 * theta * theta * qq * (qq - 1.0) - market.r * qq;
}

namespace {

// Numeric dual of the tail-normalized utility; the control is invariant under
// the affine rescale.
std::shared_ptr<const DualValueSurface> turnpike_surface(const TurnpikeSpec& spec) {
    double a = tail_constant_for_normalized(spec.utility.p());
    PowerTailUtility normalized = spec.utility.scaled(a / spec.utility.tail_constant(), 0.0);
    auto dual = std::make_shared<NumericDual>(normalized);
    return std::make_shared<DualValueSurface>(DualValueSurface::quadrature(
        spec.market, dual, Regime::WithRate, spec.quad_order));
}

}  // namespace

std::vector<TurnpikePoint> turnpike_sweep(const TurnpikeSpec& spec) {
    auto surface = turnpike_surface(spec);
    PowerTailUtility u = spec.utility;
    double a = tail_constant_for_normalized(u.p());
    double scale = a / u.tail_constant();
    PrimalValueSurface primal(surface, [u, scale](double x) { return scale * u(x); });

    const double target = spec.merton_target();
    std::vector<TurnpikePoint> out;
    out.reserve(spec.tau_grid.size());
    for (double tau : spec.tau_grid) {
        double amount = primal.risky_amount_tau(tau, spec.x_probe);
        out.push_back({tau, amount, std::abs(amount / target - 1.0)});
    }
    return out;
}

CorollaryReport corollary_limits(const DualValueSurface& surface, double q, double lambda,
                                 double tau, const std::vector<double>& ys) {
    if (!(tau > 0.0)) throw std::domain_error("corollary_limits: tau must be > 0");
    CorollaryReport rep;
    for (double y : ys) {
        // e^{lambda tau} y^s in log space to dodge overflow at small y
        auto asymptote = [&](double s) { return std::exp(lambda * tau + s * std::log(y)); };
        CorollaryReport::Row row;
        row.y = y;
        row.ratio_v = surface.value_tau(tau, y) / asymptote(q);
        row.ratio_vy = surface.dy_tau(tau, y) / (q * asymptote(q - 1.0));
        row.ratio_vyy = surface.dyy_tau(tau, y) / (q * (q - 1.0) * asymptote(q - 2.0));
        rep.rows.push_back(row);
        rep.max_dev = std::max({rep.max_dev, std::abs(row.ratio_v - 1.0),
                                std::abs(row.ratio_vy - 1.0), std::abs(row.ratio_vyy - 1.0)});
    }
    return rep;
}

CorollaryReport corollary_limits(const TurnpikeSpec& spec, double tau) {
    auto surface = turnpike_surface(spec);
    return corollary_limits(*surface, spec.q(), spec.lambda_exponent(), tau);
}

LargeYReport large_y_limits(const DualValueSurface& surface, double tau,
                            const std::vector<double>& ys) {
    LargeYReport rep;
    for (double y : ys) {
        LargeYReport::Row row;
        row.y = y;
        row.v = surface.value_tau(tau, y);
        row.y_vy = y * surface.dy_tau(tau, y);
        row.y2_vyy = y * y * surface.dyy_tau(tau, y);
        rep.rows.push_back(row);
        rep.max_abs = std::max({rep.max_abs, std::abs(row.v), std::abs(row.y_vy),
                                std::abs(row.y2_vyy)});
    }
    return rep;
}

LargeYReport large_y_limits(const TurnpikeSpec& spec, double tau) {
    auto surface = turnpike_surface(spec);
    return large_y_limits(*surface, tau);
}

void write_turnpike_csv(std::ostream& os, const std::vector<TurnpikePoint>& points,
                        const std::string& provenance) {
    if (!provenance.empty()) os << "# " << provenance << "\n";
    os << "tau,amount,gap\n";
    char buf[120];
    for (const auto& p : points) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g\n", p.tau, p.amount, p.gap);
        os << buf;
    }
}

std::string residual_json(const ResidualReport& report) {
    std::ostringstream os;
    os << "{\"max_abs_residual\":" << report.max_abs << ",\"at_t\":" << report.at_t
       << ",\"at_state\":" << report.at_state << ",\"h_t\":" << report.h_t
       << ",\"richardson\":" << (report.richardson ? "true" : "false") << ",\"nt\":" << report.nt
       << ",\"nz\":" << report.nz << ",\"near_terminal_rows\":[";
    for (std::size_t i = 0; i < report.near_terminal_rows.size(); ++i) {
        if (i) os << ",";
        os << report.near_terminal_rows[i];
    }
    os << "]}";
    return os.str();
}

}  // namespace dualopt
