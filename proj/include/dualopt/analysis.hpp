#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dualopt/dualvalue.hpp"
#include "dualopt/primal.hpp"
#include "dualopt/utility.hpp"

namespace dualopt {

struct GridSpec {
    double t_lo, t_hi;  // interior in (0, T): rows touching T are rejected
    int nt;
    double z_lo, z_hi;  // y for the dual residual, x for the primal one
    int nz;
    bool log_space = true;

    std::vector<double> times() const;
    std::vector<double> states() const;
};

struct FdOptions {
    double h_factor = 1e-4;  // time step = h_factor * T
    bool richardson = true;
};

struct ResidualReport {
    double max_abs = 0.0;
    double at_t = 0.0, at_state = 0.0;
    double h_t = 0.0;
    bool richardson = true;
    int nt = 0, nz = 0;
    std::vector<double> near_terminal_rows;  // t values excluded/flagged
};

// Max |v_t + theta^2 y^2 v_yy / 2| (discounted) or
// |v_tau - theta^2 y^2 v_yy / 2 + r y v_y| (with-rate) with analytic
// y-derivatives and a central-difference time derivative.
ResidualReport dual_residual(const DualValueSurface& surface, const GridSpec& grid,
                             const FdOptions& fd = {});

// Max |-u_tau - theta^2 u_x^2 / (2 u_xx) + r x u_x| (with-rate; the r term
// drops in the discounted regime), u_x and u_xx analytic.
ResidualReport primal_residual(const PrimalValueSurface& surface, const GridSpec& grid,
                               const FdOptions& fd = {});

struct TurnpikeSpec {
    PowerTailUtility utility;
    MarketModel market;  // with-rate regime
    std::vector<double> tau_grid;
    double x_probe = 1.0;
    int quad_order = 128;

    TurnpikeSpec(PowerTailUtility u, MarketModel m, std::vector<double> taus, double x);

    double q() const { return utility.q(); }
    // lambda = theta^2 q (q-1) / 2 - r q
    double lambda_exponent() const;
    double merton_target() const {
        double theta = market.effective_theta();
        return theta * x_probe / (market.sigma * (1.0 - utility.p()));
    }
};

struct TurnpikePoint {
    double tau;
    double amount;  // A(tau, x)
    double gap;     // |A / merton_target - 1|
};

// Risky amount along the tau grid from the utility's numeric dual (normalized
// so its power tail matches 1/(p^p (1-p)^(1-p)); A is invariant under that).
std::vector<TurnpikePoint> turnpike_sweep(const TurnpikeSpec& spec);

struct CorollaryReport {
    struct Row {
        double y;
        double ratio_v;    // v / (e^{lambda tau} y^q)
        double ratio_vy;   // v_y / (q e^{lambda tau} y^{q-1})
        double ratio_vyy;  // v_yy / (q (q-1) e^{lambda tau} y^{q-2})
    };
    std::vector<Row> rows;
    double max_dev = 0.0;  // max |ratio - 1|
};

// Small-y growth ratios of the with-rate dual surface against the
// e^{lambda tau} y^q asymptote.
CorollaryReport corollary_limits(const DualValueSurface& surface, double q, double lambda,
                                 double tau, const std::vector<double>& ys = {1e-3, 1e-4, 1e-5});
CorollaryReport corollary_limits(const TurnpikeSpec& spec, double tau);

struct LargeYReport {
    struct Row {
        double y;
        double v, y_vy, y2_vyy;
    };
    std::vector<Row> rows;
    double max_abs = 0.0;
};

// v, y v_y, y^2 v_yy at large y; all vanish when Utilde(inf) = 0.
LargeYReport large_y_limits(const DualValueSurface& surface, double tau,
                            const std::vector<double>& ys = {1e3, 1e4});
LargeYReport large_y_limits(const TurnpikeSpec& spec, double tau);

void write_turnpike_csv(std::ostream& os, const std::vector<TurnpikePoint>& points,
                        const std::string& provenance);
std::string residual_json(const ResidualReport& report);

}  // namespace dualopt
