#pragma once

#include <memory>

#include "dualopt/market.hpp"
#include "dualopt/utility.hpp"

namespace dualopt {

enum class Backend { ClosedFormPiecewise, Quadrature, ClosedFormCappedPower };

struct LimitsReport {
    double v_small, v_large, vy_small, vy_large;  // raw values at y = 1e-6 / 1e6
    double dev_v_small;   // |v(t,1e-6) - Utilde(0)|
    double dev_v_large;   // |v(t,1e6) - U(0)|
    double dev_vy_small;  // |v_y(t,1e-6) - Utilde'(0)|
    double dev_vy_large;  // |v_y(t,1e6)|
};

// Evaluator of the dual value function v and its first two y-derivatives for
// a fixed market and dual utility.  Parameterized by time-to-maturity tau;
// calendar-time accessors map through tau = T - t.  Immutable and pure, safe
// to share across threads.
class DualValueSurface {
  public:
    static constexpr double kTerminalAlpha = 1e-6;

    static DualValueSurface piecewise_closed_form(const MarketModel& m,
                                                  const PiecewiseLinearUtility& u);
    static DualValueSurface piecewise_quadrature(const MarketModel& m,
                                                 const PiecewiseLinearUtility& u, Regime regime);
    static DualValueSurface capped_power_closed_form(const MarketModel& m,
                                                     const CappedPowerUtility& u);
    static DualValueSurface quadrature(const MarketModel& m,
                                       std::shared_ptr<const DualFunction> dual, Regime regime,
                                       int order = 128);

    double value_tau(double tau, double y) const;  // v
    double dy_tau(double tau, double y) const;     // v_y
    double dyy_tau(double tau, double y) const;    // v_yy

    double value(double t, double y) const { return value_tau(to_tau(t), y); }
    double dy(double t, double y) const { return dy_tau(to_tau(t), y); }
    double dyy(double t, double y) const { return dyy_tau(to_tau(t), y); }

    LimitsReport limits_report(double t) const;

    const MarketModel& market() const { return market_; }
    Regime regime() const { return regime_; }
    Backend backend() const { return backend_; }
    int order() const { return order_; }
    const DualFunction& dual() const { return *dual_; }

  private:
    DualValueSurface(MarketModel m, Regime regime, Backend backend,
                     std::shared_ptr<const DualFunction> dual, int order);

    double to_tau(double t) const {
        if (t < 0.0 || t > market_.T)
            throw std::domain_error("DualValueSurface: t outside [0, T]");
        return market_.T - t;
    }

    struct Eval {
        double v, vy, vyy;
    };
    Eval eval_closed_piecewise(double alpha, double y) const;
    Eval eval_quadrature_piecewise(double alpha, double shift, double y) const;
    Eval eval_quadrature_generic(double alpha, double shift, double y) const;
    Eval eval_capped_power(double alpha, double y) const;
    Eval eval_tau(double tau, double y, bool need_vyy) const;

    MarketModel market_;
    Regime regime_;
    Backend backend_;
    std::shared_ptr<const DualFunction> dual_;
    std::shared_ptr<const PiecewiseLinearDual> pwl_;  // set for piecewise backends
    double capped_H_ = 0.0, capped_p_ = 0.0;          // set for capped-power backend
    int order_;
};

}  // namespace dualopt
