#pragma once

#include <functional>
#include <memory>

#include "dualopt/dualvalue.hpp"

namespace dualopt {

// Primal value surface reconstructed from a dual surface by Legendre
// inversion: u(t,x) = v(t, y(t,x)) + x y(t,x) with v_y(t, y(t,x)) + x = 0,
// u_x = y, u_xx = -1/v_yy.  Constant at Utilde(0) beyond the threshold
// x_star = -Utilde'(0).  Pure evaluation, root-finder state is per call.
class PrimalValueSurface {
  public:
    static constexpr double kYBracketLo = 1e-12;
    static constexpr double kYBracketHi = 1e12;

    PrimalValueSurface(std::shared_ptr<const DualValueSurface> dual,
                       std::function<double(double)> terminal_utility, double root_tol = 1e-11);

    double x_star() const { return x_star_; }
    const DualValueSurface& dual_surface() const { return *dual_; }

    // Unique root of v_y(tau, y) + x = 0.  A finite hint warm-starts Newton.
    // If v_y never reaches -x within the bracket (x near 0), the evaluation is
    // clamped at the upper bracket end and flagged through *clamped.
    double y_of_x_tau(double tau, double x, double hint = 0.0, bool* clamped = nullptr) const;
    double y_of_x(double t, double x) const { return y_of_x_tau(to_tau(t), x); }

    double value_tau(double tau, double x) const;  // u
    double value(double t, double x) const { return value_tau(to_tau(t), x); }

    double dx_tau(double tau, double x) const;  // u_x
    double dx(double t, double x) const { return dx_tau(to_tau(t), x); }
    double dxx_tau(double tau, double x) const;  // u_xx
    double dxx(double t, double x) const { return dxx_tau(to_tau(t), x); }

    // pi*(t,x) = -(theta/sigma) u_x / (x u_xx); zero at and beyond x_star.
    double feedback_control_tau(double tau, double x) const;
    double feedback_control(double t, double x) const {
        return feedback_control_tau(to_tau(t), x);
    }

    // A(tau,x) = -(theta/sigma) u_x / u_xx = (theta/sigma) y v_yy.
    double risky_amount_tau(double tau, double x) const;

  private:
    double to_tau(double t) const {
        const MarketModel& m = dual_->market();
        if (t < 0.0 || t > m.T) throw std::domain_error("PrimalValueSurface: t outside [0, T]");
        return m.T - t;
    }

    std::shared_ptr<const DualValueSurface> dual_;
    std::function<double(double)> terminal_u_;
    double x_star_;
    double root_tol_;
};

}  // namespace dualopt
