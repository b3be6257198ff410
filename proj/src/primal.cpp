#include "dualopt/primal.hpp"

#include <cmath>
#include <stdexcept>

namespace dualopt {

PrimalValueSurface::PrimalValueSurface(std::shared_ptr<const DualValueSurface> dual,
                                       std::function<double(double)> terminal_utility,
                                       double root_tol)
    : dual_(std::move(dual)), terminal_u_(std::move(terminal_utility)), root_tol_(root_tol) {
    if (!dual_) throw std::invalid_argument("PrimalValueSurface: null dual surface");
    if (!terminal_u_) throw std::invalid_argument("PrimalValueSurface: null terminal utility");
    if (!(root_tol_ > 0.0)) throw std::invalid_argument("PrimalValueSurface: bad root tolerance");
    double slope0 = dual_->dual().slope_at_zero();
    x_star_ = std::isinf(slope0) ? std::numeric_limits<double>::infinity() : -slope0;
}

double PrimalValueSurface::y_of_x_tau(double tau, double x, double hint, bool* clamped) const {
    if (!(tau > 0.0)) throw std::domain_error("y_of_x: requires tau > 0");
    if (!(x > 0.0)) throw std::domain_error("y_of_x: requires x > 0");
    if (x >= x_star_)
        throw std::domain_error("y_of_x: x at or beyond the constant-value threshold");
    if (clamped) *clamped = false;

    auto g = [&](double s) { return dual_->dy_tau(tau, std::exp(s)) + x; };
    const double tol = root_tol_ * (1.0 + x);
    const double s_min = std::log(kYBracketLo), s_max = std::log(kYBracketHi);

    // Warm start: damped Newton from the hint, g' = v_yy * y on the log scale.
    if (hint > 0.0 && std::isfinite(hint)) {
        double s = std::log(std::min(std::max(hint, kYBracketLo), kYBracketHi));
        for (int it = 0; it < 8; ++it) {
            double y = std::exp(s);
            double gv = dual_->dy_tau(tau, y) + x;
            if (std::abs(gv) <= tol) return y;
            double gp = dual_->dyy_tau(tau, y) * y;
            if (!(gp > 0.0)) break;
            double ds = gv / gp;
            if (std::abs(ds) > 2.0) break;  // hint is stale, fall back
            s -= ds;
            if (s < s_min || s > s_max) break;
        }
    }

    // Expanding bracket: g is increasing (v strictly convex), g(-inf) = x - x_star < 0.
    double s_lo = -1.0, s_hi = 1.0;
    double step = 1.0;
    while (g(s_lo) >= 0.0) {
        s_lo -= step;
        step *= 2.0;
        if (s_lo < s_min) {
            if (g(s_min) >= 0.0)
                throw std::runtime_error("y_of_x: no sign change down to y = 1e-12");
            s_lo = s_min;
            break;
        }
    }
    step = 1.0;
    while (g(s_hi) <= 0.0) {
        s_hi += step;
        step *= 2.0;
        if (s_hi > s_max) {
            if (g(s_max) <= 0.0) {
                // v_y stays below -x all the way to the bracket top: x is in
                // the clamp region near zero wealth.
                if (clamped) *clamped = true;
                return kYBracketHi;
            }
            s_hi = s_max;
            break;
        }
    }

    // Bisection to a coarse interval, then Newton with the analytic v_yy.
    double best_s = 0.5 * (s_lo + s_hi);
    double best_abs = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 200 && s_hi - s_lo > 1e-3; ++it) {
        double mid = 0.5 * (s_lo + s_hi);
        double gm = g(mid);
        if (std::abs(gm) < best_abs) {
            best_abs = std::abs(gm);
            best_s = mid;
        }
        if (gm < 0.0)
            s_lo = mid;
        else
            s_hi = mid;
    }
    double s = 0.5 * (s_lo + s_hi);
    for (int it = 0; it < 5; ++it) {
        double y = std::exp(s);
        double gv = dual_->dy_tau(tau, y) + x;
        if (std::abs(gv) < best_abs) {
            best_abs = std::abs(gv);
            best_s = s;
        }
        if (std::abs(gv) <= tol) return y;
        if (gv < 0.0)
            s_lo = s;
        else
            s_hi = s;
        double gp = dual_->dyy_tau(tau, y) * y;
        double s_newton = s - gv / gp;
        s = (gp > 0.0 && s_newton > s_lo && s_newton < s_hi) ? s_newton : 0.5 * (s_lo + s_hi);
    }
    // Polish by bisection until the interval is exhausted.
    for (int it = 0; it < 200 && s_hi - s_lo > 4e-16 * (1.0 + std::abs(s_lo)); ++it) {
        double mid = 0.5 * (s_lo + s_hi);
        double gm = g(mid);
        if (std::abs(gm) < best_abs) {
            best_abs = std::abs(gm);
            best_s = mid;
        }
        if (std::abs(gm) <= tol) return std::exp(mid);
        if (gm < 0.0)
            s_lo = mid;
        else
            s_hi = mid;
    }
    return std::exp(best_s);
}

double PrimalValueSurface::value_tau(double tau, double x) const {
    if (x < 0.0) throw std::domain_error("u: x must be >= 0");
    KernelParams kp = kernel_params(dual_->market(), tau, dual_->regime());
    if (kp.alpha < DualValueSurface::kTerminalAlpha) return terminal_u_(x);
    if (x >= x_star_) return dual_->dual().value_at_zero();
    if (x == 0.0) return dual_->dual().limit_at_infinity();
    double y = y_of_x_tau(tau, x);
    return dual_->value_tau(tau, y) + x * y;
}

double PrimalValueSurface::dx_tau(double tau, double x) const { return y_of_x_tau(tau, x); }

double PrimalValueSurface::dxx_tau(double tau, double x) const {
    double y = y_of_x_tau(tau, x);
    return -1.0 / dual_->dyy_tau(tau, y);
}

double PrimalValueSurface::feedback_control_tau(double tau, double x) const {
    if (!(x > 0.0)) throw std::domain_error("feedback_control: x must be > 0");
    if (x >= x_star_) return 0.0;
    const MarketModel& m = dual_->market();
    double y = y_of_x_tau(tau, x);
    return (m.effective_theta() / m.sigma) * y * dual_->dyy_tau(tau, y) / x;
}

double PrimalValueSurface::risky_amount_tau(double tau, double x) const {
    if (!(tau > 0.0)) throw std::domain_error("risky_amount: tau must be > 0");
    if (!(x > 0.0)) throw std::domain_error("risky_amount: x must be > 0");
    if (x >= x_star_) return 0.0;
    const MarketModel& m = dual_->market();
    double y = y_of_x_tau(tau, x);
    return (m.effective_theta() / m.sigma) * y * dual_->dyy_tau(tau, y);
}

}  // namespace dualopt
