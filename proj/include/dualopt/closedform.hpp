#pragma once

#include <utility>

#include "dualopt/market.hpp"

namespace dualopt {

// Exact solution of the terminal-wealth problem capped at H, discounted
// regime: value, feedback control, dual point, terminal-wealth law and the
// sensitivity of the time-0 value to the cap level.

// u(t,x) = H Phi(Phi^{-1}(x/H) + alpha)
double capped_value(double H, double alpha, double x);

// pi(t,x) = (theta/sigma) (H / (x alpha)) phi(Phi^{-1}(x/H))
double capped_control(double H, double alpha, double x, double theta_over_sigma);

// y(t,x) = exp(-alpha Phi^{-1}(x/H) - alpha^2/2)
double capped_dual_point(double H, double alpha, double x);

// (P{X_T = H}, P{X_T = 0}) = (Phi(Z0 + theta sqrt(T)), Phi(-Z0 - theta sqrt(T)))
std::pair<double, double> capped_terminal_probs(double H, double theta_sqrt_T, double x);

struct HSensitivity {
    double g;        // g(H)  = H Phi(Phi^{-1}(x/H) + theta sqrt(T))
    double g_prime;  // g'(H) = Phi(.) - (x/H) exp(-theta sqrt(T) Phi^{-1}(x/H) - theta^2 T / 2)
};
HSensitivity capped_h_sensitivity(double H, double x, double theta_sqrt_T);

// Convenience bundle tying the formulas to a market clock.
struct CappedSolution {
    double H;
    MarketModel market;

    CappedSolution(double H_, const MarketModel& m);

    double value(double t, double x) const { return capped_value(H, market.alpha(t), x); }
    double control(double t, double x) const {
        return capped_control(H, market.alpha(t), x, market.effective_theta() / market.sigma);
    }
    double dual_point(double t, double x) const {
        return capped_dual_point(H, market.alpha(t), x);
    }
    std::pair<double, double> terminal_probs(double x) const {
        return capped_terminal_probs(H, market.alpha(0.0), x);
    }
};

}  // namespace dualopt
