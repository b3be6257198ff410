#pragma once

#include <cmath>
#include <stdexcept>

namespace dualopt {

enum class Constraint { Unconstrained, NoShortSelling };

// Which dual kernel the surface is built on.  Discounted folds the riskless
// rate away (log-kernel mean -alpha^2/2), WithRate keeps it
// (log-kernel mean -(r + theta^2/2) * tau).
enum class Regime { Discounted, WithRate };

struct MarketModel {
    double r;
    double mu;
    double sigma;
    double T;
    Constraint constraint;

    MarketModel(double r_, double mu_, double sigma_, double T_,
                Constraint constraint_ = Constraint::Unconstrained)
        : r(r_), mu(mu_), sigma(sigma_), T(T_), constraint(constraint_) {
        if (!(sigma > 0.0)) throw std::invalid_argument("MarketModel: sigma must be > 0");
        if (!(T > 0.0)) throw std::invalid_argument("MarketModel: T must be > 0");
        if (!(r >= 0.0)) throw std::invalid_argument("MarketModel: r must be >= 0");
        if (!(mu > r)) throw std::invalid_argument("MarketModel: mu must exceed r");
    }

    // Effective market price of risk.  For both supported cones the polar-cone
    // minimizer is 0 when mu > r, so this is just the Sharpe ratio.
    double effective_theta() const { return (mu - r) / sigma; }

    // Variance budget over [t, T] for constant coefficients.
    double alpha(double t) const {
        if (t < 0.0 || t > T) throw std::domain_error("alpha: t outside [0, T]");
        return effective_theta() * std::sqrt(T - t);
    }

    double alpha_tau(double tau) const {
        if (tau < 0.0) throw std::domain_error("alpha_tau: tau must be >= 0");
        return effective_theta() * std::sqrt(tau);
    }
};

// Log-normal kernel of the dual state at time-to-maturity tau:
// ln Y_T ~ Normal(ln y + drift_shift, alpha^2).
struct KernelParams {
    double tau;
    double alpha;
    double drift_shift;
};

inline KernelParams kernel_params(const MarketModel& m, double tau, Regime regime) {
    if (tau < 0.0) throw std::domain_error("kernel_params: tau must be >= 0");
    double theta = m.effective_theta();
    double alpha = theta * std::sqrt(tau);
    double shift = regime == Regime::Discounted ? -0.5 * alpha * alpha
                                                : -(m.r + 0.5 * theta * theta) * tau;
    return KernelParams{tau, alpha, shift};
}

}  // namespace dualopt
