#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

namespace dualopt {

// Increasing concave piecewise-linear utility with a finite bound.
//
// Segments: on [x_i, x_{i+1}) the value is c_{i+1} x + d_{i+1},
// with x_0 = 0, x_{N+1} = inf, slopes c_1 > ... > c_N > c_{N+1} = 0.
// The terminal level d_{N+1} = U(inf) anchors the intercept chain; all other
// d_i follow from continuity at the breakpoints.
class PiecewiseLinearUtility {
  public:
    static constexpr std::size_t kMaxPieces = 64;

    PiecewiseLinearUtility(std::vector<double> breakpoints, std::vector<double> slopes,
                           double terminal_level);

    static PiecewiseLinearUtility capped(double H);

    double operator()(double x) const;

    std::size_t segments() const { return breakpoints_.size(); }  // N
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    const std::vector<double>& slopes() const { return slopes_; }
    // intercepts d_1 .. d_{N+1}
    const std::vector<double>& intercepts() const { return intercepts_; }
    double value_at_zero() const { return intercepts_.front(); }
    double value_at_infinity() const { return intercepts_.back(); }

  private:
    std::vector<double> breakpoints_;  // x_1 .. x_N
    std::vector<double> slopes_;       // c_1 .. c_N   (c_{N+1} = 0 implicit)
    std::vector<double> intercepts_;   // d_1 .. d_{N+1}
};

struct CappedUtility {
    double H;

    explicit CappedUtility(double H_) : H(H_) {
        if (!(H > 0.0)) throw std::invalid_argument("CappedUtility: H must be > 0");
    }
    double operator()(double x) const {
        if (x < 0.0) throw std::domain_error("CappedUtility: x must be >= 0");
        return std::min(x, H);
    }
    PiecewiseLinearUtility to_piecewise() const { return PiecewiseLinearUtility::capped(H); }
};

// U(x) = x on [0, H), H (x/H)^p beyond: wealth up to the kink, scaled power after.
struct CappedPowerUtility {
    double H;
    double p;

    CappedPowerUtility(double H_, double p_) : H(H_), p(p_) {
        if (!(H > 0.0)) throw std::invalid_argument("CappedPowerUtility: H must be > 0");
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("CappedPowerUtility: p must lie in (0, 1)");
    }
    double operator()(double x) const {
        if (x < 0.0) throw std::domain_error("CappedPowerUtility: x must be >= 0");
        return x < H ? x : H * std::pow(x / H, p);
    }
};

// Concave increasing utility that behaves like k x^p for x >= switch_x.
// The inner part below the switch point is arbitrary user data; shift is an
// additive constant so affine rescales stay representable.
class PowerTailUtility {
  public:
    PowerTailUtility(double p, double k, double switch_x,
                     std::function<double(double)> inner,
                     std::vector<double> dual_kink_hints = {}, double shift = 0.0);

    // U(x) = x below switch_x, continuous power tail above (k = switch_x^(1-p)).
    static PowerTailUtility linear_then_power(double p, double switch_x);
    // U(x) = k x^p everywhere.
    static PowerTailUtility pure_power(double p, double k);

    double operator()(double x) const;

    double p() const { return p_; }
    double tail_constant() const { return k_; }
    double switch_x() const { return switch_x_; }
    double q() const { return p_ / (p_ - 1.0); }
    const std::vector<double>& dual_kink_hints() const { return dual_kink_hints_; }

    // Affine rescale a*U + b (controls are invariant under it).
    PowerTailUtility scaled(double a, double b) const;

  private:
    double p_;
    double k_;
    double switch_x_;
    std::function<double(double)> inner_;
    std::vector<double> dual_kink_hints_;
    double shift_;
};

// ---------------------------------------------------------------------------
// Dual (conjugate) functions:  Utilde(y) = sup_{x>=0} (U(x) - x y),
// decreasing and convex on (0, inf).
// ---------------------------------------------------------------------------

class DualFunction {
  public:
    virtual ~DualFunction() = default;

    virtual double operator()(double y) const = 0;

    // Right derivative; used as the subgradient selection at kinks.
    virtual double derivative(double y) const;

    virtual double value_at_zero() const = 0;    // Utilde(0) = U(inf), may be +inf
    virtual double slope_at_zero() const = 0;    // Utilde'(0+), may be -inf
    virtual double limit_at_infinity() const = 0;  // Utilde(inf) = U(0)

    // y-locations where the function is not smooth; quadrature splits there.
    virtual std::vector<double> kinks() const { return {}; }

    // Growth exponent hint: |Utilde(y)| <= C (1 + y^q) with q <= 0.
    virtual double growth_exponent() const { return -1.0; }
};

// Dual of a piecewise-linear utility: linear with slope -x_i on [c_{i+1}, c_i).
class PiecewiseLinearDual : public DualFunction {
  public:
    explicit PiecewiseLinearDual(const PiecewiseLinearUtility& u);

    double operator()(double y) const override;
    double derivative(double y) const override;
    double value_at_zero() const override { return ds_.back(); }
    double slope_at_zero() const override { return -xs_.back(); }
    double limit_at_infinity() const override { return ds_.front(); }
    std::vector<double> kinks() const override { return cs_; }
    double growth_exponent() const override { return 0.0; }

    // Underlying primal data, shared with the closed-form surface.
    std::size_t segments() const { return xs_.size(); }          // N
    const std::vector<double>& breakpoints() const { return xs_; }  // x_1..x_N
    const std::vector<double>& slopes() const { return cs_; }       // c_1..c_N
    const std::vector<double>& intercepts() const { return ds_; }   // d_1..d_{N+1}

    // Index i of the segment [c_{i+1}, c_i) containing y, in 0..N.
    std::size_t segment_index(double y) const;

  private:
    std::vector<double> xs_;
    std::vector<double> cs_;
    std::vector<double> ds_;
};

PiecewiseLinearDual dual_piecewise(const PiecewiseLinearUtility& u);

// Exact three-branch dual of CappedPowerUtility.
class CappedPowerDual : public DualFunction {
  public:
    CappedPowerDual(double H, double p);

    struct Point {
        double value;
        double argmax;
    };
    Point value_and_argmax(double y) const;

    double operator()(double y) const override { return value_and_argmax(y).value; }
    double derivative(double y) const override;
    double value_at_zero() const override { return std::numeric_limits<double>::infinity(); }
    double slope_at_zero() const override { return -std::numeric_limits<double>::infinity(); }
    double limit_at_infinity() const override { return 0.0; }
    std::vector<double> kinks() const override { return {p_, 1.0}; }
    double growth_exponent() const override { return p_ / (p_ - 1.0); }

    double H() const { return H_; }
    double p() const { return p_; }

  private:
    double H_;
    double p_;
};

// Utilde(y) = coef * y^q with q < 0; the dual of a pure power utility.
class PowerDual : public DualFunction {
  public:
    PowerDual(double coef, double q) : coef_(coef), q_(q) {
        if (!(q < 0.0)) throw std::invalid_argument("PowerDual: q must be < 0");
        if (!(coef > 0.0)) throw std::invalid_argument("PowerDual: coef must be > 0");
    }
    double operator()(double y) const override {
        if (y <= 0.0) throw std::domain_error("PowerDual: y must be > 0");
        return coef_ * std::pow(y, q_);
    }
    double derivative(double y) const override { return coef_ * q_ * std::pow(y, q_ - 1.0); }
    double value_at_zero() const override { return std::numeric_limits<double>::infinity(); }
    double slope_at_zero() const override { return -std::numeric_limits<double>::infinity(); }
    double limit_at_infinity() const override { return 0.0; }
    double growth_exponent() const override { return q_; }

    // Dual of U(x) = a x^p.
    static PowerDual of_power_utility(double a, double p);

  private:
    double coef_;
    double q_;
};

struct ConjugatePoint {
    double value;
    double argmax;
};

// Brute-force sup of U(x) - x y over {0} and a log-spaced grid up to xmax.
// This is the oracle every closed-form dual is checked against.
double conjugate_numeric(const std::function<double(double)>& u, double y, double xmax,
                         int grid_size);

// Grid-free conjugate: expanding geometric bracket of the (unimodal) objective
// followed by golden-section refinement.  Pointwise accurate to ~1e-12 of
// scale, which the quadrature pipeline needs where the grid oracle is too
// coarse.
ConjugatePoint conjugate_refined(const std::function<double(double)>& u, double y);

// Numeric dual of an arbitrary concave increasing utility.
class NumericDual : public DualFunction {
  public:
    NumericDual(std::function<double(double)> u, double value_at_zero_x,
                std::vector<double> kink_hints = {}, double growth_q = -1.0);

    explicit NumericDual(const PowerTailUtility& u);

    double operator()(double y) const override;
    double derivative(double y) const override;
    double value_at_zero() const override { return std::numeric_limits<double>::infinity(); }
    double slope_at_zero() const override { return -std::numeric_limits<double>::infinity(); }
    double limit_at_infinity() const override { return u_at_zero_; }
    std::vector<double> kinks() const override { return kink_hints_; }
    double growth_exponent() const override { return growth_q_; }

    ConjugatePoint point(double y) const;

  private:
    std::function<double(double)> u_;
    double u_at_zero_;
    std::vector<double> kink_hints_;
    double growth_q_;
};

// a = 1 / (p^p (1-p)^(1-p)): the scale making the dual of a x^p satisfy
// Utilde(y) / y^q -> 1 as y -> 0.
double tail_constant_for_normalized(double p);

}  // namespace dualopt
