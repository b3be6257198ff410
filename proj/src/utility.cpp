#include "dualopt/utility.hpp"

#include <algorithm>
#include <cmath>

namespace dualopt {

// ---------------------------------------------------------------------------
// PiecewiseLinearUtility
// ---------------------------------------------------------------------------

PiecewiseLinearUtility::PiecewiseLinearUtility(std::vector<double> breakpoints,
                                               std::vector<double> slopes,
                                               double terminal_level)
    : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
    const std::size_t n = breakpoints_.size();
    if (n == 0) throw std::invalid_argument("PiecewiseLinearUtility: need at least one breakpoint");
    if (n > kMaxPieces)
        throw std::invalid_argument("PiecewiseLinearUtility: too many breakpoints");
    if (slopes_.size() != n)
        throw std::invalid_argument("PiecewiseLinearUtility: slopes/breakpoints size mismatch");
    if (!std::isfinite(terminal_level))
        throw std::invalid_argument("PiecewiseLinearUtility: terminal level must be finite");

    double prev_x = 0.0;
    for (double x : breakpoints_) {
        if (!(x > prev_x) || !std::isfinite(x))
            throw std::invalid_argument("PiecewiseLinearUtility: breakpoints must be ascending and > 0");
        prev_x = x;
    }
    double prev_c = std::numeric_limits<double>::infinity();
    for (double c : slopes_) {
        if (!(c > 0.0) || !(c < prev_c) || !std::isfinite(c))
            throw std::invalid_argument("PiecewiseLinearUtility: slopes must be strictly decreasing and > 0");
        prev_c = c;
    }

    // d_i = d_{i+1} + (c_{i+1} - c_i) x_i, marching down from d_{N+1}.
    intercepts_.assign(n + 1, 0.0);
    intercepts_[n] = terminal_level;
    for (std::size_t i = n; i-- > 0;) {
        double c_next = (i + 1 < n) ? slopes_[i + 1] : 0.0;
        intercepts_[i] = intercepts_[i + 1] + (c_next - slopes_[i]) * breakpoints_[i];
    }
}

PiecewiseLinearUtility PiecewiseLinearUtility::capped(double H) {
    if (!(H > 0.0)) throw std::invalid_argument("capped: H must be > 0");
    return PiecewiseLinearUtility({H}, {1.0}, H);
}

double PiecewiseLinearUtility::operator()(double x) const {
    if (x < 0.0) throw std::domain_error("PiecewiseLinearUtility: x must be >= 0");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t seg = static_cast<std::size_t>(it - breakpoints_.begin());
    double slope = seg < slopes_.size() ? slopes_[seg] : 0.0;
    return slope * x + intercepts_[seg];
}

// ---------------------------------------------------------------------------
// PowerTailUtility
// ---------------------------------------------------------------------------

PowerTailUtility::PowerTailUtility(double p, double k, double switch_x,
                                   std::function<double(double)> inner,
                                   std::vector<double> dual_kink_hints, double shift)
    : p_(p), k_(k), switch_x_(switch_x), inner_(std::move(inner)),
      dual_kink_hints_(std::move(dual_kink_hints)), shift_(shift) {
    if (!(p_ > 0.0 && p_ < 1.0))
        throw std::invalid_argument("PowerTailUtility: p must lie in (0, 1)");
    if (!(k_ > 0.0)) throw std::invalid_argument("PowerTailUtility: k must be > 0");
    if (!(switch_x_ >= 0.0))
        throw std::invalid_argument("PowerTailUtility: switch point must be >= 0");
}

PowerTailUtility PowerTailUtility::linear_then_power(double p, double switch_x) {
    if (!(switch_x > 0.0))
        throw std::invalid_argument("linear_then_power: switch point must be > 0");
    double k = std::pow(switch_x, 1.0 - p);
    // Identity below the switch point; the dual picks up a derivative kink at
    // y = 1 (= inner slope at 0) and a curvature jump at y = p k switch^(p-1).
    double upper = p * k * std::pow(switch_x, p - 1.0);
    return PowerTailUtility(p, k, switch_x, [](double x) { return x; }, {upper, 1.0});
}

PowerTailUtility PowerTailUtility::pure_power(double p, double k) {
    return PowerTailUtility(p, k, 0.0, {}, {});
}

double PowerTailUtility::operator()(double x) const {
    if (x < 0.0) throw std::domain_error("PowerTailUtility: x must be >= 0");
    if (x >= switch_x_) return shift_ + k_ * std::pow(x, p_);
    return shift_ + inner_(x);
}

PowerTailUtility PowerTailUtility::scaled(double a, double b) const {
    if (!(a > 0.0)) throw std::invalid_argument("scaled: a must be > 0");
    auto inner = inner_;
    std::vector<double> hints;
    hints.reserve(dual_kink_hints_.size());
    // sup(aU + b - xy) = a sup(U - x (y/a)) + b: kinks move to a * y.
    for (double y : dual_kink_hints_) hints.push_back(a * y);
    return PowerTailUtility(
        p_, a * k_, switch_x_,
        inner ? std::function<double(double)>([inner, a](double x) { return a * inner(x); })
              : std::function<double(double)>(),
        std::move(hints), a * shift_ + b);
}

// ---------------------------------------------------------------------------
// DualFunction
// ---------------------------------------------------------------------------

double DualFunction::derivative(double y) const {
    if (y <= 0.0) throw std::domain_error("DualFunction::derivative: y must be > 0");
    double h = 1e-7 * std::max(y, 1e-30);
    return ((*this)(y + h) - (*this)(y)) / h;
}

PiecewiseLinearDual::PiecewiseLinearDual(const PiecewiseLinearUtility& u)
    : xs_(u.breakpoints()), cs_(u.slopes()), ds_(u.intercepts()) {}

std::size_t PiecewiseLinearDual::segment_index(double y) const {
    // segment i covers [c_{i+1}, c_i); slopes are descending so scan works
    // (N <= 64 keeps this cheap).
    std::size_t n = cs_.size();
    for (std::size_t i = 0; i < n; ++i)
        if (y >= cs_[i]) return i;
    return n;
}

double PiecewiseLinearDual::operator()(double y) const {
    if (y < 0.0) throw std::domain_error("PiecewiseLinearDual: y must be >= 0");
    std::size_t i = segment_index(y);
    double x_i = i == 0 ? 0.0 : xs_[i - 1];
    double c_next = i < cs_.size() ? cs_[i] : 0.0;
    return -x_i * y + c_next * x_i + ds_[i];
}

double PiecewiseLinearDual::derivative(double y) const {
    if (y < 0.0) throw std::domain_error("PiecewiseLinearDual: y must be >= 0");
    std::size_t i = segment_index(y);
    return i == 0 ? 0.0 : -xs_[i - 1];
}

PiecewiseLinearDual dual_piecewise(const PiecewiseLinearUtility& u) {
    return PiecewiseLinearDual(u);
}

// ---------------------------------------------------------------------------
// CappedPowerDual
// ---------------------------------------------------------------------------

CappedPowerDual::CappedPowerDual(double H, double p) : H_(H), p_(p) {
    if (!(H > 0.0)) throw std::invalid_argument("CappedPowerDual: H must be > 0");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("CappedPowerDual: p must lie in (0, 1)");
}

CappedPowerDual::Point CappedPowerDual::value_and_argmax(double y) const {
    if (y <= 0.0) throw std::domain_error("CappedPowerDual: y must be > 0");
    if (y >= 1.0) return {0.0, 0.0};
    if (y > p_) return {H_ * (1.0 - y), H_};
    double xstar = H_ * std::pow(y / p_, 1.0 / (p_ - 1.0));
    double value = H_ * ((1.0 - p_) / p_) * std::pow(p_, 1.0 / (1.0 - p_)) *
                   std::pow(y, p_ / (p_ - 1.0));
    return {value, xstar};
}

double CappedPowerDual::derivative(double y) const {
    if (y <= 0.0) throw std::domain_error("CappedPowerDual: y must be > 0");
    if (y >= 1.0) return 0.0;
    if (y > p_) return -H_;
    return -H_ * std::pow(y / p_, 1.0 / (p_ - 1.0));
}

// ---------------------------------------------------------------------------
// PowerDual
// ---------------------------------------------------------------------------

PowerDual PowerDual::of_power_utility(double a, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("of_power_utility: p must lie in (0, 1)");
    if (!(a > 0.0)) throw std::invalid_argument("of_power_utility: a must be > 0");
    double q = p / (p - 1.0);
    // sup_x (a x^p - x y) = -(1/q) (p a)^(-1/(p-1)) y^q
    double coef = -std::pow(p * a, -1.0 / (p - 1.0)) / q;
    return PowerDual(coef, q);
}

// ---------------------------------------------------------------------------
// Numeric conjugation
// ---------------------------------------------------------------------------

double conjugate_numeric(const std::function<double(double)>& u, double y, double xmax,
                         int grid_size) {
    if (y <= 0.0) throw std::domain_error("conjugate_numeric: y must be > 0");
    if (!(xmax > 0.0) || grid_size < 2)
        throw std::invalid_argument("conjugate_numeric: bad grid");
    // The log-spaced grid only depends on (xmax, n); rebuilding it dominates
    // repeated oracle sweeps, so cache the last one.
    static thread_local std::vector<double> grid;
    static thread_local double cached_xmax = -1.0;
    static thread_local int cached_n = -1;
    if (cached_xmax != xmax || cached_n != grid_size) {
        grid.resize(grid_size);
        double ln_lo = std::log(xmax * 1e-6);
        double ln_hi = std::log(xmax);
        for (int i = 0; i < grid_size; ++i)
            grid[i] = std::exp(ln_lo + (ln_hi - ln_lo) * i / (grid_size - 1));
        cached_xmax = xmax;
        cached_n = grid_size;
    }
    double best = u(0.0);
    for (double x : grid) best = std::max(best, u(x) - x * y);
    return best;
}

ConjugatePoint conjugate_refined(const std::function<double(double)>& u, double y) {
    if (y <= 0.0) throw std::domain_error("conjugate_refined: y must be > 0");
    auto g = [&](double x) { return u(x) - x * y; };

    const double g0 = g(0.0);

    // Expand a geometric bracket [lo, hi] around a point beating both ends.
    // g is concave in x, so unimodality makes this safe.
    double mid = 1.0, lo = 0.5, hi = 2.0;
    double gm = g(mid), gl = g(lo), gh = g(hi);
    while (gh > gm) {
        lo = mid; gl = gm;
        mid = hi; gm = gh;
        hi *= 4.0;
        if (hi > 1e300) throw std::runtime_error("conjugate_refined: maximizer escaped to +inf");
        gh = g(hi);
    }
    while (gl >= gm) {
        hi = mid; gh = gm;
        mid = lo; gm = gl;
        lo *= 0.25;
        if (lo < 1e-14) {
            // Monotone decreasing from the origin: boundary maximum at x = 0.
            if (g0 >= gm) return {g0, 0.0};
            break;
        }
        gl = g(lo);
    }

    // Golden-section on [lo, hi].
    const double gr = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = g(x1), f2 = g(x2);
    for (int it = 0; it < 120 && (b - a) > 1e-13 * (1.0 + b); ++it) {
        if (f1 < f2) {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + gr * (b - a); f2 = g(x2);
        } else {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - gr * (b - a); f1 = g(x1);
        }
    }
    double xs = f1 > f2 ? x1 : x2;
    double vs = std::max(f1, f2);
    if (g0 > vs) return {g0, 0.0};
    return {vs, xs};
}

NumericDual::NumericDual(std::function<double(double)> u, double value_at_zero_x,
                         std::vector<double> kink_hints, double growth_q)
    : u_(std::move(u)), u_at_zero_(value_at_zero_x), kink_hints_(std::move(kink_hints)),
      growth_q_(growth_q) {}

NumericDual::NumericDual(const PowerTailUtility& u)
    : NumericDual([u](double x) { return u(x); }, u(0.0), u.dual_kink_hints(), u.q()) {}

ConjugatePoint NumericDual::point(double y) const { return conjugate_refined(u_, y); }

double NumericDual::operator()(double y) const { return point(y).value; }

double NumericDual::derivative(double y) const {
    // Envelope theorem: d/dy sup_x (U(x) - x y) = -x*(y).
    return -point(y).argmax;
}

double tail_constant_for_normalized(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::domain_error("tail_constant_for_normalized: p must lie in (0, 1)");
    return 1.0 / (std::pow(p, p) * std::pow(1.0 - p, 1.0 - p));
}

}  // namespace dualopt
