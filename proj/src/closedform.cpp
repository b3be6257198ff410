#include "dualopt/closedform.hpp"

#include <cmath>
#include <stdexcept>

#include "dualopt/normal.hpp"

namespace dualopt {

namespace {
void check_interior(double H, double x) {
    if (!(H > 0.0)) throw std::domain_error("capped: H must be > 0");
    if (!(x > 0.0 && x < H)) throw std::domain_error("capped: x must lie in (0, H)");
}
}  // namespace

double capped_value(double H, double alpha, double x) {
    check_interior(H, x);
    if (alpha == 0.0) return x;
    return H * norm_cdf(norm_cdf_inv(x / H) + alpha);
}

double capped_control(double H, double alpha, double x, double theta_over_sigma) {
    check_interior(H, x);
    if (!(alpha > 0.0)) throw std::domain_error("capped_control: degenerate at alpha = 0");
    return theta_over_sigma * (H / (x * alpha)) * norm_pdf(norm_cdf_inv(x / H));
}

double capped_dual_point(double H, double alpha, double x) {
    check_interior(H, x);
    return std::exp(-alpha * norm_cdf_inv(x / H) - 0.5 * alpha * alpha);
}

std::pair<double, double> capped_terminal_probs(double H, double theta_sqrt_T, double x) {
    check_interior(H, x);
    double z0 = norm_cdf_inv(x / H);
    return {norm_cdf(z0 + theta_sqrt_T), norm_cdf(-z0 - theta_sqrt_T)};
}

HSensitivity capped_h_sensitivity(double H, double x, double theta_sqrt_T) {
    check_interior(H, x);
    double z0 = norm_cdf_inv(x / H);
    double a = theta_sqrt_T;
    HSensitivity s;
    s.g = H * norm_cdf(z0 + a);
    s.g_prime = norm_cdf(z0 + a) - (x / H) * std::exp(-a * z0 - 0.5 * a * a);
    return s;
}

CappedSolution::CappedSolution(double H_, const MarketModel& m) : H(H_), market(m) {
    if (!(H > 0.0)) throw std::invalid_argument("CappedSolution: H must be > 0");
}

}  // namespace dualopt
