#include "dualopt/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dualopt/normal.hpp"

namespace dualopt {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.7724538509055160273;
}  // namespace

// Newton iteration on the orthonormal Hermite recurrence; weights are the
// Christoffel numbers 1 / sum_k p_k(x)^2.
GaussHermiteRule::GaussHermiteRule(int order) {
    if (order < 1 || order > 1024) throw std::invalid_argument("GaussHermiteRule: bad order");
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);

    // p_n(x), p_{n-1}(x) and sum of squares of p_0..p_{n-1}.
    auto eval = [order](double x, double& pn, double& pnm1, double& sum_sq) {
        double pm1 = 0.0;
        double p = std::pow(kPi, -0.25);
        sum_sq = p * p;
        for (int k = 0; k < order; ++k) {
            double pnew = x * std::sqrt(2.0 / (k + 1)) * p -
                          std::sqrt(static_cast<double>(k) / (k + 1)) * pm1;
            pm1 = p;
            p = pnew;
            if (k + 1 < order) sum_sq += p * p;
        }
        pn = p;
        pnm1 = pm1;
    };

    const int half = (order + 1) / 2;
    std::vector<double> found;  // positive roots, descending
    double z = 0.0;
    for (int i = 0; i < half; ++i) {
        if (i == 0) {
            z = std::sqrt(2.0 * order + 1.0) - 1.85575 * std::pow(2.0 * order + 1.0, -1.0 / 6.0);
        } else if (i == 1) {
            z -= 1.14 * std::pow(static_cast<double>(order), 0.426) / z;
        } else if (i == 2) {
            z = 1.86 * z - 0.86 * found[0];
        } else if (i == 3) {
            z = 1.91 * z - 0.91 * found[1];
        } else {
            z = 2.0 * z - found[i - 2];
        }
        double pn = 0.0, pnm1 = 0.0, sum_sq = 0.0;
        for (int it = 0; it < 100; ++it) {
            eval(z, pn, pnm1, sum_sq);
            double deriv = std::sqrt(2.0 * order) * pnm1;
            double dz = pn / deriv;
            z -= dz;
            if (std::abs(dz) < 1e-15 * (1.0 + std::abs(z))) break;
        }
        eval(z, pn, pnm1, sum_sq);
        found.push_back(z);
        double w = 1.0 / sum_sq;
        nodes[order - 1 - i] = z;
        weights[order - 1 - i] = w;
        nodes[i] = -z;
        weights[i] = w;
    }
    if (order % 2 == 1) nodes[order / 2] = 0.0;
}

GaussLegendreRule::GaussLegendreRule(int order) {
    if (order < 1 || order > 256) throw std::invalid_argument("GaussLegendreRule: bad order");
    nodes.assign(order, 0.0);
    weights.assign(order, 0.0);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 0; k < order; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1.0);
            }
            pp = order * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        nodes[i] = -z;
        nodes[order - 1 - i] = z;
        weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[order - 1 - i] = weights[i];
    }
}

GaussianSegmentMoments gaussian_segment_moments(double a, double b, double s) {
    // Complete the square: e^{sz} phi(z) = e^{s^2/2} phi(z - s).
    const double scale = std::exp(0.5 * s * s);
    const double as = a - s, bs = b - s;
    auto pdf = [](double x) {
        if (std::isinf(x)) return 0.0;
        return norm_pdf(x);
    };
    auto xpdf = [&pdf](double x) { return std::isinf(x) ? 0.0 : x * pdf(x); };

    double dPhi = norm_cdf_diff(as, bs);
    double i0 = dPhi;                        // int phi
    double i1 = pdf(as) - pdf(bs);           // int w phi
    double i2 = dPhi + xpdf(as) - xpdf(bs);  // int w^2 phi
    GaussianSegmentMoments m;
    m.m0 = scale * i0;
    m.m1 = scale * (i1 + s * i0);
    m.m2 = scale * (i2 + 2.0 * s * i1 + s * s * i0);
    return m;
}

WeightedKernelMoments gaussian_expectation(const std::function<double(double)>& f,
                                           const std::vector<double>& split_points,
                                           int gh_order, double z_max) {
    WeightedKernelMoments out{0.0, 0.0, 0.0};
    if (split_points.empty()) {
        static thread_local int cached_order = -1;
        static thread_local GaussHermiteRule* cached = nullptr;
        if (cached_order != gh_order) {
            delete cached;
            cached = new GaussHermiteRule(gh_order);
            cached_order = gh_order;
        }
        const GaussHermiteRule& gh = *cached;
        const double sqrt2 = std::sqrt(2.0);
        for (std::size_t i = 0; i < gh.nodes.size(); ++i) {
            double z = sqrt2 * gh.nodes[i];
            double w = gh.weights[i] / kSqrtPi;
            double v = f(z);
            out.plain += w * v;
            out.linear += w * z * v;
            out.quadratic += w * (z * z - 1.0) * v;
        }
        return out;
    }

    // Kinked integrand: composite Gauss-Legendre between split points on a
    // truncated z-range, sub-panels short enough to resolve the Gaussian.
    static thread_local GaussLegendreRule gl(24);
    std::vector<double> edges;
    edges.push_back(-z_max);
    for (double s : split_points)
        if (s > -z_max && s < z_max) edges.push_back(s);
    edges.push_back(z_max);
    std::sort(edges.begin(), edges.end());

    const double max_panel = 0.5;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        double lo = edges[e], hi = edges[e + 1];
        if (hi - lo < 1e-14) continue;
        int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
        double step = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            double a = lo + p * step, b = a + step;
            double mid = 0.5 * (a + b), rad = 0.5 * (b - a);
            for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
                double z = mid + rad * gl.nodes[i];
                double w = rad * gl.weights[i] * norm_pdf(z);
                double v = f(z);
                out.plain += w * v;
                out.linear += w * z * v;
                out.quadratic += w * (z * z - 1.0) * v;
            }
        }
    }
    return out;
}

}  // namespace dualopt
