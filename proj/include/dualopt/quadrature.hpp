#pragma once

#include <functional>
#include <vector>

namespace dualopt {

// Nodes/weights for integral of f(x) e^{-x^2} dx over the real line.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussHermiteRule(int order);
};

// Nodes/weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendreRule(int order);
};

// First three Gaussian moments against the standard normal density:
//   m0 = int_a^b e^{s z} phi(z) dz
//   m1 = int_a^b z e^{s z} phi(z) dz
//   m2 = int_a^b z^2 e^{s z} phi(z) dz
// Infinite endpoints are handled.  Used for exact integration of piecewise
// linear terminal data against the log-normal kernel.
struct GaussianSegmentMoments {
    double m0, m1, m2;
};
GaussianSegmentMoments gaussian_segment_moments(double a, double b, double s);

// E[f(Z) w(Z)] for Z standard normal and w in {1, z, z^2 - 1}, accumulated in
// one sweep.  If split points are given the line is integrated piecewise with
// composite Gauss-Legendre panels (robust to kinks of f); otherwise a single
// Gauss-Hermite rule of the requested order is used.
struct WeightedKernelMoments {
    double plain;       // E[f]
    double linear;      // E[Z f]
    double quadratic;   // E[(Z^2 - 1) f]
};
WeightedKernelMoments gaussian_expectation(const std::function<double(double)>& f,
                                           const std::vector<double>& split_points,
                                           int gh_order, double z_max);

}  // namespace dualopt
