#pragma once

#include <functional>
#include <vector>

#include "lambert/vec.hpp"

namespace lambert {

struct GaussRule {
  std::vector<double> nodes;    // in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

// Gauss-Legendre rule of the given order (Newton on P_n).
GaussRule gauss_legendre(int order);

// Integrates f over the full sphere with a Gauss-Legendre rule in cos(theta)
// and a uniform trapezoid in phi. Exact for band-limited integrands of
// trigonometric degree < phi_nodes and polynomial degree < 2*theta_nodes.
double integrate_sphere(const std::function<double(const Vec3&)>& f,
                        int theta_nodes = 64, int phi_nodes = 128);

// Integrates f over the hemisphere centered on `axis`, parameterized in a
// frame aligned with the axis so the integrand stays smooth across the rim.
double integrate_hemisphere(const Vec3& axis,
                            const std::function<double(const Vec3&)>& f,
                            int theta_nodes = 64, int phi_nodes = 128);

}  // namespace lambert
