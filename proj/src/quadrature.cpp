#include "lambert/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "lambert/sh.hpp"

namespace lambert {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GaussRule gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    // Tricomi initial guess, then Newton.
    double x = std::cos(kPi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 1; k < order; ++k) {
        const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
      }
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

double integrate_sphere(const std::function<double(const Vec3&)>& f,
                        int theta_nodes, int phi_nodes) {
  const GaussRule rule = gauss_legendre(theta_nodes);
  const double dphi = 2.0 * kPi / phi_nodes;
  double total = 0.0;
  for (int i = 0; i < theta_nodes; ++i) {
    const double ct = rule.nodes[i];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double ring = 0.0;
    for (int j = 0; j < phi_nodes; ++j) {
      const double phi = (j + 0.5) * dphi;
      ring += f({st * std::cos(phi), st * std::sin(phi), ct});
    }
    total += rule.weights[i] * ring * dphi;
  }
  return total;
}

double integrate_hemisphere(const Vec3& axis,
                            const std::function<double(const Vec3&)>& f,
                            int theta_nodes, int phi_nodes) {
  const Vec3 n = normalized(axis);
  const auto [t0, t1] = orthonormal_tangents(n);
  const GaussRule rule = gauss_legendre(theta_nodes);
  const double dphi = 2.0 * kPi / phi_nodes;
  double total = 0.0;
  for (int i = 0; i < theta_nodes; ++i) {
    const double ct = 0.5 * (rule.nodes[i] + 1.0);  // map to [0,1]
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    double ring = 0.0;
    for (int j = 0; j < phi_nodes; ++j) {
      const double phi = (j + 0.5) * dphi;
      const Vec3 dir = st * std::cos(phi) * t0 + st * std::sin(phi) * t1 + ct * n;
      ring += f(dir);
    }
    total += 0.5 * rule.weights[i] * ring * dphi;
  }
  return total;
}

}  // namespace lambert
