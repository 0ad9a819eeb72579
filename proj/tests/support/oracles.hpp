#pragma once

// Independent oracles for the test suite. Everything here is deliberately
// slow and direct: Rodrigues-style polynomial evaluation instead of
// recurrences, quadrature instead of closed forms, finite differences
// instead of analytic Jacobians.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "lambert/quadrature.hpp"
#include "lambert/vec.hpp"

namespace oracles {

// P_l(x) from the Rodrigues formula: expand (x^2-1)^l, differentiate the
// coefficient array l times, evaluate, scale by 1/(2^l l!).
inline std::vector<double> rodrigues_poly(int l, int derivatives) {
  // coefficients of (x^2 - 1)^l, degree 2l
  std::vector<double> coeff(2 * l + 1, 0.0);
  coeff[0] = 1.0;
  for (int k = 0; k < l; ++k) {  // multiply by (x^2 - 1)
    std::vector<double> next(coeff.size(), 0.0);
    for (int d = 0; d <= 2 * k; ++d) {
      next[d + 2] += coeff[d];
      next[d] -= coeff[d];
    }
    coeff = next;
  }
  for (int d = 0; d < derivatives; ++d) {
    std::vector<double> next(coeff.size() - 1, 0.0);
    for (std::size_t i = 1; i < coeff.size(); ++i) next[i - 1] = coeff[i] * static_cast<double>(i);
    if (next.empty()) next.push_back(0.0);
    coeff = next;
  }
  return coeff;
}

inline double eval_poly(const std::vector<double>& coeff, double x) {
  double value = 0.0;
  for (std::size_t i = coeff.size(); i-- > 0;) value = value * x + coeff[i];
  return value;
}

// P_l^m(x) = (-1)^m (1-x^2)^{m/2} d^m/dx^m P_l(x), Condon-Shortley included.
inline double assoc_legendre(int l, int m, double x) {
  double scale = 1.0;
  for (int k = 1; k <= l; ++k) scale *= 2.0 * k;  // 2^l l!
  const std::vector<double> coeff = rodrigues_poly(l, l + m);
  double value = eval_poly(coeff, x) / scale;
  value *= std::pow(1.0 - x * x, m / 2.0);
  if (m % 2 == 1) value = -value;
  return value;
}

inline double legendre(int l, double x) { return assoc_legendre(l, 0, x); }

// Exact-to-roundoff integral of max(w . n, 0) * f(w) over the sphere, done
// in a frame aligned with n so the integrand stays smooth.
inline double clamped_cosine_projection(const lambert::Vec3& n,
                                        const std::function<double(const lambert::Vec3&)>& f,
                                        int theta_nodes = 64, int phi_nodes = 128) {
  const lambert::Vec3 axis = lambert::normalized(n);
  return lambert::integrate_hemisphere(
      axis, [&](const lambert::Vec3& w) { return dot(w, axis) * f(w); }, theta_nodes, phi_nodes);
}

inline lambert::Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    const lambert::Vec3 v{gauss(rng), gauss(rng), gauss(rng)};
    const double len = lambert::norm(v);
    if (len > 1e-6) return v / len;
  }
}

// Central difference of a scalar function along a direction.
inline double central_diff(const std::function<double(double)>& f, double h = 1e-5) {
  return (f(h) - f(-h)) / (2.0 * h);
}

}  // namespace oracles
