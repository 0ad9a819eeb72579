#include "lambert/sh.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace lambert::sh {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDomainSlack = 1e-12;

void check_band(int l, int m) {
  if (l < 0 || l > kMaxBand + 1 || std::abs(m) > l) {
    throw std::invalid_argument("sh: band out of range, l=" + std::to_string(l) +
                                " m=" + std::to_string(m));
  }
}

double checked_x(double x) {
  if (std::fabs(x) > 1.0 + kDomainSlack) {
    throw std::domain_error("sh: argument outside [-1,1]: " + std::to_string(x));
  }
  return std::fmin(1.0, std::fmax(-1.0, x));
}

// P_m^m(x) = (-1)^m (2m-1)!! (1-x^2)^{m/2}, the diagonal seed for the upward
// l recurrence.
double diag_seed(int m, double x) {
  double pmm = 1.0;
  if (m > 0) {
    const double s = std::sqrt((1.0 - x) * (1.0 + x));
    double fact = 1.0;
    for (int i = 0; i < m; ++i) {
      pmm *= -fact * s;
      fact += 2.0;
    }
  }
  return pmm;
}

// Fills table[l] = P_l^m(x) for l in [m, lmax] via
// (l - m + 1) P_{l+1}^m = (2l + 1) x P_l^m - (l + m) P_{l-1}^m.
void assoc_column(int m, int lmax, double x, double* table) {
  double pmm = diag_seed(m, x);
  table[m] = pmm;
  if (lmax == m) return;
  double pmm1 = x * (2.0 * m + 1.0) * pmm;
  table[m + 1] = pmm1;
  for (int l = m + 1; l < lmax; ++l) {
    const double next = ((2.0 * l + 1.0) * x * pmm1 - (l + m) * pmm) / (l - m + 1.0);
    pmm = pmm1;
    pmm1 = next;
    table[l + 1] = next;
  }
}

// sqrt((2l+1)(l-|m|)! / (4 pi (l+|m|)!))
double norm_k(int l, int m) {
  const int am = std::abs(m);
  double ratio = 1.0;  // (l-|m|)! / (l+|m|)!
  for (int k = l - am + 1; k <= l + am; ++k) ratio /= k;
  return std::sqrt((2.0 * l + 1.0) * ratio / (4.0 * kPi));
}

struct Angles {
  double cos_theta;
  double sin_theta;  // always >= 0
  double phi;
};

Angles angles_of(const Vec3& dir) {
  return {dir.z, std::hypot(dir.x, dir.y), std::atan2(dir.y, dir.x)};
}

}  // namespace

double legendre(int l, double x) {
  check_band(l, 0);
  x = checked_x(x);
  double prev = 1.0;  // P_0
  if (l == 0) return prev;
  double cur = x;  // P_1
  for (int k = 1; k < l; ++k) {
    const double next = ((2.0 * k + 1.0) * x * cur - k * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double assoc_legendre(int l, int m, double x) {
  check_band(l, m);
  if (m < 0) throw std::invalid_argument("sh: assoc_legendre expects m >= 0");
  x = checked_x(x);
  double table[kMaxBand + 2];
  assoc_column(m, l, x, table);
  return table[l];
}

double basis(int l, int m, const Vec3& dir) {
  check_band(l, m);
  const Angles a = angles_of(dir);
  const int am = std::abs(m);
  const double p = assoc_legendre(l, am, a.cos_theta);
  const double k = norm_k(l, m);
  if (m == 0) return k * p;
  const double sign = (am % 2 == 0) ? 1.0 : -1.0;  // (-1)^m
  const double azimuth = (m > 0) ? std::cos(am * a.phi) : std::sin(am * a.phi);
  return sign * std::sqrt(2.0) * k * p * azimuth;
}

void basis_all(const Vec3& dir, int bands, std::span<double> out) {
  if (bands < 0 || bands > kMaxBand) throw std::invalid_argument("sh: bad band count");
  if (out.size() < static_cast<size_t>(coeff_count(bands)))
    throw std::invalid_argument("sh: output span too small");
  const Angles a = angles_of(dir);

  double column[kMaxBand + 2];
  double cos_m[kMaxBand + 1];
  double sin_m[kMaxBand + 1];
  cos_m[0] = 1.0;
  sin_m[0] = 0.0;
  if (bands > 0) {
    cos_m[1] = std::cos(a.phi);
    sin_m[1] = std::sin(a.phi);
    for (int m = 2; m <= bands; ++m) {
      // angle addition, avoids bands trig calls per direction
      cos_m[m] = cos_m[m - 1] * cos_m[1] - sin_m[m - 1] * sin_m[1];
      sin_m[m] = sin_m[m - 1] * cos_m[1] + cos_m[m - 1] * sin_m[1];
    }
  }

  for (int m = 0; m <= bands; ++m) {
    assoc_column(m, bands, a.cos_theta, column);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = m; l <= bands; ++l) {
      const double k = norm_k(l, m);
      if (m == 0) {
        out[index(l, 0)] = k * column[l];
      } else {
        const double common = sign * std::sqrt(2.0) * k * column[l];
        out[index(l, m)] = common * cos_m[m];
        out[index(l, -m)] = common * sin_m[m];
      }
    }
  }
}

std::vector<double> basis_all(const Vec3& dir, int bands) {
  std::vector<double> out(coeff_count(bands));
  basis_all(dir, bands, out);
  return out;
}

Vec3 theta_grad(const Vec3& n) {
  const double st = std::hypot(n.x, n.y);
  if (st < kPoleSinTolerance)
    throw std::domain_error("sh: polar-angle Jacobian singular at the pole");
  const double r2 = norm2(n);
  return Vec3{n.x * n.z, n.y * n.z, -(n.x * n.x + n.y * n.y)} / (r2 * st);
}

Vec3 phi_grad(const Vec3& n) {
  const double s2 = n.x * n.x + n.y * n.y;
  if (s2 < kPoleSinTolerance * kPoleSinTolerance)
    throw std::domain_error("sh: polar-angle Jacobian singular at the pole");
  return {-n.y / s2, n.x / s2, 0.0};
}

namespace {

// dP_l^m(cos theta)/d theta =
//   (-cos theta (l+1) P_l^m + (l-m+1) P_{l+1}^m) / sin theta
double dp_dtheta(double cos_theta, double sin_theta, int l, int m,
                 const double* column) {
  return (-cos_theta * (l + 1.0) * column[l] + (l - m + 1.0) * column[l + 1]) /
         sin_theta;
}

}  // namespace

void basis_grad_all(const Vec3& n, int bands, std::span<Vec3> out, PoleMode mode) {
  if (bands < 0 || bands > kMaxBand) throw std::invalid_argument("sh: bad band count");
  if (out.size() < static_cast<size_t>(coeff_count(bands)))
    throw std::invalid_argument("sh: output span too small");
  const Angles a = angles_of(n);

  const bool at_pole = a.sin_theta < kPoleSinTolerance;
  if (at_pole && mode == PoleMode::kError && bands > 0)
    throw std::domain_error("sh: basis gradient needs the phi chain at the pole");
  const double sin_theta = std::max(a.sin_theta, kPoleSinTolerance);

  // At the exact pole these are the (zero) m=0 limits; see header.
  const double r2 = norm2(n);
  const Vec3 dtheta = Vec3{n.x * n.z, n.y * n.z, -(n.x * n.x + n.y * n.y)} / (r2 * sin_theta);
  const double s2 = std::max(n.x * n.x + n.y * n.y, kPoleSinTolerance * kPoleSinTolerance);
  const Vec3 dphi = at_pole ? Vec3{} : Vec3{-n.y / s2, n.x / s2, 0.0};

  double column[kMaxBand + 2];
  double cos_m[kMaxBand + 1];
  double sin_m[kMaxBand + 1];
  cos_m[0] = 1.0;
  sin_m[0] = 0.0;
  if (bands > 0) {
    cos_m[1] = std::cos(a.phi);
    sin_m[1] = std::sin(a.phi);
    for (int m = 2; m <= bands; ++m) {
      cos_m[m] = cos_m[m - 1] * cos_m[1] - sin_m[m - 1] * sin_m[1];
      sin_m[m] = sin_m[m - 1] * cos_m[1] + cos_m[m - 1] * sin_m[1];
    }
  }

  for (int m = 0; m <= bands; ++m) {
    assoc_column(m, bands + 1, a.cos_theta, column);
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    for (int l = std::max(m, 1); l <= bands; ++l) {
      const double k = norm_k(l, m);
      const double dp = dp_dtheta(a.cos_theta, sin_theta, l, m, column);
      if (m == 0) {
        out[index(l, 0)] = k * dp * dtheta;
      } else {
        const double c = sign * std::sqrt(2.0) * k;
        out[index(l, m)] = c * (dp * cos_m[m] * dtheta - m * column[l] * sin_m[m] * dphi);
        out[index(l, -m)] = c * (dp * sin_m[m] * dtheta + m * column[l] * cos_m[m] * dphi);
      }
    }
  }
  out[0] = Vec3{};  // Y_0^0 is constant
}

std::vector<Vec3> basis_grad_all(const Vec3& n, int bands, PoleMode mode) {
  std::vector<Vec3> out(coeff_count(bands));
  basis_grad_all(n, bands, out, mode);
  return out;
}

Vec3 basis_grad(int l, int m, const Vec3& n, PoleMode mode) {
  check_band(l, m);
  if (l == 0) return {};
  auto all = basis_grad_all(n, l, mode);
  return all[index(l, m)];
}

}  // namespace lambert::sh
