#pragma once

#include <string>
#include <vector>

#include "lambert/envmap.hpp"
#include "lambert/sh.hpp"
#include "lambert/vec.hpp"

namespace lambert {

inline constexpr int kDefaultBands = 6;  // 49 coefficients per channel

// Spherical-harmonics lighting coefficients, one (bands+1)^2 block per RGB
// channel, channel-major, flattened by l(l+1)+m.
struct ShCoeffs {
  int bands = kDefaultBands;
  std::vector<double> data;  // size 3 * (bands+1)^2

  ShCoeffs() : data(3 * sh::coeff_count(kDefaultBands), 0.0) {}
  explicit ShCoeffs(int n) : bands(n), data(3 * sh::coeff_count(n), 0.0) {}

  int per_channel() const { return sh::coeff_count(bands); }
  double& at(int l, int m, int channel) { return data[channel * per_channel() + sh::index(l, m)]; }
  double at(int l, int m, int channel) const { return data[channel * per_channel() + sh::index(l, m)]; }
  double& at(int flat, int channel) { return data[channel * per_channel() + flat]; }
  double at(int flat, int channel) const { return data[channel * per_channel() + flat]; }

  ShCoeffs& operator+=(const ShCoeffs& o);
  ShCoeffs& operator*=(double s);
};

ShCoeffs operator+(ShCoeffs a, const ShCoeffs& b);
ShCoeffs operator*(ShCoeffs a, double s);
ShCoeffs operator*(double s, ShCoeffs a);

// Zonal coefficient G~_l of the clamped cosine max(w.z, 0).
double clamped_cosine_zonal(int l);

// Shading kernel k_l = sqrt(4 pi / (2l+1)) * G~_l; the per-band factor that
// turns lighting coefficients into reflected radiance.
double shading_kernel(int l);

// Clamped-cosine coefficients oriented to an arbitrary unit normal:
//   G_{l,m}(n) = sqrt(4 pi / (2l+1)) G~_l Y_l^m(n)
std::vector<double> rotate_zonal_to_normal(const Vec3& n, int bands);

// Projects an equirectangular environment onto SH per channel (midpoint rule
// with sin(theta) area weights).
ShCoeffs project_environment(const EnvMap& env, int bands);

// Text format: header "shc <bands>", then (n+1)^2 lines of "l m r g b".
ShCoeffs load_sh_coeffs(const std::string& path);
void save_sh_coeffs(const ShCoeffs& coeffs, const std::string& path);

}  // namespace lambert
