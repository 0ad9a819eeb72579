#include "lambert/lighting.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace lambert {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

ShCoeffs& ShCoeffs::operator+=(const ShCoeffs& o) {
  if (o.bands != bands) throw std::invalid_argument("ShCoeffs: band mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  return *this;
}

ShCoeffs& ShCoeffs::operator*=(double s) {
  for (double& v : data) v *= s;
  return *this;
}

ShCoeffs operator+(ShCoeffs a, const ShCoeffs& b) { return a += b; }
ShCoeffs operator*(ShCoeffs a, double s) { return a *= s; }
ShCoeffs operator*(double s, ShCoeffs a) { return a *= s; }

double clamped_cosine_zonal(int l) {
  if (l < 0) throw std::invalid_argument("clamped_cosine_zonal: l must be >= 0");
  if (l == 0) return std::sqrt(kPi) / 2.0;
  if (l == 1) return std::sqrt(kPi / 3.0);
  if (l % 2 == 1) return 0.0;
  // (-1)^{l/2+1} (l-2)! sqrt((2l+1) pi) / (2^l (l/2-1)! (l/2+1)!)
  const int half = l / 2;
  double value = (half % 2 == 0) ? -1.0 : 1.0;
  for (int k = 2; k <= l - 2; ++k) value *= k;          // (l-2)!
  value *= std::sqrt((2.0 * l + 1.0) * kPi);
  value /= std::pow(2.0, l);
  for (int k = 2; k <= half - 1; ++k) value /= k;       // (l/2-1)!
  for (int k = 2; k <= half + 1; ++k) value /= k;       // (l/2+1)!
  return value;
}

double shading_kernel(int l) {
  return std::sqrt(4.0 * kPi / (2.0 * l + 1.0)) * clamped_cosine_zonal(l);
}

std::vector<double> rotate_zonal_to_normal(const Vec3& n, int bands) {
  std::vector<double> out = sh::basis_all(n, bands);
  for (int l = 0; l <= bands; ++l) {
    const double scale = std::sqrt(4.0 * kPi / (2.0 * l + 1.0)) * clamped_cosine_zonal(l);
    for (int m = -l; m <= l; ++m) out[sh::index(l, m)] *= scale;
  }
  return out;
}

ShCoeffs project_environment(const EnvMap& env, int bands) {
  if (bands < 0 || bands > sh::kMaxBand)
    throw std::invalid_argument("project_environment: bands must be in [0,16]");
  if (env.width < 2 || env.height < 2)
    throw std::invalid_argument("project_environment: grid too small");
  ShCoeffs out(bands);
  const int count = out.per_channel();
  const double cell = (kPi / env.height) * (2.0 * kPi / env.width);
  std::vector<double> basis(count);
  for (int r = 0; r < env.height; ++r) {
    const double theta = env.theta_of_row(r);
    const double weight = std::sin(theta) * cell;
    for (int c = 0; c < env.width; ++c) {
      sh::basis_all(env.direction(r, c), bands, basis);
      const Vec3& radiance = env.at(r, c);
      for (int i = 0; i < count; ++i) {
        const double wb = weight * basis[i];
        out.at(i, 0) += wb * radiance.x;
        out.at(i, 1) += wb * radiance.y;
        out.at(i, 2) += wb * radiance.z;
      }
    }
  }
  return out;
}

ShCoeffs load_sh_coeffs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int bands = -1;
  if (!(in >> magic >> bands) || magic != "shc" || bands < 0 || bands > sh::kMaxBand)
    throw std::runtime_error(path + ": not an shc file");
  ShCoeffs out(bands);
  for (int i = 0; i < out.per_channel(); ++i) {
    int l = 0, m = 0;
    Vec3 rgb;
    if (!(in >> l >> m >> rgb.x >> rgb.y >> rgb.z))
      throw std::runtime_error(path + ": truncated shc file at row " + std::to_string(i));
    if (l < 0 || l > bands || std::abs(m) > l)
      throw std::runtime_error(path + ": invalid (l,m) at row " + std::to_string(i));
    for (int c = 0; c < 3; ++c) out.at(l, m, c) = rgb[c];
  }
  return out;
}

void save_sh_coeffs(const ShCoeffs& coeffs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "shc " << coeffs.bands << "\n";
  for (int l = 0; l <= coeffs.bands; ++l)
    for (int m = -l; m <= l; ++m)
      out << l << " " << m << " " << coeffs.at(l, m, 0) << " " << coeffs.at(l, m, 1) << " "
          << coeffs.at(l, m, 2) << "\n";
}

}  // namespace lambert
