#pragma once

#include <string>
#include <vector>

#include "lambert/vec.hpp"

namespace lambert {

// Equirectangular radiance grid: row r covers theta in [r, r+1] * pi/H,
// column c covers phi in [c, c+1] * 2 pi / W, samples at cell centers.
// Loaders clamp file radiance to >= 0; in-memory grids may hold signed test
// signals.
struct EnvMap {
  int width = 0;
  int height = 0;
  std::vector<Vec3> texels;  // row-major, height*width

  EnvMap() = default;
  EnvMap(int w, int h, const Vec3& fill = {})
      : width(w), height(h), texels(static_cast<std::size_t>(w) * h, fill) {}

  Vec3& at(int row, int col) { return texels[static_cast<std::size_t>(row) * width + col]; }
  const Vec3& at(int row, int col) const {
    return texels[static_cast<std::size_t>(row) * width + col];
  }

  double theta_of_row(int row) const;
  double phi_of_col(int col) const;
  Vec3 direction(int row, int col) const;

  // Builds a grid by sampling a spherical function at cell centers.
  template <typename F>
  static EnvMap from_function(int w, int h, F&& f) {
    EnvMap env(w, h);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) env.at(r, c) = f(env.direction(r, c));
    return env;
  }
};

// Portable FloatMap (PF, color) and binary PPM (P6, 8-bit, linearized by
// exponent 2.2 on load).
EnvMap load_envmap(const std::string& path);
EnvMap load_pfm(const std::string& path);
void save_pfm(const EnvMap& env, const std::string& path);
EnvMap load_envmap_ppm(const std::string& path);

}  // namespace lambert
