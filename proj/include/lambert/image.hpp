#pragma once

#include <string>
#include <vector>

#include "lambert/vec.hpp"

namespace lambert {

// Linear-radiance raster. Values may be negative in intermediate states;
// 8-bit writers clamp to [0,1] and apply the display exponent 1/2.2.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // row-major, RGB interleaved

  Image() = default;
  Image(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, 0.0) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  Vec3 pixel(std::size_t index) const {
    return {data[index * 3], data[index * 3 + 1], data[index * 3 + 2]};
  }
  void set_pixel(std::size_t index, const Vec3& rgb) {
    data[index * 3] = rgb.x;
    data[index * 3 + 1] = rgb.y;
    data[index * 3 + 2] = rgb.z;
  }

  Image& operator+=(const Image& o);
  Image& operator-=(const Image& o);
  Image& operator*=(double s);
  double max_abs() const;
};

Image operator-(Image a, const Image& b);

// 8-bit binary PPM with display gamma.
void save_ppm(const Image& img, const std::string& path);
// 8-bit RGB PNG with display gamma (zlib-backed encoder).
void save_png(const Image& img, const std::string& path);
// Headerless little-endian float32 dump, row-major RGB; the exact-pipeline
// format. Dimensions travel out of band.
void save_raw(const Image& img, const std::string& path);
Image load_raw(const std::string& path, int width, int height);

}  // namespace lambert
