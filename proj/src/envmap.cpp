#include "lambert/envmap.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lambert {

namespace {

constexpr double kPi = 3.14159265358979323846;

float to_little_endian(float v, bool file_is_little) {
  if (std::endian::native == std::endian::little && file_is_little) return v;
  if (std::endian::native == std::endian::big && !file_is_little) return v;
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  bits = __builtin_bswap32(bits);
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

double EnvMap::theta_of_row(int row) const { return (row + 0.5) * kPi / height; }
double EnvMap::phi_of_col(int col) const { return (col + 0.5) * 2.0 * kPi / width; }

Vec3 EnvMap::direction(int row, int col) const {
  const double theta = theta_of_row(row);
  const double phi = phi_of_col(col);
  const double st = std::sin(theta);
  return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

EnvMap load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0.0;
  in >> magic >> w >> h >> scale;
  if (magic != "PF" || w < 2 || h < 2 || scale == 0.0)
    throw std::runtime_error(path + ": not a color PFM file");
  in.get();  // single whitespace after the header
  const bool little = scale < 0.0;
  std::vector<float> row(static_cast<std::size_t>(w) * 3);
  EnvMap env(w, h);
  // PFM stores rows bottom-to-top.
  for (int r = h - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * 4));
    if (!in) throw std::runtime_error(path + ": truncated PFM payload");
    for (int c = 0; c < w; ++c) {
      Vec3 rgb;
      for (int k = 0; k < 3; ++k)
        rgb[k] = std::max(0.0, static_cast<double>(to_little_endian(row[3 * c + k], little)));
      env.at(r, c) = rgb;
    }
  }
  return env;
}

void save_pfm(const EnvMap& env, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "PF\n" << env.width << " " << env.height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(env.width) * 3);
  for (int r = env.height - 1; r >= 0; --r) {
    for (int c = 0; c < env.width; ++c)
      for (int k = 0; k < 3; ++k)
        row[3 * c + k] = to_little_endian(static_cast<float>(env.at(r, c)[k]), true);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * 4));
  }
}

EnvMap load_envmap_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || w < 2 || h < 2 || maxval != 255)
    throw std::runtime_error(path + ": expected 8-bit binary PPM");
  in.get();
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 3);
  EnvMap env(w, h);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw std::runtime_error(path + ": truncated PPM payload");
    for (int c = 0; c < w; ++c) {
      Vec3 rgb;
      for (int k = 0; k < 3; ++k)
        rgb[k] = std::pow(row[3 * c + k] / 255.0, 2.2);  // display -> linear
      env.at(r, c) = rgb;
    }
  }
  return env;
}

EnvMap load_envmap(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pfm") return load_pfm(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ppm") return load_envmap_ppm(path);
  throw std::runtime_error(path + ": unsupported environment format (want .pfm or .ppm)");
}

}  // namespace lambert
