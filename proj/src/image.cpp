#include "lambert/image.hpp"

#include <zlib.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace lambert {

Image& Image::operator+=(const Image& o) {
  if (o.width != width || o.height != height) throw std::invalid_argument("image size mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] += o.data[i];
  return *this;
}

Image& Image::operator-=(const Image& o) {
  if (o.width != width || o.height != height) throw std::invalid_argument("image size mismatch");
  for (std::size_t i = 0; i < data.size(); ++i) data[i] -= o.data[i];
  return *this;
}

Image& Image::operator*=(double s) {
  for (double& v : data) v *= s;
  return *this;
}

double Image::max_abs() const {
  double m = 0.0;
  for (double v : data) m = std::max(m, std::fabs(v));
  return m;
}

Image operator-(Image a, const Image& b) { return a -= b; }

namespace {

unsigned char display_byte(double linear) {
  const double clamped = std::clamp(linear, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(255.0 * std::pow(clamped, 1.0 / 2.2)));
}

void write_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v >> 24));
  out.push_back(static_cast<unsigned char>(v >> 16));
  out.push_back(static_cast<unsigned char>(v >> 8));
  out.push_back(static_cast<unsigned char>(v));
}

void write_chunk(std::ofstream& out, const char type[4],
                 const std::vector<unsigned char>& payload) {
  std::vector<unsigned char> head;
  write_be32(head, static_cast<std::uint32_t>(payload.size()));
  out.write(reinterpret_cast<const char*>(head.data()), 4);
  std::vector<unsigned char> body(type, type + 4);
  body.insert(body.end(), payload.begin(), payload.end());
  const auto crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));
  out.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
  std::vector<unsigned char> tail;
  write_be32(tail, crc);
  out.write(reinterpret_cast<const char*>(tail.data()), 4);
}

}  // namespace

void save_ppm(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) row[3 * x + c] = display_byte(img.at(x, y, c));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
}

void save_png(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  out.write(reinterpret_cast<const char*>(sig), 8);

  std::vector<unsigned char> ihdr;
  write_be32(ihdr, static_cast<std::uint32_t>(img.width));
  write_be32(ihdr, static_cast<std::uint32_t>(img.height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // truecolor
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // filter method
  ihdr.push_back(0);   // no interlace
  write_chunk(out, "IHDR", ihdr);

  // Scanlines with filter byte 0 (none).
  std::vector<unsigned char> raster;
  raster.reserve(static_cast<std::size_t>(img.height) * (1 + 3 * img.width));
  for (int y = 0; y < img.height; ++y) {
    raster.push_back(0);
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) raster.push_back(display_byte(img.at(x, y, c)));
  }
  uLongf bound = compressBound(static_cast<uLong>(raster.size()));
  std::vector<unsigned char> deflated(bound);
  if (compress2(deflated.data(), &bound, raster.data(), static_cast<uLong>(raster.size()), 6) !=
      Z_OK)
    throw std::runtime_error("png: deflate failed for " + path);
  deflated.resize(bound);
  write_chunk(out, "IDAT", deflated);
  write_chunk(out, "IEND", {});
}

void save_raw(const Image& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  std::vector<float> buf(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) buf[i] = static_cast<float>(img.data[i]);
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : buf) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&v, &bits, 4);
    }
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 4));
}

Image load_raw(const std::string& path, int width, int height) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  Image img(width, height);
  std::vector<float> buf(img.data.size());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  if (!in) throw std::runtime_error(path + ": truncated raw image");
  if constexpr (std::endian::native == std::endian::big) {
    for (float& v : buf) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      bits = __builtin_bswap32(bits);
      std::memcpy(&v, &bits, 4);
    }
  }
  for (std::size_t i = 0; i < buf.size(); ++i) img.data[i] = buf[i];
  return img;
}

}  // namespace lambert
