#pragma once

#include <cstdint>
#include <vector>

#include "lambert/camera.hpp"
#include "lambert/image.hpp"
#include "lambert/mesh.hpp"

namespace lambert {

// Per-pixel visibility record produced by the rasterizer. Links every pixel
// to the face it sees (or to the background), which is what the shading and
// Jacobian passes differentiate against.
struct FragmentBuffer {
  static constexpr std::int32_t kBackground = -1;

  int width = 0;
  int height = 0;
  std::vector<std::int32_t> face;  // kBackground where nothing is visible
  std::vector<double> depth;       // view depth, +inf for background
  std::vector<Vec3> albedo;        // snapshot of the visible face's albedo
  std::vector<Vec3> background;    // color behind every pixel

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool covered(std::size_t p) const { return face[p] != kBackground; }
  std::size_t covered_count() const;
};

// Nearest-face-per-pixel z-buffer fill with pixel-center sampling and no
// antialiasing. Back-facing triangles are kept (shading handles orientation);
// depth ties go to the lower face id. Deterministic: identical inputs give
// bit-identical buffers.
FragmentBuffer rasterize(const TriMesh& mesh, const Camera& cam, const Vec3& background_color);
FragmentBuffer rasterize(const TriMesh& mesh, const Camera& cam, const Image& background_image);

}  // namespace lambert
