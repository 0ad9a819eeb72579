#include "lambert/raster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lambert {

std::size_t FragmentBuffer::covered_count() const {
  std::size_t n = 0;
  for (std::int32_t f : face)
    if (f != kBackground) ++n;
  return n;
}

namespace {

struct ProjectedVertex {
  double x, y, depth;
  bool valid;
};

FragmentBuffer rasterize_impl(const TriMesh& mesh, const Camera& cam,
                              std::vector<Vec3> background) {
  FragmentBuffer frags;
  frags.width = cam.width;
  frags.height = cam.height;
  const std::size_t pixels = frags.pixel_count();
  frags.face.assign(pixels, FragmentBuffer::kBackground);
  frags.depth.assign(pixels, std::numeric_limits<double>::infinity());
  frags.albedo.assign(pixels, Vec3{});
  frags.background = std::move(background);

  std::vector<ProjectedVertex> proj(mesh.vertex_count());
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const auto p = cam.project(mesh.vertices[v]);
    proj[v] = {p.x, p.y, p.depth, p.valid};
  }

  const bool perspective = cam.kind == CameraKind::kPerspective;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const auto& idx = mesh.faces[f];
    const ProjectedVertex& a = proj[idx[0]];
    const ProjectedVertex& b = proj[idx[1]];
    const ProjectedVertex& c = proj[idx[2]];
    if (!a.valid || !b.valid || !c.valid) continue;  // clipped at the near plane

    const double area =
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
    if (std::fabs(area) < 1e-14) continue;  // edge-on in screen space

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x, b.x, c.x}))));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(std::max({a.x, b.x, c.x}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y, b.y, c.y}))));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(std::max({a.y, b.y, c.y}))));
    if (x0 > x1 || y0 > y1) continue;

    const double inv_area = 1.0 / area;
    const Vec3 rho = mesh.albedo.empty() ? Vec3{0.75, 0.75, 0.75} : mesh.albedo[f];
    for (int y = y0; y <= y1; ++y) {
      const double py = y + 0.5;
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5;
        const double w0 = ((b.x - px) * (c.y - py) - (b.y - py) * (c.x - px)) * inv_area;
        const double w1 = ((c.x - px) * (a.y - py) - (c.y - py) * (a.x - px)) * inv_area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        double depth;
        if (perspective) {
          // perspective-correct: 1/depth interpolates linearly on screen
          depth = 1.0 / (w0 / a.depth + w1 / b.depth + w2 / c.depth);
        } else {
          depth = w0 * a.depth + w1 * b.depth + w2 * c.depth;
        }
        const std::size_t p = static_cast<std::size_t>(y) * cam.width + x;
        if (depth < frags.depth[p]) {  // ties keep the earlier (lower) face id
          frags.depth[p] = depth;
          frags.face[p] = static_cast<std::int32_t>(f);
          frags.albedo[p] = rho;
        }
      }
    }
  }
  return frags;
}

}  // namespace

FragmentBuffer rasterize(const TriMesh& mesh, const Camera& cam, const Vec3& background_color) {
  return rasterize_impl(mesh, cam,
                        std::vector<Vec3>(static_cast<std::size_t>(cam.width) * cam.height,
                                          background_color));
}

FragmentBuffer rasterize(const TriMesh& mesh, const Camera& cam, const Image& background_image) {
  if (background_image.width != cam.width || background_image.height != cam.height)
    throw std::invalid_argument("rasterize: background image does not match camera resolution");
  std::vector<Vec3> bg(background_image.pixel_count());
  for (std::size_t p = 0; p < bg.size(); ++p) bg[p] = background_image.pixel(p);
  return rasterize_impl(mesh, cam, std::move(bg));
}

}  // namespace lambert
