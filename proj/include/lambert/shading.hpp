#pragma once

#include <cstdint>
#include <vector>

#include "lambert/image.hpp"
#include "lambert/lighting.hpp"
#include "lambert/mesh.hpp"
#include "lambert/raster.hpp"

namespace lambert {

// Forward SH shading:
//   I = rho * sum_{l,m} U_{l,m} sqrt(4 pi/(2l+1)) G~_l Y_l^m(n)
// per channel, with background pixels copied through. Raw (possibly
// negative) radiance is returned; clamping happens in the 8-bit writers.
Image shade(const FragmentBuffer& frags, const FaceNormals& normals, const ShCoeffs& lighting,
            const std::vector<Vec3>& albedo);
// Uses the albedo snapshot captured in the fragment buffer.
Image shade(const FragmentBuffer& frags, const FaceNormals& normals, const ShCoeffs& lighting);

// The visibility map is frozen in all Jacobians below: fragments are treated
// as constants of the differentiation, per the infinitesimal-perturbation
// assumption the renderer is built on.

// dI/dU. Entry (pixel, (l,m)) holds rho_face * k_l * Y_l^m(n_face) per
// channel; the lighting-to-pixel map is exactly linear.
struct LightingJacobian {
  int width = 0, height = 0;
  int bands = kDefaultBands;
  std::vector<std::int32_t> pixels;  // covered pixels only
  std::vector<Vec3> rho;             // per covered pixel
  std::vector<double> factors;       // per covered pixel, (bands+1)^2 values

  int per_pixel() const { return sh::coeff_count(bands); }
  // 3-channel entry: d I_c / d U_{lm,c} (channels do not mix).
  Vec3 entry(std::size_t k, int flat_lm) const {
    const double s = factors[k * per_pixel() + flat_lm];
    return {rho[k].x * s, rho[k].y * s, rho[k].z * s};
  }
  Image apply(const ShCoeffs& delta) const;
  ShCoeffs grad(const Image& d_cost_d_image) const;
  std::size_t byte_size() const;
};

LightingJacobian d_image_d_lighting(const FragmentBuffer& frags, const FaceNormals& normals,
                                    const std::vector<Vec3>& albedo, int bands = kDefaultBands);

// dI/drho. One entry per covered pixel, against its own face only.
struct AlbedoJacobian {
  int width = 0, height = 0;
  std::vector<std::int32_t> pixels;
  std::vector<std::int32_t> faces;
  std::vector<Vec3> factor;  // SH shading factor F per channel

  Image apply(const std::vector<Vec3>& albedo_delta) const;
  std::vector<Vec3> grad(const Image& d_cost_d_image, std::size_t face_count) const;
  std::size_t byte_size() const;
};

AlbedoJacobian d_image_d_albedo(const FragmentBuffer& frags, const FaceNormals& normals,
                                const ShCoeffs& lighting);

// dI/dV through the face normals:
//   dI_j/dV_p = rho_j (dF/dN_i) (dN_i/dV_p)
// Each covered pixel couples to the 9 coordinates of its face's corners.
struct VertexJacobian {
  int width = 0, height = 0;
  std::vector<std::int32_t> pixels;
  std::vector<std::uint32_t> corners;  // 3 vertex ids per covered pixel
  std::vector<Mat3> blocks;            // 3 per pixel; rows = channel, cols = axis

  Image apply(const std::vector<Vec3>& vertex_delta) const;
  std::vector<Vec3> grad(const Image& d_cost_d_image, std::size_t vertex_count) const;
  std::size_t byte_size() const;
};

VertexJacobian d_image_d_vertices(const FragmentBuffer& frags, const TriMesh& mesh,
                                  const ShCoeffs& lighting);

}  // namespace lambert
