#include "lambert/shading.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace lambert {

namespace {

void check_bands(const ShCoeffs& lighting) {
  if (lighting.bands < 0 || lighting.bands > sh::kMaxBand)
    throw std::invalid_argument("shade: lighting band count out of range");
}

std::vector<double> kernel_per_index(int bands) {
  std::vector<double> k(sh::coeff_count(bands));
  for (int l = 0; l <= bands; ++l) {
    const double kl = shading_kernel(l);
    for (int m = -l; m <= l; ++m) k[sh::index(l, m)] = kl;
  }
  return k;
}

// F(n) per channel for one face normal.
Vec3 shading_factor(const Vec3& n, const ShCoeffs& lighting, const std::vector<double>& kernel,
                    std::vector<double>& basis_scratch) {
  sh::basis_all(n, lighting.bands, basis_scratch);
  Vec3 f{};
  const int count = lighting.per_channel();
  for (int i = 0; i < count; ++i) {
    const double kb = kernel[i] * basis_scratch[i];
    f.x += lighting.at(i, 0) * kb;
    f.y += lighting.at(i, 1) * kb;
    f.z += lighting.at(i, 2) * kb;
  }
  return f;
}

}  // namespace

Image shade(const FragmentBuffer& frags, const FaceNormals& normals, const ShCoeffs& lighting,
            const std::vector<Vec3>& albedo) {
  check_bands(lighting);
  Image img(frags.width, frags.height);
  const std::vector<double> kernel = kernel_per_index(lighting.bands);
  std::vector<double> basis(lighting.per_channel());
  std::unordered_map<std::int32_t, Vec3> face_factor;
  face_factor.reserve(256);
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    const std::int32_t f = frags.face[p];
    if (f == FragmentBuffer::kBackground) {
      img.set_pixel(p, frags.background[p]);
      continue;
    }
    auto it = face_factor.find(f);
    if (it == face_factor.end())
      it = face_factor.emplace(f, shading_factor(normals.n[f], lighting, kernel, basis)).first;
    const Vec3 rho = albedo.empty() ? frags.albedo[p] : albedo[f];
    img.set_pixel(p, {rho.x * it->second.x, rho.y * it->second.y, rho.z * it->second.z});
  }
  return img;
}

Image shade(const FragmentBuffer& frags, const FaceNormals& normals, const ShCoeffs& lighting) {
  return shade(frags, normals, lighting, {});
}

// ---------------------------------------------------------------------------
// Lighting Jacobian

LightingJacobian d_image_d_lighting(const FragmentBuffer& frags, const FaceNormals& normals,
                                    const std::vector<Vec3>& albedo, int bands) {
  if (bands < 0 || bands > sh::kMaxBand)
    throw std::invalid_argument("d_image_d_lighting: band count out of range");
  LightingJacobian jac;
  jac.width = frags.width;
  jac.height = frags.height;
  jac.bands = bands;
  const int count = sh::coeff_count(bands);
  const std::vector<double> kernel = kernel_per_index(bands);

  std::unordered_map<std::int32_t, std::vector<double>> face_factors;
  std::vector<double> basis(count);
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    const std::int32_t f = frags.face[p];
    if (f == FragmentBuffer::kBackground) continue;
    auto it = face_factors.find(f);
    if (it == face_factors.end()) {
      sh::basis_all(normals.n[f], bands, basis);
      std::vector<double> scaled(count);
      for (int i = 0; i < count; ++i) scaled[i] = kernel[i] * basis[i];
      it = face_factors.emplace(f, std::move(scaled)).first;
    }
    jac.pixels.push_back(static_cast<std::int32_t>(p));
    jac.rho.push_back(albedo.empty() ? frags.albedo[p] : albedo[f]);
    jac.factors.insert(jac.factors.end(), it->second.begin(), it->second.end());
  }
  return jac;
}

Image LightingJacobian::apply(const ShCoeffs& delta) const {
  if (delta.bands != bands) throw std::invalid_argument("LightingJacobian: band mismatch");
  Image img(width, height);
  const int count = per_pixel();
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const double* s = factors.data() + k * count;
    Vec3 acc{};
    for (int i = 0; i < count; ++i) {
      acc.x += delta.at(i, 0) * s[i];
      acc.y += delta.at(i, 1) * s[i];
      acc.z += delta.at(i, 2) * s[i];
    }
    img.set_pixel(pixels[k], {rho[k].x * acc.x, rho[k].y * acc.y, rho[k].z * acc.z});
  }
  return img;
}

ShCoeffs LightingJacobian::grad(const Image& d_cost_d_image) const {
  if (d_cost_d_image.width != width || d_cost_d_image.height != height)
    throw std::invalid_argument("LightingJacobian: image shape mismatch");
  ShCoeffs g(bands);
  const int count = per_pixel();
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const double* s = factors.data() + k * count;
    const Vec3 d = d_cost_d_image.pixel(pixels[k]);
    const Vec3 rd{rho[k].x * d.x, rho[k].y * d.y, rho[k].z * d.z};
    for (int i = 0; i < count; ++i) {
      g.at(i, 0) += rd.x * s[i];
      g.at(i, 1) += rd.y * s[i];
      g.at(i, 2) += rd.z * s[i];
    }
  }
  return g;
}

std::size_t LightingJacobian::byte_size() const {
  return pixels.size() * sizeof(std::int32_t) + rho.size() * sizeof(Vec3) +
         factors.size() * sizeof(double);
}

// ---------------------------------------------------------------------------
// Albedo Jacobian

AlbedoJacobian d_image_d_albedo(const FragmentBuffer& frags, const FaceNormals& normals,
                                const ShCoeffs& lighting) {
  check_bands(lighting);
  AlbedoJacobian jac;
  jac.width = frags.width;
  jac.height = frags.height;
  const std::vector<double> kernel = kernel_per_index(lighting.bands);
  std::vector<double> basis(lighting.per_channel());
  std::unordered_map<std::int32_t, Vec3> face_factor;
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    const std::int32_t f = frags.face[p];
    if (f == FragmentBuffer::kBackground) continue;
    auto it = face_factor.find(f);
    if (it == face_factor.end())
      it = face_factor.emplace(f, shading_factor(normals.n[f], lighting, kernel, basis)).first;
    jac.pixels.push_back(static_cast<std::int32_t>(p));
    jac.faces.push_back(f);
    jac.factor.push_back(it->second);
  }
  return jac;
}

Image AlbedoJacobian::apply(const std::vector<Vec3>& albedo_delta) const {
  Image img(width, height);
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const Vec3& d = albedo_delta[faces[k]];
    img.set_pixel(pixels[k], {factor[k].x * d.x, factor[k].y * d.y, factor[k].z * d.z});
  }
  return img;
}

std::vector<Vec3> AlbedoJacobian::grad(const Image& d_cost_d_image,
                                       std::size_t face_count) const {
  if (d_cost_d_image.width != width || d_cost_d_image.height != height)
    throw std::invalid_argument("AlbedoJacobian: image shape mismatch");
  std::vector<Vec3> g(face_count, Vec3{});
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const Vec3 d = d_cost_d_image.pixel(pixels[k]);
    g[faces[k]] += Vec3{factor[k].x * d.x, factor[k].y * d.y, factor[k].z * d.z};
  }
  return g;
}

std::size_t AlbedoJacobian::byte_size() const {
  return pixels.size() * sizeof(std::int32_t) + faces.size() * sizeof(std::int32_t) +
         factor.size() * sizeof(Vec3);
}

// ---------------------------------------------------------------------------
// Vertex Jacobian

VertexJacobian d_image_d_vertices(const FragmentBuffer& frags, const TriMesh& mesh,
                                  const ShCoeffs& lighting) {
  check_bands(lighting);
  VertexJacobian jac;
  jac.width = frags.width;
  jac.height = frags.height;
  const int bands = lighting.bands;
  const int count = lighting.per_channel();
  const std::vector<double> kernel = kernel_per_index(bands);
  const FaceNormals normals = face_normals(mesh);

  // Per-face blocks: every pixel of a flat-shaded face shares them.
  struct FaceBlocks {
    Mat3 block[3];
  };
  std::unordered_map<std::int32_t, FaceBlocks> cache;
  std::vector<Vec3> basis_grad(count);

  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    const std::int32_t f = frags.face[p];
    if (f == FragmentBuffer::kBackground) continue;
    auto it = cache.find(f);
    if (it == cache.end()) {
      // dF_c/dn = sum_lm U_{lm,c} k_l dY_lm/dn; the pole clamp keeps
      // axis-aligned faces finite.
      sh::basis_grad_all(normals.n[f], bands, basis_grad, sh::PoleMode::kClamp);
      Vec3 df_dn[3] = {Vec3{}, Vec3{}, Vec3{}};
      for (int i = 0; i < count; ++i) {
        const Vec3 g = kernel[i] * basis_grad[i];
        df_dn[0] += lighting.at(i, 0) * g;
        df_dn[1] += lighting.at(i, 1) * g;
        df_dn[2] += lighting.at(i, 2) * g;
      }
      const Vec3 rho = mesh.albedo.empty() ? Vec3{0.75, 0.75, 0.75} : mesh.albedo[f];
      FaceBlocks blocks;
      for (int corner = 0; corner < 3; ++corner) {
        const Mat3 dn_dv = normal_jacobian(mesh, f, corner);
        for (int c = 0; c < 3; ++c) {
          const Vec3 row = rho[c] * transposed_mul(dn_dv, df_dn[c]);
          for (int a = 0; a < 3; ++a) blocks.block[corner].m[c][a] = row[a];
        }
      }
      it = cache.emplace(f, blocks).first;
    }
    jac.pixels.push_back(static_cast<std::int32_t>(p));
    for (int corner = 0; corner < 3; ++corner) {
      jac.corners.push_back(mesh.faces[f][corner]);
      jac.blocks.push_back(it->second.block[corner]);
    }
  }
  return jac;
}

Image VertexJacobian::apply(const std::vector<Vec3>& vertex_delta) const {
  Image img(width, height);
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    Vec3 acc{};
    for (int corner = 0; corner < 3; ++corner) {
      const std::size_t e = 3 * k + corner;
      acc += blocks[e] * vertex_delta[corners[e]];
    }
    img.set_pixel(pixels[k], acc);
  }
  return img;
}

std::vector<Vec3> VertexJacobian::grad(const Image& d_cost_d_image,
                                       std::size_t vertex_count) const {
  if (d_cost_d_image.width != width || d_cost_d_image.height != height)
    throw std::invalid_argument("VertexJacobian: image shape mismatch");
  std::vector<Vec3> g(vertex_count, Vec3{});
  for (std::size_t k = 0; k < pixels.size(); ++k) {
    const Vec3 d = d_cost_d_image.pixel(pixels[k]);
    for (int corner = 0; corner < 3; ++corner) {
      const std::size_t e = 3 * k + corner;
      g[corners[e]] += transposed_mul(blocks[e], d);
    }
  }
  return g;
}

std::size_t VertexJacobian::byte_size() const {
  return pixels.size() * sizeof(std::int32_t) + corners.size() * sizeof(std::uint32_t) +
         blocks.size() * sizeof(Mat3);
}

}  // namespace lambert
