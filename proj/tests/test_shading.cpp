#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "lambert/fixtures.hpp"
#include "lambert/quadrature.hpp"
#include "lambert/shading.hpp"
#include "support/oracles.hpp"

using namespace lambert;

namespace {

constexpr double kPi = 3.14159265358979323846;

Camera front_ortho(int res, double fov = 2.0) {
  Camera cam;
  cam.position = {0, 0, 3};
  cam.look_at = {0, 0, 0};
  cam.up = {0, 1, 0};
  cam.fov = fov;
  cam.width = cam.height = res;
  return cam;
}

TriMesh full_quad(double albedo_value = 1.0) {
  TriMesh mesh;
  mesh.vertices = {{-3, -3, 0}, {3, -3, 0}, {3, 3, 0}, {-3, 3, 0}};
  mesh.faces = {{0, 1, 2}, {0, 2, 3}};
  mesh.albedo.assign(2, Vec3{albedo_value, albedo_value, albedo_value});
  return mesh;
}

ShCoeffs uniform_unit_environment(int bands = kDefaultBands) {
  ShCoeffs u(bands);
  for (int c = 0; c < 3; ++c) u.at(0, 0, c) = 2.0 * std::sqrt(kPi);
  return u;
}

ShCoeffs random_lighting(int bands, std::mt19937_64& rng, double amplitude = 0.4) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ShCoeffs u(bands);
  for (int l = 0; l <= bands; ++l)
    for (int m = -l; m <= l; ++m)
      for (int c = 0; c < 3; ++c)
        u.at(l, m, c) = amplitude * gauss(rng) / ((1.0 + l) * (1.0 + l));
  for (int c = 0; c < 3; ++c) u.at(0, 0, c) += 2.5;
  return u;
}

}  // namespace

TEST_CASE("uniform unit environment shades to albedo * pi") {
  std::mt19937_64 rng(71);
  const TriMesh mesh = fixtures::make_random_soup(30, rng);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(32), Vec3{});
  const Image img = shade(frags, face_normals(mesh), uniform_unit_environment(), mesh.albedo);
  REQUIRE(frags.covered_count() > 0);
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    if (!frags.covered(p)) continue;
    for (int c = 0; c < 3; ++c)
      CHECK(img.data[p * 3 + c] == doctest::Approx(0.75 * kPi).epsilon(1e-9));
  }
}

TEST_CASE("zero lighting and zero albedo force black foreground") {
  const TriMesh mesh = full_quad();
  const FragmentBuffer frags = rasterize(mesh, front_ortho(8), Vec3{0.3, 0.3, 0.3});
  const FaceNormals normals = face_normals(mesh);

  const Image black = shade(frags, normals, ShCoeffs(6), mesh.albedo);
  for (std::size_t p = 0; p < frags.pixel_count(); ++p)
    for (int c = 0; c < 3; ++c) CHECK(black.data[p * 3 + c] == 0.0);

  std::mt19937_64 rng(73);
  TriMesh dark = full_quad(0.0);
  const Image zero_rho = shade(frags, normals, random_lighting(6, rng), dark.albedo);
  for (double v : zero_rho.data) CHECK(v == 0.0);
}

TEST_CASE("background pixels copy the background") {
  std::mt19937_64 rng(79);
  const TriMesh mesh = fixtures::make_icosphere(2, 0.5);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(24), Vec3{0.1, 0.2, 0.3});
  const Image img = shade(frags, face_normals(mesh), random_lighting(6, rng), mesh.albedo);
  bool saw_background = false;
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    if (frags.covered(p)) continue;
    saw_background = true;
    CHECK(img.data[p * 3 + 0] == doctest::Approx(0.1));
    CHECK(img.data[p * 3 + 2] == doctest::Approx(0.3));
  }
  CHECK(saw_background);
}

TEST_CASE("shading is exactly linear in the lighting") {
  std::mt19937_64 rng(83);
  const TriMesh mesh = fixtures::make_icosphere(2, 0.8);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(32), Vec3{});
  const FaceNormals normals = face_normals(mesh);
  const ShCoeffs u1 = random_lighting(6, rng);
  const ShCoeffs u2 = random_lighting(6, rng);
  const double alpha = 0.7, beta = -1.3;

  const Image combined = shade(frags, normals, alpha * u1 + beta * u2, mesh.albedo);
  Image mixed = shade(frags, normals, u1, mesh.albedo);
  mixed *= alpha;
  Image part2 = shade(frags, normals, u2, mesh.albedo);
  part2 *= beta;
  mixed += part2;
  // Background pixels are affine (copied), not linear; compare foreground.
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    if (!frags.covered(p)) continue;
    for (int c = 0; c < 3; ++c)
      CHECK(combined.data[p * 3 + c] ==
            doctest::Approx(mixed.data[p * 3 + c]).epsilon(1e-13).scale(1.0));
  }
}

TEST_CASE("lighting Jacobian reproduces shading differences to machine precision") {
  std::mt19937_64 rng(89);
  const TriMesh mesh = fixtures::make_icosphere(2, 0.8);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(32), Vec3{});
  const FaceNormals normals = face_normals(mesh);
  const ShCoeffs u = random_lighting(6, rng);
  const ShCoeffs delta = random_lighting(6, rng, 0.05);

  const LightingJacobian jac = d_image_d_lighting(frags, normals, mesh.albedo, 6);
  const Image predicted = jac.apply(delta);
  const Image actual = shade(frags, normals, u + delta, mesh.albedo) -
                       shade(frags, normals, u, mesh.albedo);
  double worst = 0.0;
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    if (!frags.covered(p)) continue;
    for (int c = 0; c < 3; ++c) {
      const double scale = std::max(1e-9, std::fabs(actual.data[p * 3 + c]));
      worst = std::max(worst,
                       std::fabs(predicted.data[p * 3 + c] - actual.data[p * 3 + c]) / scale);
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("lighting Jacobian: empty frame and single-pixel entry") {
  const FragmentBuffer empty = rasterize(TriMesh{}, front_ortho(8), Vec3{});
  const LightingJacobian none = d_image_d_lighting(empty, FaceNormals{}, {}, 6);
  CHECK(none.pixels.empty());
  CHECK(none.byte_size() == 0);

  const TriMesh quad = full_quad(1.0);  // normal (0,0,1), albedo 1
  const FragmentBuffer one = rasterize(quad, front_ortho(1), Vec3{});
  const LightingJacobian jac = d_image_d_lighting(one, face_normals(quad), quad.albedo, 6);
  REQUIRE(jac.pixels.size() == 1);
  const Vec3 entry = jac.entry(0, sh::index(0, 0));
  CHECK(entry.x == doctest::Approx(0.8862269).epsilon(1e-6));
}

TEST_CASE("albedo Jacobian: uniform environment entries and FD check") {
  std::mt19937_64 rng(97);
  const TriMesh mesh = fixtures::make_icosphere(1, 0.8);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(24), Vec3{});
  const FaceNormals normals = face_normals(mesh);

  const AlbedoJacobian uniform = d_image_d_albedo(frags, normals, uniform_unit_environment());
  for (const Vec3& f : uniform.factor) {
    CHECK(f.x == doctest::Approx(kPi).epsilon(1e-9));
    CHECK(f.z == doctest::Approx(kPi).epsilon(1e-9));
  }

  // Scaling the lighting scales every entry.
  const ShCoeffs u = random_lighting(6, rng);
  const AlbedoJacobian a1 = d_image_d_albedo(frags, normals, u);
  const AlbedoJacobian a2 = d_image_d_albedo(frags, normals, 2.0 * u);
  for (std::size_t k = 0; k < a1.factor.size(); ++k)
    CHECK(norm(a2.factor[k] - 2.0 * a1.factor[k]) <= 1e-12 * std::max(1.0, norm(a1.factor[k])));

  // The albedo map is linear; FD at any step reproduces it to roundoff.
  const std::size_t face = static_cast<std::size_t>(a1.faces[a1.faces.size() / 2]);
  const double h = 1e-4;
  std::vector<Vec3> plus = mesh.albedo, minus = mesh.albedo;
  plus[face].x += h;
  minus[face].x -= h;
  const Image diff =
      shade(frags, normals, u, plus) - shade(frags, normals, u, minus);
  std::vector<Vec3> delta(mesh.face_count(), Vec3{});
  delta[face] = {2.0 * h, 0.0, 0.0};
  const Image predicted = a1.apply(delta);
  for (std::size_t i = 0; i < diff.data.size(); ++i)
    CHECK(std::fabs(diff.data[i] - predicted.data[i]) <= 1e-9);
}

TEST_CASE("vertex Jacobian: translation invariance and band-0 kill") {
  std::mt19937_64 rng(101);
  const TriMesh mesh = fixtures::make_icosphere(2, 0.8);
  const FragmentBuffer frags = rasterize(mesh, front_ortho(32), Vec3{});
  const ShCoeffs u = random_lighting(6, rng);

  const VertexJacobian jac = d_image_d_vertices(frags, mesh, u);
  const std::vector<Vec3> shift(mesh.vertex_count(), Vec3{0.37, -0.81, 0.44});
  const Image moved = jac.apply(shift);
  CHECK(moved.max_abs() <= 1e-10);

  const VertexJacobian flat = d_image_d_vertices(frags, mesh, uniform_unit_environment());
  for (const Mat3& b : flat.blocks)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) CHECK(std::fabs(b.m[r][c]) <= 1e-12);
}

TEST_CASE("vertex Jacobian matches frozen-visibility finite differences") {
  std::mt19937_64 rng(103);
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    TriMesh mesh = fixtures::make_random_soup(25, rng);
    // Keep clear of the formula's polar region.
    bool polar = false;
    for (const Vec3& n : face_normals(mesh).n)
      if (std::fabs(n.z) > 0.99) polar = true;
    if (polar) continue;

    const FragmentBuffer frags = rasterize(mesh, front_ortho(32), Vec3{});
    if (frags.covered_count() == 0) continue;
    const ShCoeffs u = random_lighting(6, rng);
    const VertexJacobian jac = d_image_d_vertices(frags, mesh, u);

    std::uniform_int_distribution<std::size_t> pick(0, mesh.vertex_count() - 1);
    for (int probe = 0; probe < 4; ++probe) {
      const std::size_t v = pick(rng);
      const int axis = static_cast<int>(rng() % 3);
      TriMesh plus = mesh, minus = mesh;
      plus.vertices[v][axis] += h;
      minus.vertices[v][axis] -= h;
      const Image fd = shade(frags, face_normals(plus), u, mesh.albedo) -
                       shade(frags, face_normals(minus), u, mesh.albedo);
      std::vector<Vec3> delta(mesh.vertex_count(), Vec3{});
      delta[v][axis] = 2.0 * h;
      const Image predicted = jac.apply(delta);
      double worst = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < fd.data.size(); ++i) {
        worst = std::max(worst, std::fabs(fd.data[i] - predicted.data[i]));
        scale = std::max(scale, std::fabs(fd.data[i]));
      }
      CHECK(worst <= 1e-4 * std::max(scale, 1e-9));
    }
  }
}

TEST_CASE("Jacobian storage is proportional to covered pixels") {
  std::mt19937_64 rng(107);
  const TriMesh mesh = fixtures::make_icosphere(3, 0.8);
  const ShCoeffs u = random_lighting(6, rng);
  const FaceNormals normals = face_normals(mesh);

  std::size_t prev_covered = 0, prev_light = 0, prev_vertex = 0, prev_albedo = 0;
  for (int res : {32, 64, 128}) {
    const FragmentBuffer frags = rasterize(mesh, front_ortho(res), Vec3{});
    const std::size_t covered = frags.covered_count();
    const LightingJacobian lj = d_image_d_lighting(frags, normals, mesh.albedo, 6);
    const VertexJacobian vj = d_image_d_vertices(frags, mesh, u);
    const AlbedoJacobian aj = d_image_d_albedo(frags, normals, u);
    if (prev_covered != 0) {
      // Exactly linear: constant bytes per covered pixel.
      CHECK(lj.byte_size() * prev_covered == prev_light * covered);
      CHECK(vj.byte_size() * prev_covered == prev_vertex * covered);
      CHECK(aj.byte_size() * prev_covered == prev_albedo * covered);
    }
    prev_covered = covered;
    prev_light = lj.byte_size();
    prev_vertex = vj.byte_size();
    prev_albedo = aj.byte_size();
  }
}

TEST_CASE("order-2 SH shading tracks direct hemisphere quadrature on a sphere") {
  std::mt19937_64 rng(109);
  const TriMesh sphere = fixtures::make_icosphere(4, 0.85);  // 5120 faces
  REQUIRE(sphere.face_count() >= 5000);
  const ShCoeffs env = random_lighting(6, rng, 0.5);
  const FragmentBuffer frags = rasterize(sphere, front_ortho(64, 2.2), Vec3{});
  const FaceNormals normals = face_normals(sphere);

  auto env_radiance = [&](const Vec3& w, int channel) {
    const auto basis = sh::basis_all(w, 6);
    double acc = 0.0;
    for (int i = 0; i < sh::coeff_count(6); ++i) acc += env.at(i, channel) * basis[i];
    return acc;
  };

  // Direct reference per covered face (flat shading shares it per pixel).
  std::map<std::int32_t, Vec3> reference;
  for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
    if (!frags.covered(p)) continue;
    const std::int32_t f = frags.face[p];
    if (reference.count(f)) continue;
    Vec3 value{};
    for (int c = 0; c < 3; ++c) {
      value[c] = 0.75 * integrate_hemisphere(
                            normals.n[f],
                            [&](const Vec3& w) {
                              return env_radiance(w, c) * dot(w, normals.n[f]);
                            },
                            32, 64);
    }
    reference[f] = value;
  }

  auto mean_error = [&](int bands) {
    ShCoeffs truncated(bands);
    for (int l = 0; l <= bands; ++l)
      for (int m = -l; m <= l; ++m)
        for (int c = 0; c < 3; ++c) truncated.at(l, m, c) = env.at(l, m, c);
    const Image img = shade(frags, normals, truncated, sphere.albedo);
    double total = 0.0, peak = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < frags.pixel_count(); ++p) {
      if (!frags.covered(p)) continue;
      const Vec3 ref = reference[frags.face[p]];
      for (int c = 0; c < 3; ++c) {
        total += std::fabs(img.data[p * 3 + c] - ref[c]);
        peak = std::max(peak, std::fabs(ref[c]));
        ++count;
      }
    }
    return std::pair{total / static_cast<double>(count), peak};
  };

  const auto [err2, peak] = mean_error(2);
  const auto [err6, peak6] = mean_error(6);
  CHECK(err2 <= 0.05 * peak);
  CHECK(err6 < err2);
}

TEST_CASE("shade rejects out-of-range band counts") {
  const TriMesh mesh = full_quad();
  const FragmentBuffer frags = rasterize(mesh, front_ortho(4), Vec3{});
  ShCoeffs too_big(17);
  CHECK_THROWS_AS(shade(frags, face_normals(mesh), too_big, mesh.albedo),
                  std::invalid_argument);
}
