#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "lambert/lighting.hpp"
#include "lambert/quadrature.hpp"
#include "support/oracles.hpp"

using namespace lambert;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("clamped cosine zonal coefficients") {
  CHECK(clamped_cosine_zonal(0) == doctest::Approx(0.8862269).epsilon(1e-6));
  CHECK(clamped_cosine_zonal(0) == doctest::Approx(std::sqrt(kPi) / 2.0));
  CHECK(clamped_cosine_zonal(1) == doctest::Approx(1.0233267).epsilon(1e-6));
  CHECK(clamped_cosine_zonal(1) == doctest::Approx(std::sqrt(kPi / 3.0)));
  CHECK(clamped_cosine_zonal(3) == 0.0);
  CHECK(clamped_cosine_zonal(5) == 0.0);
  CHECK(clamped_cosine_zonal(2) == doctest::Approx(0.4954159).epsilon(1e-6));
  CHECK(clamped_cosine_zonal(2) == doctest::Approx(std::sqrt(5.0 * kPi) / 8.0));
}

TEST_CASE("zonal coefficients match direct quadrature at the pole") {
  // G~_l = integral of max(w.z, 0) Y_l^0(w).
  for (int l = 0; l <= 6; ++l) {
    const double direct = oracles::clamped_cosine_projection(
        {0, 0, 1}, [&](const Vec3& w) { return sh::basis(l, 0, w); });
    CHECK(direct == doctest::Approx(clamped_cosine_zonal(l)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("rotate_zonal_to_normal at the pole reduces to the zonal values") {
  const auto g = rotate_zonal_to_normal({0, 0, 1}, 6);
  for (int l = 0; l <= 6; ++l) {
    CHECK(g[sh::index(l, 0)] == doctest::Approx(clamped_cosine_zonal(l)).epsilon(1e-12));
    for (int m = -l; m <= l; ++m)
      if (m != 0) CHECK(g[sh::index(l, m)] == doctest::Approx(0.0));
  }
  // Band 0 entry is independent of the normal.
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto any = rotate_zonal_to_normal(oracles::random_unit(rng), 2);
    CHECK(any[0] == doctest::Approx(0.8862269).epsilon(1e-6));
  }
}

TEST_CASE("rotate_zonal_to_normal matches quadrature for random normals") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 n = oracles::random_unit(rng);
    const auto got = rotate_zonal_to_normal(n, 6);
    for (int l = 0; l <= 6; ++l) {
      for (int m = -l; m <= l; ++m) {
        const double want = oracles::clamped_cosine_projection(
            n, [&](const Vec3& w) { return sh::basis(l, m, w); });
        CHECK(std::fabs(got[sh::index(l, m)] - want) <= 1e-6);
      }
    }
  }
}

TEST_CASE("project_environment: constant environment") {
  const EnvMap env(32, 4096, Vec3{1.0, 1.0, 1.0});
  const ShCoeffs u = project_environment(env, 6);
  CHECK(u.at(0, 0, 0) == doctest::Approx(3.5449077).epsilon(1e-7));
  CHECK(u.at(0, 0, 0) == doctest::Approx(2.0 * std::sqrt(kPi)).epsilon(1e-7));
  for (int l = 1; l <= 6; ++l)
    for (int m = -l; m <= l; ++m)
      for (int c = 0; c < 3; ++c) CHECK(std::fabs(u.at(l, m, c)) <= 1e-6);
}

TEST_CASE("project_environment recovers a sampled basis function") {
  const EnvMap env = EnvMap::from_function(256, 128, [](const Vec3& w) {
    const double v = sh::basis(1, 0, w);
    return Vec3{v, v, v};
  });
  const ShCoeffs u = project_environment(env, 3);
  CHECK(u.at(1, 0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  for (int l = 0; l <= 3; ++l)
    for (int m = -l; m <= l; ++m) {
      if (l == 1 && m == 0) continue;
      CHECK(std::fabs(u.at(l, m, 0)) <= 1e-3);
    }
}

TEST_CASE("project_environment is linear in radiance") {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> amp(0.0, 1.0);
  EnvMap env(16, 8);
  for (Vec3& t : env.texels) t = {amp(rng), amp(rng), amp(rng)};
  EnvMap doubled = env;
  for (Vec3& t : doubled.texels) t *= 2.0;
  const ShCoeffs a = project_environment(env, 4);
  const ShCoeffs b = project_environment(doubled, 4);
  for (std::size_t i = 0; i < a.data.size(); ++i)
    CHECK(b.data[i] == doctest::Approx(2.0 * a.data[i]).epsilon(1e-15));
}

TEST_CASE("project_environment converges with grid resolution") {
  // Smooth and vanishing at the poles; the midpoint rule's leading error is
  // the Euler-Maclaurin endpoint term, so polar radiance converges slowest.
  auto smooth = [](const Vec3& w) {
    const double ring = w.x * w.x + w.y * w.y;
    const double v = ring * (0.6 + 0.3 * w.x + 0.2 * w.y * w.z) + 0.1 * ring * ring;
    return Vec3{v, 0.5 * v, 0.25 * v + 0.05 * ring};
  };
  const ShCoeffs coarse = project_environment(EnvMap::from_function(256, 128, smooth), 6);
  const ShCoeffs fine = project_environment(EnvMap::from_function(1024, 512, smooth), 6);
  double worst = 0.0;
  for (std::size_t i = 0; i < coarse.data.size(); ++i)
    worst = std::max(worst, std::fabs(coarse.data[i] - fine.data[i]));
  CHECK(worst <= 1e-4);
}

TEST_CASE("sh coefficient file round trip") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  ShCoeffs coeffs(6);
  for (double& v : coeffs.data) v = amp(rng);
  const auto path = std::filesystem::temp_directory_path() / "lambert_test.shc";
  save_sh_coeffs(coeffs, path.string());
  const ShCoeffs back = load_sh_coeffs(path.string());
  REQUIRE(back.bands == coeffs.bands);
  for (std::size_t i = 0; i < coeffs.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(coeffs.data[i]).epsilon(1e-15));
}

TEST_CASE("pfm round trip") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> amp(0.0, 4.0);
  EnvMap env(8, 6);
  for (Vec3& t : env.texels) t = {amp(rng), amp(rng), amp(rng)};
  const auto path = std::filesystem::temp_directory_path() / "lambert_test.pfm";
  save_pfm(env, path.string());
  const EnvMap back = load_pfm(path.string());
  REQUIRE(back.width == env.width);
  REQUIRE(back.height == env.height);
  for (std::size_t i = 0; i < env.texels.size(); ++i)
    CHECK(norm(back.texels[i] - env.texels[i]) <= 1e-6);
}
