#include "lambert/fixtures.hpp"

#include <cmath>
#include <map>

#include "lambert/shading.hpp"

namespace lambert::fixtures {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TriMesh make_icosphere(int subdivisions, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                   {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                   {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  mesh.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  mesh.albedo.assign(mesh.faces.size(), Vec3{0.75, 0.75, 0.75});
  mesh = midpoint_subdivide(mesh, subdivisions);
  for (Vec3& v : mesh.vertices) v = radius * normalized(v);
  return mesh;
}

TriMesh make_box(const Vec3& half) {
  TriMesh mesh;
  for (int i = 0; i < 8; ++i)
    mesh.vertices.push_back({(i & 1) ? half.x : -half.x, (i & 2) ? half.y : -half.y,
                             (i & 4) ? half.z : -half.z});
  // Quads with outward CCW winding, fan-split.
  const int quads[6][4] = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4},
                           {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
  for (const auto& q : quads) {
    mesh.faces.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[1]),
                          static_cast<std::uint32_t>(q[2])});
    mesh.faces.push_back({static_cast<std::uint32_t>(q[0]), static_cast<std::uint32_t>(q[2]),
                          static_cast<std::uint32_t>(q[3])});
  }
  mesh.albedo.assign(mesh.faces.size(), Vec3{0.75, 0.75, 0.75});
  return mesh;
}

TriMesh make_pyramid(double base_half, double height) {
  TriMesh mesh;
  mesh.vertices = {{-base_half, -base_half, -height / 2},
                   {base_half, -base_half, -height / 2},
                   {base_half, base_half, -height / 2},
                   {-base_half, base_half, -height / 2},
                   {0, 0, height / 2}};
  mesh.faces = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}, {0, 2, 1}, {0, 3, 2}};
  mesh.albedo.assign(mesh.faces.size(), Vec3{0.75, 0.75, 0.75});
  return mesh;
}

TriMesh make_disk(int segments, double radius) {
  TriMesh mesh;
  mesh.vertices.push_back({0, 0, 0});
  for (int s = 0; s < segments; ++s) {
    const double a = 2.0 * kPi * s / segments;
    mesh.vertices.push_back({radius * std::cos(a), radius * std::sin(a), 0.0});
  }
  for (int s = 0; s < segments; ++s) {
    mesh.faces.push_back({0, static_cast<std::uint32_t>(1 + s),
                          static_cast<std::uint32_t>(1 + (s + 1) % segments)});
  }
  mesh.albedo.assign(mesh.faces.size(), Vec3{0.75, 0.75, 0.75});
  return mesh;
}

TriMesh make_random_soup(int faces, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  TriMesh mesh;
  while (static_cast<int>(mesh.faces.size()) < faces) {
    const Vec3 a{coord(rng), coord(rng), coord(rng)};
    const Vec3 b{coord(rng), coord(rng), coord(rng)};
    const Vec3 c{coord(rng), coord(rng), coord(rng)};
    if (0.5 * norm(cross(b - a, c - a)) < 1e-3) continue;
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    mesh.vertices.push_back(a);
    mesh.vertices.push_back(b);
    mesh.vertices.push_back(c);
    mesh.faces.push_back({base, base + 1, base + 2});
  }
  mesh.albedo.assign(mesh.faces.size(), Vec3{0.75, 0.75, 0.75});
  return mesh;
}

ShCoeffs make_studio_lighting(int bands) {
  // Warm lobe from high +x, cool fill from -y, projected analytically from
  // two clamped-direction lobes; smooth and strictly positive.
  ShCoeffs coeffs(bands);
  const Vec3 key = normalized(Vec3{0.8, 0.3, 1.0});
  const Vec3 fill = normalized(Vec3{-0.4, -1.0, 0.4});
  const Vec3 key_color{1.1, 1.0, 0.85};
  const Vec3 fill_color{0.35, 0.42, 0.55};
  const double ambient = 0.85;

  const std::vector<double> key_basis = sh::basis_all(key, bands);
  const std::vector<double> fill_basis = sh::basis_all(fill, bands);
  for (int l = 0; l <= bands; ++l) {
    // Reuse the clamped-cosine spectrum as a smooth, decaying lobe profile.
    const double lobe = std::sqrt(4.0 * kPi / (2.0 * l + 1.0)) * clamped_cosine_zonal(l);
    for (int m = -l; m <= l; ++m) {
      const int i = sh::index(l, m);
      for (int c = 0; c < 3; ++c)
        coeffs.at(i, c) = lobe * (key_color[c] * key_basis[i] + fill_color[c] * fill_basis[i]);
    }
  }
  for (int c = 0; c < 3; ++c) coeffs.at(0, c) += ambient;
  return coeffs;
}

std::vector<Scene> make_shape_bank(const BankOptions& options, bool three_classes,
                                   int geometry_subdivisions) {
  std::vector<TriMesh> shapes;
  shapes.push_back(make_icosphere(geometry_subdivisions, 0.85));
  shapes.push_back(midpoint_subdivide(make_box({0.62, 0.62, 0.62}), geometry_subdivisions));
  if (three_classes)
    shapes.push_back(midpoint_subdivide(make_pyramid(), geometry_subdivisions));

  const ShCoeffs lighting = make_studio_lighting();
  std::vector<Scene> bank;
  const std::vector<Camera> ring =
      camera_ring(options.views, options.zenith, options.camera_radius,
                  CameraKind::kOrthographic, options.fov, options.resolution,
                  options.resolution);
  for (std::size_t shape = 0; shape < shapes.size(); ++shape) {
    for (int view = 0; view < options.views; ++view) {
      for (double gray : options.grays) {
        Scene scene;
        scene.mesh = shapes[shape];
        scene.lighting = lighting;
        scene.cameras = {ring[view]};
        scene.background_color = {gray, gray, gray};
        scene.label = static_cast<int>(shape);
        bank.push_back(std::move(scene));
      }
    }
  }
  return bank;
}

std::vector<Sample> render_bank(const std::vector<Scene>& bank) {
  std::vector<Sample> samples;
  samples.reserve(bank.size());
  for (const Scene& scene : bank)
    samples.push_back({scene.render_view(0), scene.label.value_or(0)});
  return samples;
}

std::vector<Sample> render_bank_random_lighting(const std::vector<Scene>& bank,
                                                double amplitude, int per_scene,
                                                std::mt19937_64& rng) {
  std::uniform_real_distribution<double> offset(-amplitude, amplitude);
  std::vector<Sample> samples;
  samples.reserve(bank.size() * per_scene);
  for (const Scene& scene : bank) {
    const FragmentBuffer frags = scene.rasterize_view(0);
    const FaceNormals normals = face_normals(scene.mesh);
    for (int k = 0; k < per_scene; ++k) {
      ShCoeffs jittered = scene.lighting;
      for (double& v : jittered.data) v += offset(rng);
      samples.push_back(
          {shade(frags, normals, jittered, scene.mesh.albedo), scene.label.value_or(0)});
    }
  }
  return samples;
}

AugmentFn random_lighting_augmenter(std::vector<Scene> bank, double amplitude) {
  return [bank = std::move(bank), amplitude](const ToyClassifier&, int, int count,
                                             std::mt19937_64& rng) {
    std::uniform_real_distribution<double> offset(-amplitude, amplitude);
    std::vector<Sample> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
      const Scene& scene = bank[rng() % bank.size()];
      ShCoeffs jittered = scene.lighting;
      for (double& v : jittered.data) v += offset(rng);
      out.push_back({shade(scene.rasterize_view(0), face_normals(scene.mesh), jittered,
                           scene.mesh.albedo),
                     scene.label.value_or(0)});
    }
    return out;
  };
}

AugmentFn adversarial_lighting_augmenter(std::vector<Scene> bank, double epsilon,
                                         double step_size, int max_iterations) {
  return [bank = std::move(bank), epsilon, step_size, max_iterations](
             const ToyClassifier& current, int, int count, std::mt19937_64& rng) {
    ToyGradientSource source(current);
    std::vector<Sample> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
      const Scene& scene = bank[rng() % bank.size()];
      AttackConfig config;
      config.space = ParamSpace::kLighting;
      config.label_decrease = scene.label.value_or(0);
      config.epsilon = epsilon;
      config.step_size = step_size;
      config.max_iterations = max_iterations;
      const AttackTrace trace = run_attack(scene, source, config);
      out.push_back({shade(scene.rasterize_view(0), face_normals(scene.mesh),
                           trace.final_lighting, scene.mesh.albedo),
                     scene.label.value_or(0)});
    }
    return out;
  };
}

}  // namespace lambert::fixtures
