#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "json.hpp"
#include "lambert/attack.hpp"
#include "lambert/fixtures.hpp"

using namespace lambert;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

Scene tiny_scene(int res = 16, int views = 2) {
  Scene scene;
  scene.mesh = fixtures::make_icosphere(2, 0.8);
  scene.lighting = fixtures::make_studio_lighting();
  scene.cameras = camera_ring(views, kPi / 3.0, 2.2, CameraKind::kOrthographic, 2.4, res, res);
  scene.background_color = {0.5, 0.5, 0.5};
  scene.label = 0;
  return scene;
}

// A fixed pixel functional: dC/dI is a constant image, probabilities are a
// fixed valid distribution. Lets the chain rule be checked in closed form.
class LinearSource final : public GradientSource {
 public:
  LinearSource(Image weights, int classes) : weights_(std::move(weights)), classes_(classes) {}
  int num_classes() const override { return classes_; }
  Eval evaluate(const Image&, int, std::optional<int>) override {
    return {std::vector<double>(classes_, 1.0 / classes_), weights_};
  }

 private:
  Image weights_;
  int classes_;
};

Image random_weights(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Image img(w, h);
  for (double& v : img.data) v = gauss(rng);
  return img;
}

}  // namespace

TEST_CASE("cost: closed-form values and validation") {
  std::vector<double> onehot(5, 0.0);
  onehot[2] = 1.0;
  CHECK(cost(onehot, 2) == doctest::Approx(0.0));

  const std::vector<double> uniform(10, 0.1);
  CHECK(cost(uniform, 4) == doctest::Approx(-2.302585).epsilon(1e-6));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.1, 1.0);
  std::vector<double> probs(6);
  double sum = 0.0;
  for (double& p : probs) sum += (p = v(rng));
  for (double& p : probs) p /= sum;
  CHECK(cost(probs, 3, 3) == 0.0);  // matching labels cancel exactly

  std::vector<double> bad = probs;
  bad[0] += 0.1;
  CHECK_THROWS_AS(cost(bad, 0), std::invalid_argument);
  CHECK_THROWS_AS(cost(probs, 9), std::invalid_argument);
}

TEST_CASE("project_norm_ball clamps componentwise") {
  ShCoeffs init(2), cur(2);
  cur.at(1, 0, 0) = 0.3;
  CHECK(project_norm_ball(cur, init, kInf).at(1, 0, 0) == 0.3);
  CHECK(project_norm_ball(cur, init, 0.1).at(1, 0, 0) == doctest::Approx(0.1));

  const std::vector<Vec3> v0 = {{0, 0, 0}, {1, 1, 1}};
  const std::vector<Vec3> v1 = {{0.005, -0.005, 0.001}, {1.005, 1.0, 0.9}};
  const auto proj = project_norm_ball(v1, v0, 0.002);
  CHECK(proj[0].x == doctest::Approx(0.002));
  CHECK(proj[0].y == doctest::Approx(-0.002));
  CHECK(proj[0].z == doctest::Approx(0.001));
  CHECK(proj[1].x == doctest::Approx(1.002));
  CHECK(proj[1].z == doctest::Approx(0.998));
}

TEST_CASE("lighting_step: zero gradient is the identity, gamma scales linearly") {
  const Scene scene = tiny_scene();
  const FragmentBuffer frags = scene.rasterize_view(0);
  const FaceNormals normals = face_normals(scene.mesh);
  const LightingJacobian jac = d_image_d_lighting(frags, normals, scene.mesh.albedo, 6);

  const Image zero(frags.width, frags.height);
  const ShCoeffs same = lighting_step(scene.lighting, scene.lighting, jac, zero, 0.05, 0.1);
  CHECK(same.data == scene.lighting.data);

  const Image w = random_weights(frags.width, frags.height, 7);
  const ShCoeffs once = lighting_step(scene.lighting, scene.lighting, jac, w, 0.05, kInf);
  const ShCoeffs twice = lighting_step(scene.lighting, scene.lighting, jac, w, 0.10, kInf);
  for (std::size_t i = 0; i < once.data.size(); ++i) {
    const double d1 = once.data[i] - scene.lighting.data[i];
    const double d2 = twice.data[i] - scene.lighting.data[i];
    CHECK(d2 == doctest::Approx(2.0 * d1).epsilon(1e-12).scale(std::max(1e-12, std::fabs(d1))));
  }
}

TEST_CASE("single-pixel lighting step follows the hand chain rule") {
  // One covered pixel with a known normal: delta U_{l,m} must be
  // gamma * dC/dI * rho * k_l * Y_l^m(n) per channel.
  TriMesh quad;
  quad.vertices = {{-3, -3, 0}, {3, -3, 0}, {3, 3, 0}, {-3, 3, 0}};
  quad.faces = {{0, 1, 2}, {0, 2, 3}};
  quad.albedo.assign(2, Vec3{0.6, 0.7, 0.8});
  Camera cam;
  cam.position = {0, 0, 2};
  cam.look_at = {0, 0, 0};
  cam.up = {0, 1, 0};
  cam.width = cam.height = 1;
  const FragmentBuffer frags = rasterize(quad, cam, Vec3{});
  REQUIRE(frags.covered_count() == 1);
  const FaceNormals normals = face_normals(quad);
  const LightingJacobian jac = d_image_d_lighting(frags, normals, quad.albedo, 6);

  Image dc(1, 1);
  dc.data = {0.5, -0.25, 1.5};
  const ShCoeffs u0 = fixtures::make_studio_lighting();
  const double gamma = 0.05;
  const ShCoeffs u1 = lighting_step(u0, u0, jac, dc, gamma, kInf);
  const Vec3 n = normals.n[frags.face[0]];
  const auto basis = sh::basis_all(n, 6);
  for (int l = 0; l <= 6; ++l) {
    for (int m = -l; m <= l; ++m) {
      for (int c = 0; c < 3; ++c) {
        const double expect =
            -gamma * dc.data[c] * quad.albedo[0][c] * shading_kernel(l) * basis[sh::index(l, m)];
        CHECK(u1.at(l, m, c) - u0.at(l, m, c) ==
              doctest::Approx(expect).epsilon(1e-12).scale(std::max(1e-12, std::fabs(expect))));
      }
    }
  }
}

TEST_CASE("multiview step is exactly the sum of per-view steps") {
  const Scene scene = tiny_scene(16, 2);
  const FaceNormals normals = face_normals(scene.mesh);
  const FragmentBuffer f0 = scene.rasterize_view(0);
  const FragmentBuffer f1 = scene.rasterize_view(1);
  const LightingJacobian j0 = d_image_d_lighting(f0, normals, scene.mesh.albedo, 6);
  const LightingJacobian j1 = d_image_d_lighting(f1, normals, scene.mesh.albedo, 6);
  const Image w0 = random_weights(16, 16, 11);
  const Image w1 = random_weights(16, 16, 13);

  const std::vector<ViewGradient> views = {{&j0, &w0}, {&j1, &w1}};
  const ShCoeffs multi =
      multiview_lighting_step(scene.lighting, scene.lighting, views, 0.05, kInf);
  const ShCoeffs s0 = lighting_step(scene.lighting, scene.lighting, j0, w0, 0.05, kInf);
  const ShCoeffs s1 = lighting_step(scene.lighting, scene.lighting, j1, w1, 0.05, kInf);
  for (std::size_t i = 0; i < multi.data.size(); ++i) {
    const double sum_steps =
        (s0.data[i] - scene.lighting.data[i]) + (s1.data[i] - scene.lighting.data[i]);
    CHECK(multi.data[i] - scene.lighting.data[i] == doctest::Approx(sum_steps).epsilon(1e-13));
  }

  // Duplicated view doubles the step; opposite gradients cancel.
  const std::vector<ViewGradient> dup = {{&j0, &w0}, {&j0, &w0}};
  const ShCoeffs doubled =
      multiview_lighting_step(scene.lighting, scene.lighting, dup, 0.05, kInf);
  Image neg = w0;
  neg *= -1.0;
  const std::vector<ViewGradient> cancel = {{&j0, &w0}, {&j0, &neg}};
  const ShCoeffs net = multiview_lighting_step(scene.lighting, scene.lighting, cancel, 0.05, kInf);
  for (std::size_t i = 0; i < multi.data.size(); ++i) {
    const double d1 = s0.data[i] - scene.lighting.data[i];
    CHECK(doubled.data[i] - scene.lighting.data[i] == doctest::Approx(2.0 * d1).epsilon(1e-13));
    CHECK(net.data[i] == doctest::Approx(scene.lighting.data[i]));
  }
}

TEST_CASE("geometry_step: identity on zero gradient, zero Jacobian for band-0 light") {
  const Scene scene = tiny_scene();
  const FragmentBuffer frags = scene.rasterize_view(0);
  const VertexJacobian jac = d_image_d_vertices(frags, scene.mesh, scene.lighting);
  const Image zero(frags.width, frags.height);
  const auto same = geometry_step(scene.mesh.vertices, scene.mesh.vertices, scene.mesh, jac,
                                  zero, 0.05, 0.002);
  CHECK(same == scene.mesh.vertices);

  ShCoeffs ambient(6);
  for (int c = 0; c < 3; ++c) ambient.at(0, 0, c) = 2.0;
  const VertexJacobian flat = d_image_d_vertices(frags, scene.mesh, ambient);
  const Image w = random_weights(frags.width, frags.height, 17);
  const auto unchanged = geometry_step(scene.mesh.vertices, scene.mesh.vertices, scene.mesh,
                                       flat, w, 0.05, kInf);
  for (std::size_t i = 0; i < unchanged.size(); ++i)
    CHECK(norm(unchanged[i] - scene.mesh.vertices[i]) <= 1e-15);
}

TEST_CASE("geometry_step rejects steps that keep faces degenerate") {
  // Topology already degenerate + zero gradient: every retry fails.
  TriMesh bad;
  bad.vertices = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}};
  bad.faces = {{0, 1, 2}};
  bad.albedo = {{0.75, 0.75, 0.75}};
  VertexJacobian jac;
  jac.width = jac.height = 1;
  jac.pixels = {0};
  jac.corners = {0, 1, 2};
  jac.blocks.assign(3, Mat3{});
  Image zero(1, 1);
  CHECK_THROWS_WITH_AS(
      geometry_step(bad.vertices, bad.vertices, bad, jac, zero, 0.05, kInf),
      doctest::Contains("degenerate"), std::runtime_error);
}

TEST_CASE("first lighting step against a linear functional is exactly quadratic-model") {
  const Scene scene = tiny_scene(16, 1);
  const FragmentBuffer frags = scene.rasterize_view(0);
  const FaceNormals normals = face_normals(scene.mesh);
  const LightingJacobian jac = d_image_d_lighting(frags, normals, scene.mesh.albedo, 6);
  const Image w = random_weights(16, 16, 19);

  const double gamma = 0.05;
  const ShCoeffs u1 = lighting_step(scene.lighting, scene.lighting, jac, w, gamma, kInf);
  const Image before = shade(frags, normals, scene.lighting, scene.mesh.albedo);
  const Image after = shade(frags, normals, u1, scene.mesh.albedo);

  double delta_cost = 0.0;  // C = <w, I>
  for (std::size_t i = 0; i < w.data.size(); ++i)
    delta_cost += w.data[i] * (after.data[i] - before.data[i]);

  const ShCoeffs g = jac.grad(w);
  double norm2_g = 0.0;
  for (double v : g.data) norm2_g += v * v;
  // Linear cost + linear lighting map: the decrease is -gamma |J^T w|^2.
  CHECK(delta_cost == doctest::Approx(-gamma * norm2_g).epsilon(1e-10));
  CHECK(delta_cost < 0.0);
}

TEST_CASE("run_attack: single iteration records one step and stays in the ball") {
  const Scene scene = tiny_scene(12, 1);
  ToyGradientSource clf(ToyClassifier::random_init(12, 12, 3, 8, 23));
  const auto initial = clf.evaluate(scene.render_view(0), 0, std::nullopt);
  const int label = static_cast<int>(
      std::max_element(initial.probabilities.begin(), initial.probabilities.end()) -
      initial.probabilities.begin());

  AttackConfig config;
  config.label_decrease = label;
  config.max_iterations = 1;
  config.space = ParamSpace::kLighting;
  config.epsilon = 0.1;
  const AttackTrace trace = run_attack(scene, clf, config);
  CHECK(trace.iterations.size() == 1);
  CHECK_FALSE(trace.fooled);
  CHECK(trace.final_lighting.data == scene.lighting.data);
  CHECK(trace.iterations[0].linf_distance == 0.0);
}

TEST_CASE("run_attack: norm-ball feasibility and monotone first step") {
  for (const ParamSpace space : {ParamSpace::kLighting, ParamSpace::kGeometry}) {
    const Scene scene = tiny_scene(12, 1);
    ToyGradientSource clf(ToyClassifier::random_init(12, 12, 3, 8, 29));
    const auto initial = clf.evaluate(scene.render_view(0), 0, std::nullopt);
    const int label = static_cast<int>(
        std::max_element(initial.probabilities.begin(), initial.probabilities.end()) -
        initial.probabilities.begin());

    AttackConfig config;
    config.label_decrease = label;
    config.space = space;
    config.epsilon = space == ParamSpace::kLighting ? 0.1 : 0.002;
    config.step_size = 1e-4;
    config.max_iterations = 4;
    const AttackTrace trace = run_attack(scene, clf, config);
    REQUIRE(trace.iterations.size() >= 2);
    CHECK(trace.iterations[1].cost <= trace.iterations[0].cost + 1e-12);
    for (const IterationRecord& rec : trace.iterations)
      CHECK(rec.linf_distance <= config.epsilon + 1e-12);
  }
}

TEST_CASE("run_attack: skylight parameters stay in range") {
  Scene scene = tiny_scene(12, 1);
  auto fit = std::make_shared<SkylightFit>(
      load_skylight_fit(std::string(LAMBERT_DATA_DIR) + "/skylight/preetham.psky"));
  scene.source = LightingSource::kSkylight;
  scene.skylight_params = {0.7, 1.3, 3.0};
  scene.skylight_fit = fit;
  scene.lighting = skylight_sh(scene.skylight_params, *fit);

  ToyGradientSource clf(ToyClassifier::random_init(12, 12, 3, 8, 31));
  const auto initial = clf.evaluate(scene.render_view(0), 0, std::nullopt);
  const int label = static_cast<int>(
      std::max_element(initial.probabilities.begin(), initial.probabilities.end()) -
      initial.probabilities.begin());

  AttackConfig config;
  config.label_decrease = label;
  config.space = ParamSpace::kSkylight;
  config.epsilon = kInf;
  config.step_size = 0.05;
  config.max_iterations = 8;
  const AttackTrace trace = run_attack(scene, clf, config);
  CHECK(trace.final_skylight.theta_s >= 0.0);
  CHECK(trace.final_skylight.theta_s <= kPi / 2.0);
  CHECK(trace.final_skylight.turbidity >= 1.0);
  CHECK(trace.final_skylight.turbidity <= kSkylightTauMax);
}

TEST_CASE("run_attack surfaces classifier failures with the iteration index") {
  class FailingSource final : public GradientSource {
   public:
    int num_classes() const override { return 3; }
    Eval evaluate(const Image&, int, std::optional<int>) override {
      throw std::runtime_error("provider exploded");
    }
  };
  const Scene scene = tiny_scene(8, 1);
  FailingSource clf;
  AttackConfig config;
  config.label_decrease = 0;
  CHECK_THROWS_WITH_AS(run_attack(scene, clf, config), doctest::Contains("iteration 1"),
                       std::runtime_error);
}

TEST_CASE("trace serialization emits one JSON record per iteration") {
  const Scene scene = tiny_scene(12, 1);
  ToyGradientSource clf(ToyClassifier::random_init(12, 12, 3, 8, 37));
  AttackConfig config;
  config.label_decrease = 0;
  config.max_iterations = 3;
  const AttackTrace trace = run_attack(scene, clf, config);
  const auto path = std::filesystem::temp_directory_path() / "lambert_trace.jsonl";
  save_trace_jsonl(trace, path.string());

  std::ifstream in(path);
  std::string line;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j.contains("iteration"));
    CHECK(j.contains("cost"));
    CHECK(j.contains("linf_distance"));
    CHECK(j.contains("fooled"));
    ++rows;
  }
  CHECK(rows == trace.iterations.size());
}
