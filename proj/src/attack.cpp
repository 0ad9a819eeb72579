#include "lambert/attack.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace lambert {

namespace {

constexpr double kProbFloor = 1e-12;  // Eq-1 logs are undefined at zero

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double linf_diff(const ShCoeffs& a, const ShCoeffs& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i)
    m = std::max(m, std::fabs(a.data[i] - b.data[i]));
  return m;
}

double linf_diff(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int c = 0; c < 3; ++c) m = std::max(m, std::fabs(a[i][c] - b[i][c]));
  return m;
}

bool has_degenerate_face(const TriMesh& topology, const std::vector<Vec3>& vertices) {
  for (const auto& f : topology.faces) {
    const Vec3 a = vertices[f[0]];
    const double area = 0.5 * norm(cross(vertices[f[1]] - a, vertices[f[2]] - a));
    if (area <= kDegenerateFaceArea) return true;
  }
  return false;
}

}  // namespace

void AttackConfig::validate(std::size_t camera_count) const {
  if (step_size <= 0.0) throw std::invalid_argument("attack: step size must be > 0");
  if (epsilon < 0.0) throw std::invalid_argument("attack: epsilon must be >= 0");
  if (max_iterations < 1) throw std::invalid_argument("attack: need at least one iteration");
  for (int v : attacked_views)
    if (v < 0 || static_cast<std::size_t>(v) >= camera_count)
      throw std::invalid_argument("attack: attacked view outside camera list");
  if (!per_view_targets.empty()) {
    const std::size_t expect = attacked_views.empty() ? 1 : attacked_views.size();
    if (per_view_targets.size() != expect)
      throw std::invalid_argument("attack: per-view targets must match attacked views");
  }
}

double cost(std::span<const double> probabilities, int label_decrease,
            std::optional<int> label_increase) {
  if (probabilities.empty()) throw std::invalid_argument("cost: empty distribution");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw std::invalid_argument("cost: invalid probability entry");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("cost: distribution does not sum to 1");
  const int k = static_cast<int>(probabilities.size());
  if (label_decrease < 0 || label_decrease >= k)
    throw std::invalid_argument("cost: decrease label out of range");
  if (label_increase && (*label_increase < 0 || *label_increase >= k))
    throw std::invalid_argument("cost: increase label out of range");

  const double log_d = std::log(std::max(probabilities[label_decrease], kProbFloor));
  if (!label_increase) return log_d;
  const double log_i = std::log(std::max(probabilities[*label_increase], kProbFloor));
  return log_d - log_i;
}

ShCoeffs project_norm_ball(const ShCoeffs& current, const ShCoeffs& initial, double eps) {
  if (current.bands != initial.bands)
    throw std::invalid_argument("project_norm_ball: band mismatch");
  ShCoeffs out = current;
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    const double d = std::clamp(current.data[i] - initial.data[i], -eps, eps);
    out.data[i] = initial.data[i] + d;
  }
  return out;
}

std::vector<Vec3> project_norm_ball(const std::vector<Vec3>& current,
                                    const std::vector<Vec3>& initial, double eps) {
  if (current.size() != initial.size())
    throw std::invalid_argument("project_norm_ball: size mismatch");
  std::vector<Vec3> out(current.size());
  for (std::size_t i = 0; i < current.size(); ++i)
    for (int c = 0; c < 3; ++c)
      out[i][c] = initial[i][c] + std::clamp(current[i][c] - initial[i][c], -eps, eps);
  return out;
}

ShCoeffs lighting_step(const ShCoeffs& current, const ShCoeffs& initial,
                       const LightingJacobian& jac, const Image& d_cost_d_image, double gamma,
                       double eps) {
  const ViewGradient view{&jac, &d_cost_d_image};
  return multiview_lighting_step(current, initial, std::span(&view, 1), gamma, eps);
}

ShCoeffs multiview_lighting_step(const ShCoeffs& current, const ShCoeffs& initial,
                                 std::span<const ViewGradient> views, double gamma, double eps) {
  if (views.empty()) throw std::invalid_argument("multiview_lighting_step: no views");
  ShCoeffs stepped = current;
  for (const ViewGradient& view : views) {
    const ShCoeffs g = view.jacobian->grad(*view.d_cost_d_image);
    for (std::size_t i = 0; i < stepped.data.size(); ++i)
      stepped.data[i] -= gamma * g.data[i];
  }
  return project_norm_ball(stepped, initial, eps);
}

std::vector<Vec3> multiview_geometry_step(const std::vector<Vec3>& current,
                                          const std::vector<Vec3>& initial,
                                          const TriMesh& mesh_topology,
                                          std::span<const VertexJacobian> jacs,
                                          std::span<const Image> grads, double gamma,
                                          double eps) {
  if (jacs.empty() || jacs.size() != grads.size())
    throw std::invalid_argument("geometry_step: views and gradients must pair up");
  std::vector<Vec3> descent(current.size(), Vec3{});
  for (std::size_t v = 0; v < jacs.size(); ++v) {
    const std::vector<Vec3> g = jacs[v].grad(grads[v], current.size());
    for (std::size_t i = 0; i < descent.size(); ++i) descent[i] += g[i];
  }
  // Steps that would collapse a face are rejected and retried smaller.
  double step = gamma;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    std::vector<Vec3> candidate(current.size());
    for (std::size_t i = 0; i < candidate.size(); ++i)
      candidate[i] = current[i] - step * descent[i];
    candidate = project_norm_ball(candidate, initial, eps);
    if (!has_degenerate_face(mesh_topology, candidate)) return candidate;
    step *= 0.5;
  }
  throw std::runtime_error(
      "geometry_step: step creates degenerate faces even after 5 halvings");
}

std::vector<Vec3> geometry_step(const std::vector<Vec3>& current,
                                const std::vector<Vec3>& initial, const TriMesh& mesh_topology,
                                const VertexJacobian& jac, const Image& d_cost_d_image,
                                double gamma, double eps) {
  return multiview_geometry_step(current, initial, mesh_topology, std::span(&jac, 1),
                                 std::span(&d_cost_d_image, 1), gamma, eps);
}

SkylightParams skylight_step(const SkylightParams& current, const SkylightParams& initial,
                             const SkylightFit& fit, const LightingJacobian& jac,
                             const Image& d_cost_d_image, double gamma, double eps) {
  const ShCoeffs g_lighting = jac.grad(d_cost_d_image);
  const SkylightGrad g_sky = skylight_sh_grad(current, fit);
  double g_theta = 0.0, g_phi = 0.0, g_tau = 0.0;
  for (std::size_t i = 0; i < g_lighting.data.size(); ++i) {
    g_theta += g_lighting.data[i] * g_sky.d_theta.data[i];
    g_phi += g_lighting.data[i] * g_sky.d_phi.data[i];
    g_tau += g_lighting.data[i] * g_sky.d_tau.data[i];
  }
  SkylightParams next = current;
  next.theta_s -= gamma * g_theta;
  next.phi_s -= gamma * g_phi;
  next.turbidity -= gamma * g_tau;
  if (std::isfinite(eps)) {
    next.theta_s = initial.theta_s + std::clamp(next.theta_s - initial.theta_s, -eps, eps);
    next.phi_s = initial.phi_s + std::clamp(next.phi_s - initial.phi_s, -eps, eps);
    next.turbidity =
        initial.turbidity + std::clamp(next.turbidity - initial.turbidity, -eps, eps);
  }
  return next.clamped();
}

namespace {

struct ViewState {
  FragmentBuffer frags;
  LightingJacobian light_jac;  // lighting/skylight spaces
};

}  // namespace

AttackTrace run_attack(const Scene& scene, GradientSource& classifier,
                       const AttackConfig& config) {
  config.validate(scene.cameras.size());
  std::vector<int> views = config.attacked_views;
  if (views.empty()) views = {0};
  const std::size_t nviews = views.size();

  if (config.space == ParamSpace::kSkylight && !scene.skylight_fit)
    throw std::invalid_argument("attack: skylight space needs a scene with a skylight source");

  AttackTrace trace;
  trace.space = config.space;

  TriMesh mesh = scene.mesh;
  const std::vector<Vec3> initial_vertices = mesh.vertices;
  const ShCoeffs initial_lighting = scene.lighting;
  ShCoeffs lighting = scene.lighting;
  const SkylightParams initial_sky = scene.skylight_params;
  SkylightParams sky = scene.skylight_params;

  // Lighting-space attacks keep geometry fixed, so visibility and the
  // lighting Jacobian are computed once per view.
  std::vector<ViewState> fixed;
  if (config.space != ParamSpace::kGeometry) {
    FaceNormals normals = face_normals(mesh);
    for (int v : views) {
      ViewState state;
      state.frags = scene.rasterize_view(static_cast<std::size_t>(v));
      state.light_jac =
          d_image_d_lighting(state.frags, normals, mesh.albedo, lighting.bands);
      fixed.push_back(std::move(state));
    }
  }

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    std::vector<FragmentBuffer> geo_frags;
    FaceNormals normals = face_normals(mesh);
    std::vector<Image> images;
    for (std::size_t vi = 0; vi < nviews; ++vi) {
      if (config.space == ParamSpace::kGeometry) {
        geo_frags.push_back(scene.rasterize_view(static_cast<std::size_t>(views[vi])));
        images.push_back(shade(geo_frags.back(), normals, lighting, mesh.albedo));
      } else {
        images.push_back(shade(fixed[vi].frags, normals, lighting, mesh.albedo));
      }
    }

    IterationRecord record;
    record.iteration = iter;
    std::vector<GradientSource::Eval> evals;
    bool all_fooled = true;
    for (std::size_t vi = 0; vi < nviews; ++vi) {
      const std::optional<int> target = config.per_view_targets.empty()
                                            ? config.label_increase
                                            : config.per_view_targets[vi];
      GradientSource::Eval eval;
      try {
        eval = classifier.evaluate(images[vi], config.label_decrease, target);
      } catch (const std::exception& e) {
        throw std::runtime_error("attack: classifier failed at iteration " +
                                 std::to_string(iter) + ": " + e.what());
      }
      record.cost += cost(eval.probabilities, config.label_decrease, target);
      record.confidence_decrease.push_back(eval.probabilities[config.label_decrease]);
      if (target) record.confidence_increase.push_back(eval.probabilities[*target]);
      const int predicted = argmax(eval.probabilities);
      const bool view_fooled =
          target ? predicted == *target : predicted != config.label_decrease;
      all_fooled = all_fooled && view_fooled;
      evals.push_back(std::move(eval));
    }

    switch (config.space) {
      case ParamSpace::kLighting:
        record.linf_distance = linf_diff(lighting, initial_lighting);
        break;
      case ParamSpace::kGeometry:
        record.linf_distance = linf_diff(mesh.vertices, initial_vertices);
        break;
      case ParamSpace::kSkylight: {
        const double d0 = std::fabs(sky.theta_s - initial_sky.theta_s);
        const double d1 = std::fabs(sky.phi_s - initial_sky.phi_s);
        const double d2 = std::fabs(sky.turbidity - initial_sky.turbidity);
        record.linf_distance = std::max({d0, d1, d2});
        break;
      }
    }
    record.fooled = all_fooled;
    trace.iterations.push_back(record);
    if (all_fooled) {
      trace.fooled = true;
      break;
    }
    // No trailing step after the last evaluation: final parameters always
    // correspond to the last recorded iteration.
    if (iter == config.max_iterations) break;

    // Parameter step.
    if (config.space == ParamSpace::kLighting) {
      std::vector<ViewGradient> grads;
      for (std::size_t vi = 0; vi < nviews; ++vi)
        grads.push_back({&fixed[vi].light_jac, &evals[vi].gradient});
      lighting = multiview_lighting_step(lighting, initial_lighting, grads, config.step_size,
                                         config.epsilon);
    } else if (config.space == ParamSpace::kSkylight) {
      // Summed lighting gradient chained through the skylight parameters.
      ShCoeffs g(lighting.bands);
      for (std::size_t vi = 0; vi < nviews; ++vi) g += fixed[vi].light_jac.grad(evals[vi].gradient);
      const SkylightGrad g_sky = skylight_sh_grad(sky, *scene.skylight_fit);
      double g_theta = 0.0, g_phi = 0.0, g_tau = 0.0;
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        g_theta += g.data[i] * g_sky.d_theta.data[i];
        g_phi += g.data[i] * g_sky.d_phi.data[i];
        g_tau += g.data[i] * g_sky.d_tau.data[i];
      }
      sky.theta_s -= config.step_size * g_theta;
      sky.phi_s -= config.step_size * g_phi;
      sky.turbidity -= config.step_size * g_tau;
      if (std::isfinite(config.epsilon)) {
        sky.theta_s = initial_sky.theta_s +
                      std::clamp(sky.theta_s - initial_sky.theta_s, -config.epsilon,
                                 config.epsilon);
        sky.phi_s = initial_sky.phi_s + std::clamp(sky.phi_s - initial_sky.phi_s,
                                                   -config.epsilon, config.epsilon);
        sky.turbidity = initial_sky.turbidity +
                        std::clamp(sky.turbidity - initial_sky.turbidity, -config.epsilon,
                                   config.epsilon);
      }
      sky = sky.clamped();
      lighting = skylight_sh(sky, *scene.skylight_fit);
    } else {
      std::vector<VertexJacobian> jacs;
      std::vector<Image> grads;
      for (std::size_t vi = 0; vi < nviews; ++vi) {
        jacs.push_back(d_image_d_vertices(geo_frags[vi], mesh, lighting));
        grads.push_back(std::move(evals[vi].gradient));
      }
      mesh.vertices = multiview_geometry_step(mesh.vertices, initial_vertices, mesh, jacs,
                                              grads, config.step_size, config.epsilon);
    }
  }

  trace.final_lighting = lighting;
  trace.final_vertices = mesh.vertices;
  trace.final_skylight = sky;
  return trace;
}

void save_trace_jsonl(const AttackTrace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const IterationRecord& rec : trace.iterations) {
    nlohmann::json j{{"iteration", rec.iteration},
                     {"cost", rec.cost},
                     {"conf_decrease", rec.confidence_decrease},
                     {"linf_distance", rec.linf_distance},
                     {"fooled", rec.fooled}};
    if (!rec.confidence_increase.empty()) j["conf_increase"] = rec.confidence_increase;
    out << j.dump() << "\n";
  }
}

}  // namespace lambert
