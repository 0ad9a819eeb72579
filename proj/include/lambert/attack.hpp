#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lambert/classifier.hpp"
#include "lambert/scene.hpp"
#include "lambert/shading.hpp"

namespace lambert {

enum class ParamSpace { kLighting, kGeometry, kSkylight };

// Parametric norm-ball radii the evaluation protocol uses by default.
inline constexpr double kDefaultLightingEps = 0.1;
inline constexpr double kDefaultGeometryEps = 0.002;
inline constexpr double kDefaultStepSize = 0.05;
inline constexpr int kDefaultMaxIterations = 30;

struct AttackConfig {
  int label_decrease = 0;
  std::optional<int> label_increase;
  double step_size = kDefaultStepSize;
  int max_iterations = kDefaultMaxIterations;
  double epsilon = kDefaultLightingEps;  // L-inf radius in parameter units
  ParamSpace space = ParamSpace::kLighting;
  // Indices into the scene's camera list; empty means view 0 only.
  std::vector<int> attacked_views;
  // Per-attacked-view increase labels for illusion attacks; overrides
  // label_increase when non-empty (must match attacked_views in size).
  std::vector<std::optional<int>> per_view_targets;

  void validate(std::size_t camera_count) const;
};

struct IterationRecord {
  int iteration = 0;  // 1-based
  double cost = 0.0;
  std::vector<double> confidence_decrease;  // per attacked view
  std::vector<double> confidence_increase;  // per attacked view; empty if untargeted
  double linf_distance = 0.0;
  bool fooled = false;
};

struct AttackTrace {
  std::vector<IterationRecord> iterations;
  bool fooled = false;
  ParamSpace space = ParamSpace::kLighting;
  // Final parameters; the one matching `space` is meaningful.
  ShCoeffs final_lighting;
  std::vector<Vec3> final_vertices;
  SkylightParams final_skylight;
};

// Mixed cross-entropy cost of Eq-1 shape: -CE(f, L_d) + CE(f, L_i), the
// increase term dropped when absent. Probabilities are floored at 1e-12
// inside the logs.
double cost(std::span<const double> probabilities, int label_decrease,
            std::optional<int> label_increase = std::nullopt);

// Componentwise clamp of (current - initial) to [-eps, eps].
ShCoeffs project_norm_ball(const ShCoeffs& current, const ShCoeffs& initial, double eps);
std::vector<Vec3> project_norm_ball(const std::vector<Vec3>& current,
                                    const std::vector<Vec3>& initial, double eps);

// Single descent steps. Each takes the relevant Jacobian (visibility frozen),
// applies U <- U - gamma * dC/dI * dI/dU (and friends), then projects back
// onto the norm ball around the initial parameters.
ShCoeffs lighting_step(const ShCoeffs& current, const ShCoeffs& initial,
                       const LightingJacobian& jac, const Image& d_cost_d_image, double gamma,
                       double eps);

struct ViewGradient {
  const LightingJacobian* jacobian;
  const Image* d_cost_d_image;
};
// Eq-5 style multi-view update: the summed per-view steps, then projection.
ShCoeffs multiview_lighting_step(const ShCoeffs& current, const ShCoeffs& initial,
                                 std::span<const ViewGradient> views, double gamma, double eps);

// Geometry step; rejects steps that create degenerate faces and retries with
// a halved gamma (up to 5 halvings) before giving up.
std::vector<Vec3> geometry_step(const std::vector<Vec3>& current,
                                const std::vector<Vec3>& initial, const TriMesh& mesh_topology,
                                const VertexJacobian& jac, const Image& d_cost_d_image,
                                double gamma, double eps);
std::vector<Vec3> multiview_geometry_step(const std::vector<Vec3>& current,
                                          const std::vector<Vec3>& initial,
                                          const TriMesh& mesh_topology,
                                          std::span<const VertexJacobian> jacs,
                                          std::span<const Image> grads, double gamma, double eps);

// Skylight step: chains the lighting gradient through d U / d (theta_s,
// phi_s, tau), steps, then clamps to the valid parameter ranges (plus the
// eps ball when finite).
SkylightParams skylight_step(const SkylightParams& current, const SkylightParams& initial,
                             const SkylightFit& fit, const LightingJacobian& jac,
                             const Image& d_cost_d_image, double gamma, double eps);

// Full attack loop: rasterize -> shade -> classifier gradient -> step ->
// project until fooled or out of budget. Lighting and skylight attacks reuse
// one fragment buffer per view; geometry attacks re-rasterize every
// iteration.
AttackTrace run_attack(const Scene& scene, GradientSource& classifier,
                       const AttackConfig& config);

// Line-delimited JSON serialization of the trace records.
void save_trace_jsonl(const AttackTrace& trace, const std::string& path);

}  // namespace lambert
