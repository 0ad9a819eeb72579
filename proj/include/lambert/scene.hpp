#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lambert/camera.hpp"
#include "lambert/image.hpp"
#include "lambert/lighting.hpp"
#include "lambert/mesh.hpp"
#include "lambert/raster.hpp"
#include "lambert/skylight.hpp"

namespace lambert {

enum class LightingSource { kShFile, kEnvMap, kSkylight };

// A renderable scene: mesh + exactly one lighting source + cameras +
// background. Loaded from the versioned JSON scene format (scene_version 1).
struct Scene {
  TriMesh mesh;
  LightingSource source = LightingSource::kShFile;
  ShCoeffs lighting;  // resolved SH coefficients, whatever the source
  SkylightParams skylight_params;
  std::shared_ptr<const SkylightFit> skylight_fit;  // set when source == kSkylight
  std::vector<Camera> cameras;
  Vec3 background_color{0.5, 0.5, 0.5};
  std::optional<Image> background_image;
  std::optional<int> label;  // class label for dataset scenes

  FragmentBuffer rasterize_view(std::size_t view) const;
  Image render_view(std::size_t view) const;
};

Scene load_scene(const std::string& path);
// Writes the JSON description; referenced assets (mesh, lighting) must
// already exist at the recorded paths.
void save_scene_json(const std::string& path, const std::string& mesh_path,
                     const std::string& lighting_path, const std::vector<Camera>& cameras,
                     const Vec3& background, std::optional<int> label);

}  // namespace lambert
