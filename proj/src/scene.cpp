#include "lambert/scene.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "lambert/shading.hpp"

namespace lambert {

namespace {

using nlohmann::json;

std::string resolve(const std::string& scene_path, const std::string& ref) {
  if (!ref.empty() && ref.front() == '/') return ref;
  const auto slash = scene_path.find_last_of('/');
  if (slash == std::string::npos) return ref;
  return scene_path.substr(0, slash + 1) + ref;
}

Vec3 vec_of(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::runtime_error("scene: expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Camera camera_of(const json& j) {
  Camera cam;
  const std::string kind = j.value("kind", "orthographic");
  if (kind == "orthographic")
    cam.kind = CameraKind::kOrthographic;
  else if (kind == "perspective")
    cam.kind = CameraKind::kPerspective;
  else
    throw std::runtime_error("scene: unknown camera kind '" + kind + "'");
  if (j.contains("position")) cam.position = vec_of(j.at("position"));
  if (j.contains("look_at")) cam.look_at = vec_of(j.at("look_at"));
  if (j.contains("up")) cam.up = vec_of(j.at("up"));
  cam.fov = j.value("fov", 2.0);
  return cam;
}

}  // namespace

FragmentBuffer Scene::rasterize_view(std::size_t view) const {
  if (view >= cameras.size()) throw std::out_of_range("scene: camera index out of range");
  if (background_image) return rasterize(mesh, cameras[view], *background_image);
  return rasterize(mesh, cameras[view], background_color);
}

Image Scene::render_view(std::size_t view) const {
  const FragmentBuffer frags = rasterize_view(view);
  return shade(frags, face_normals(mesh), lighting, mesh.albedo);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scene " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": invalid JSON: " + e.what());
  }
  if (j.value("scene_version", 0) != 1)
    throw std::runtime_error(path + ": unsupported scene_version (want 1)");

  Scene scene;
  scene.mesh = load_obj(resolve(path, j.at("mesh").get<std::string>()));
  if (j.contains("albedo"))
    scene.mesh.albedo =
        load_albedo_sidecar(resolve(path, j.at("albedo").get<std::string>()),
                            scene.mesh.face_count());

  const json& lighting = j.at("lighting");
  const int sources = lighting.contains("sh") + lighting.contains("envmap") +
                      lighting.contains("skylight");
  if (sources != 1)
    throw std::runtime_error(path + ": lighting must name exactly one source");
  if (lighting.contains("sh")) {
    scene.source = LightingSource::kShFile;
    scene.lighting = load_sh_coeffs(resolve(path, lighting.at("sh").get<std::string>()));
  } else if (lighting.contains("envmap")) {
    scene.source = LightingSource::kEnvMap;
    const EnvMap env = load_envmap(resolve(path, lighting.at("envmap").get<std::string>()));
    scene.lighting = project_environment(env, lighting.value("bands", kDefaultBands));
  } else {
    scene.source = LightingSource::kSkylight;
    const json& sky = lighting.at("skylight");
    scene.skylight_params.theta_s = sky.value("theta_s", 0.7);
    scene.skylight_params.phi_s = sky.value("phi_s", 0.0);
    scene.skylight_params.turbidity = sky.value("turbidity", 3.0);
    auto fit = std::make_shared<SkylightFit>(
        load_skylight_fit(resolve(path, sky.at("fit").get<std::string>())));
    scene.lighting = skylight_sh(scene.skylight_params, *fit);
    scene.skylight_fit = std::move(fit);
  }

  int width = 128, height = 128;
  if (j.contains("resolution")) {
    width = j.at("resolution").at(0).get<int>();
    height = j.at("resolution").at(1).get<int>();
    if (width < 1 || height < 1) throw std::runtime_error(path + ": bad resolution");
  }
  if (j.contains("camera_ring")) {
    const json& ring = j.at("camera_ring");
    scene.cameras = camera_ring(
        ring.value("count", 10), ring.value("zenith", 1.0471975511965976),
        ring.value("radius", 2.0),
        ring.value("kind", std::string("orthographic")) == "perspective"
            ? CameraKind::kPerspective
            : CameraKind::kOrthographic,
        ring.value("fov", 2.0), width, height);
  } else if (j.contains("camera")) {
    Camera cam = camera_of(j.at("camera"));
    cam.width = width;
    cam.height = height;
    scene.cameras = {cam};
  } else if (j.contains("cameras")) {
    for (const json& c : j.at("cameras")) {
      Camera cam = camera_of(c);
      cam.width = width;
      cam.height = height;
      scene.cameras.push_back(cam);
    }
  } else {
    throw std::runtime_error(path + ": no camera, cameras, or camera_ring");
  }

  if (j.contains("background")) {
    const json& bg = j.at("background");
    if (bg.contains("color")) {
      scene.background_color = vec_of(bg.at("color"));
    } else if (bg.contains("image")) {
      const EnvMap img = load_envmap_ppm(resolve(path, bg.at("image").get<std::string>()));
      if (img.width != width || img.height != height)
        throw std::runtime_error(path + ": background image does not match resolution");
      Image bgimg(width, height);
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x)
          for (int c = 0; c < 3; ++c) bgimg.at(x, y, c) = img.at(y, x)[c];
      scene.background_image = std::move(bgimg);
    } else {
      throw std::runtime_error(path + ": background needs color or image");
    }
  }
  if (j.contains("label")) scene.label = j.at("label").get<int>();
  return scene;
}

void save_scene_json(const std::string& path, const std::string& mesh_path,
                     const std::string& lighting_path, const std::vector<Camera>& cameras,
                     const Vec3& background, std::optional<int> label) {
  json j;
  j["scene_version"] = 1;
  j["mesh"] = mesh_path;
  j["lighting"] = {{"sh", lighting_path}};
  j["resolution"] = {cameras.empty() ? 128 : cameras.front().width,
                     cameras.empty() ? 128 : cameras.front().height};
  json cams = json::array();
  for (const Camera& cam : cameras) {
    cams.push_back({{"kind", cam.kind == CameraKind::kPerspective ? "perspective"
                                                                  : "orthographic"},
                    {"position", {cam.position.x, cam.position.y, cam.position.z}},
                    {"look_at", {cam.look_at.x, cam.look_at.y, cam.look_at.z}},
                    {"up", {cam.up.x, cam.up.y, cam.up.z}},
                    {"fov", cam.fov}});
  }
  j["cameras"] = cams;
  j["background"] = {{"color", {background.x, background.y, background.z}}};
  if (label) j["label"] = *label;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << "\n";
}

}  // namespace lambert
