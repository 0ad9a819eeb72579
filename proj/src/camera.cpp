#include "lambert/camera.hpp"

#include <cmath>
#include <stdexcept>

namespace lambert {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kNearClip = 1e-9;
}  // namespace

Camera::Frame Camera::frame() const {
  const Vec3 forward = normalized(look_at - position);
  Vec3 upv = up;
  if (norm(cross(forward, upv)) < 1e-9) upv = std::fabs(forward.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
  const Vec3 right = normalized(cross(forward, upv));
  return {right, cross(right, forward), forward};
}

Camera::Projected Camera::project(const Vec3& p) const {
  const Frame f = frame();
  const Vec3 d = p - position;
  const double u = dot(d, f.right);
  const double v = dot(d, f.up);
  const double w = dot(d, f.forward);

  const double half_w = 0.5 * fov;
  const double half_h = half_w * height / static_cast<double>(width);
  double ndc_x, ndc_y;
  bool valid = true;
  if (kind == CameraKind::kOrthographic) {
    ndc_x = u / half_w;
    ndc_y = v / half_h;
  } else {
    const double focal = norm(look_at - position);
    if (w <= kNearClip) {
      valid = false;
      ndc_x = ndc_y = 0.0;
    } else {
      ndc_x = u * focal / (w * half_w);
      ndc_y = v * focal / (w * half_h);
    }
  }
  // +x right, +y up in view space; pixel rows grow downward.
  return {(ndc_x * 0.5 + 0.5) * width, (0.5 - ndc_y * 0.5) * height, w, valid};
}

std::vector<Camera> camera_ring(int count, double zenith, double radius, CameraKind kind,
                                double fov, int width, int height) {
  if (count < 1) throw std::invalid_argument("camera_ring: count must be >= 1");
  std::vector<Camera> ring;
  ring.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double azimuth = 2.0 * kPi * k / count;
    Camera cam;
    cam.kind = kind;
    cam.position = radius * Vec3{std::sin(zenith) * std::cos(azimuth),
                                 std::sin(zenith) * std::sin(azimuth), std::cos(zenith)};
    cam.look_at = {0.0, 0.0, 0.0};
    cam.up = {0.0, 0.0, 1.0};
    cam.fov = fov;
    cam.width = width;
    cam.height = height;
    ring.push_back(cam);
  }
  return ring;
}

}  // namespace lambert
