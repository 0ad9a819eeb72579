#pragma once

#include <vector>

#include "lambert/vec.hpp"

namespace lambert {

enum class CameraKind { kOrthographic, kPerspective };

// fov is the view width in scene units: the frame width for an orthographic
// camera, and the frustum width at the look-at point's depth for perspective.
// The vertical extent follows from the pixel aspect (height/width * fov).
struct Camera {
  CameraKind kind = CameraKind::kOrthographic;
  Vec3 position{0.0, 0.0, 2.0};
  Vec3 look_at{0.0, 0.0, 0.0};
  Vec3 up{0.0, 0.0, 1.0};
  double fov = 2.0;
  int width = 128;
  int height = 128;

  struct Frame {
    Vec3 right, up, forward;
  };
  Frame frame() const;

  // Continuous pixel coordinates (x, y) plus view depth; valid() is false
  // behind a perspective camera.
  struct Projected {
    double x, y, depth;
    bool valid;
  };
  Projected project(const Vec3& p) const;
};

// `count` cameras at the given zenith angle and distance from the origin,
// azimuths 2 pi k / count, all aimed at the origin with +z up.
std::vector<Camera> camera_ring(int count, double zenith, double radius,
                                CameraKind kind = CameraKind::kOrthographic,
                                double fov = 2.0, int width = 128, int height = 128);

}  // namespace lambert
