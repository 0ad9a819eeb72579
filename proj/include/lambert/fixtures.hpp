#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lambert/attack.hpp"
#include "lambert/classifier.hpp"
#include "lambert/scene.hpp"

// Procedural meshes, deterministic demo scenes, and the desk-scale
// augmentation experiment used by the test and acceptance suites.
namespace lambert::fixtures {

TriMesh make_icosphere(int subdivisions, double radius = 1.0);
TriMesh make_box(const Vec3& half_extents = {0.7, 0.7, 0.7});
TriMesh make_pyramid(double base_half = 0.8, double height = 1.4);
TriMesh make_disk(int segments, double radius);
// Uniformly random non-degenerate triangle soup inside [-1,1]^3.
TriMesh make_random_soup(int faces, std::mt19937_64& rng);

// A smooth studio-style lighting rig: warm key plus cool fill, band-limited.
ShCoeffs make_studio_lighting(int bands = kDefaultBands);

struct BankOptions {
  int views = 4;                 // azimuths on the pi/3 ring
  double zenith = 1.0471975511965976;
  double camera_radius = 2.2;
  double fov = 2.6;
  int resolution = 24;
  std::vector<double> grays = {0.0, 0.25, 0.5, 0.75, 1.0};
};

// One scene per (shape, view, gray): shape 0 is a sphere, 1 a box, and with
// three_classes also 2 a pyramid. Scene labels record the shape class.
std::vector<Scene> make_shape_bank(const BankOptions& options, bool three_classes = false,
                                   int geometry_subdivisions = 3);

// Renders every (scene, view 0) pair into a labeled sample.
std::vector<Sample> render_bank(const std::vector<Scene>& bank);
// Same, with per-sample lighting offsets drawn uniformly from
// [-amplitude, amplitude] per coefficient.
std::vector<Sample> render_bank_random_lighting(const std::vector<Scene>& bank,
                                                double amplitude, int per_scene,
                                                std::mt19937_64& rng);

// Augmenters for train_toy. Random draws coefficient offsets uniformly from
// [-0.5, 0.5]; adversarial recomputes lighting attacks against the current
// model each epoch.
AugmentFn random_lighting_augmenter(std::vector<Scene> bank, double amplitude = 0.5);
AugmentFn adversarial_lighting_augmenter(std::vector<Scene> bank, double epsilon = 0.5,
                                         double step_size = kDefaultStepSize,
                                         int max_iterations = kDefaultMaxIterations);

}  // namespace lambert::fixtures
