#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "lambert/vec.hpp"

namespace lambert {

// Faces below this area (scene units squared) count as degenerate.
inline constexpr double kDegenerateFaceArea = 1e-12;

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  std::vector<Vec3> albedo;  // per face, channelwise in [0,1]

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t face_count() const { return faces.size(); }

  Vec3 corner(std::size_t face, int c) const { return vertices[faces[face][c]]; }
  double face_area(std::size_t face) const;
  double surface_area() const;
  std::pair<Vec3, Vec3> bounding_box() const;

  // Throws listing offending faces if indices are out of range, a face is
  // degenerate, or albedo is out of [0,1].
  void validate() const;
};

struct FaceNormals {
  std::vector<Vec3> n;  // unit, CCW winding
};

FaceNormals face_normals(const TriMesh& mesh);

// 3x3 Jacobian of the unit face normal with respect to the chosen corner:
//   d n / d v = h n^T / |h|^2
// with h the height vector between the corner and the opposite edge's line,
// oriented corner-to-edge so the Jacobian matches finite differences of
// normalize(cross(..)).
Mat3 normal_jacobian(const TriMesh& mesh, std::size_t face, int corner);

// Splits every face into four through edge midpoints, `rounds` times.
// Shared midpoints are deduplicated; child faces inherit the parent albedo.
TriMesh midpoint_subdivide(const TriMesh& mesh, int rounds);

// Wavefront OBJ. v/f records only; vt/vn are ignored; quads and larger
// polygons are fan-triangulated. Per-face albedo is read from `path` with
// the extension replaced by .albedo (one "r g b" line per face); a missing
// sidecar means uniform 0.75 gray.
TriMesh load_obj(const std::string& path);
void save_obj(const TriMesh& mesh, const std::string& path);

std::string albedo_sidecar_path(const std::string& obj_path);
std::vector<Vec3> load_albedo_sidecar(const std::string& path, std::size_t faces);
void save_albedo_sidecar(const std::vector<Vec3>& albedo, const std::string& path);

}  // namespace lambert
