#include "lambert/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace lambert {

double TriMesh::face_area(std::size_t face) const {
  const Vec3 a = corner(face, 0), b = corner(face, 1), c = corner(face, 2);
  return 0.5 * norm(cross(b - a, c - a));
}

double TriMesh::surface_area() const {
  double total = 0.0;
  for (std::size_t f = 0; f < face_count(); ++f) total += face_area(f);
  return total;
}

std::pair<Vec3, Vec3> TriMesh::bounding_box() const {
  if (vertices.empty()) return {{}, {}};
  Vec3 lo = vertices.front(), hi = vertices.front();
  for (const Vec3& v : vertices) {
    for (int i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], v[i]);
      hi[i] = std::max(hi[i], v[i]);
    }
  }
  return {lo, hi};
}

void TriMesh::validate() const {
  std::ostringstream bad;
  int bad_count = 0;
  auto complain = [&](std::size_t f, const char* what) {
    if (bad_count++ < 16) bad << " " << what << "@" << f;
  };
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const auto& face = faces[f];
    bool in_range = true;
    for (int c = 0; c < 3; ++c)
      if (face[c] >= vertices.size()) in_range = false;
    if (!in_range) {
      complain(f, "index");
      continue;
    }
    if (face_area(f) <= kDegenerateFaceArea) complain(f, "degenerate");
  }
  if (albedo.size() != faces.size()) {
    throw std::runtime_error("mesh: albedo rows (" + std::to_string(albedo.size()) +
                             ") do not match face count (" + std::to_string(faces.size()) + ")");
  }
  for (std::size_t f = 0; f < albedo.size(); ++f) {
    for (int c = 0; c < 3; ++c)
      if (!(albedo[f][c] >= 0.0 && albedo[f][c] <= 1.0)) {
        complain(f, "albedo");
        break;
      }
  }
  if (bad_count > 0) {
    throw std::runtime_error("mesh: " + std::to_string(bad_count) +
                             " invalid faces:" + bad.str());
  }
}

FaceNormals face_normals(const TriMesh& mesh) {
  FaceNormals out;
  out.n.resize(mesh.face_count());
  std::ostringstream bad;
  int bad_count = 0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const Vec3 a = mesh.corner(f, 0);
    const Vec3 c = cross(mesh.corner(f, 1) - a, mesh.corner(f, 2) - a);
    const double len = norm(c);
    if (0.5 * len <= kDegenerateFaceArea) {
      if (bad_count++ < 16) bad << " " << f;
      continue;
    }
    out.n[f] = c / len;
  }
  if (bad_count > 0) {
    throw std::runtime_error("face_normals: degenerate faces:" + bad.str());
  }
  return out;
}

Mat3 normal_jacobian(const TriMesh& mesh, std::size_t face, int corner) {
  if (face >= mesh.face_count() || corner < 0 || corner > 2)
    throw std::invalid_argument("normal_jacobian: face/corner out of range");
  const Vec3 v = mesh.corner(face, corner);
  const Vec3 e0 = mesh.corner(face, (corner + 1) % 3);
  const Vec3 e1 = mesh.corner(face, (corner + 2) % 3);

  const Vec3 edge = e1 - e0;
  const double edge_len2 = norm2(edge);
  const Vec3 a = mesh.corner(face, 0);
  const Vec3 c = cross(mesh.corner(face, 1) - a, mesh.corner(face, 2) - a);
  const double area = 0.5 * norm(c);
  if (area <= kDegenerateFaceArea || edge_len2 <= 0.0)
    throw std::runtime_error("normal_jacobian: degenerate face " + std::to_string(face));

  // Height vector, oriented from the corner to its projection on the
  // opposite edge line. (The edge-to-corner orientation produces the
  // negated Jacobian; finite differences pin this sign.)
  const Vec3 rel = v - e0;
  const Vec3 h = edge * (dot(rel, edge) / edge_len2) - rel;
  return Mat3::outer(h, c / norm(c)) * (1.0 / norm2(h));
}

TriMesh midpoint_subdivide(const TriMesh& mesh, int rounds) {
  if (rounds < 0) throw std::invalid_argument("midpoint_subdivide: rounds must be >= 0");
  TriMesh cur = mesh;
  for (int r = 0; r < rounds; ++r) {
    TriMesh next;
    next.vertices = cur.vertices;
    next.faces.reserve(cur.faces.size() * 4);
    next.albedo.reserve(cur.faces.size() * 4);
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoint;
    auto mid = [&](std::uint32_t a, std::uint32_t b) -> std::uint32_t {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const auto id = static_cast<std::uint32_t>(next.vertices.size());
      next.vertices.push_back(0.5 * (cur.vertices[a] + cur.vertices[b]));
      midpoint.emplace(key, id);
      return id;
    };
    for (std::size_t f = 0; f < cur.faces.size(); ++f) {
      const auto [a, b, c] = cur.faces[f];
      const std::uint32_t ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
      const Vec3 rho = cur.albedo.empty() ? Vec3{0.75, 0.75, 0.75} : cur.albedo[f];
      next.faces.push_back({a, ab, ca});
      next.faces.push_back({ab, b, bc});
      next.faces.push_back({ca, bc, c});
      next.faces.push_back({ab, bc, ca});
      for (int k = 0; k < 4; ++k) next.albedo.push_back(rho);
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace lambert
