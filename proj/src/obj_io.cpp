#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lambert/mesh.hpp"

namespace lambert {

namespace {

[[noreturn]] void parse_fail(const std::string& path, int line, const std::string& why) {
  throw std::runtime_error(path + ":" + std::to_string(line) + ": " + why);
}

// "3", "3/1", "3//2", "3/1/2" -> vertex index (1-based in the file)
long parse_face_index(const std::string& token, const std::string& path, int line) {
  const auto slash = token.find('/');
  const std::string head = slash == std::string::npos ? token : token.substr(0, slash);
  try {
    std::size_t used = 0;
    const long v = std::stol(head, &used);
    if (used != head.size() || v == 0) throw std::invalid_argument(head);
    return v;
  } catch (const std::exception&) {
    parse_fail(path, line, "bad face index '" + token + "'");
  }
}

}  // namespace

std::string albedo_sidecar_path(const std::string& obj_path) {
  const auto dot = obj_path.find_last_of('.');
  const auto slash = obj_path.find_last_of('/');
  const std::string stem =
      (dot == std::string::npos || (slash != std::string::npos && dot < slash))
          ? obj_path
          : obj_path.substr(0, dot);
  return stem + ".albedo";
}

std::vector<Vec3> load_albedo_sidecar(const std::string& path, std::size_t faces) {
  std::ifstream in(path);
  if (!in) return std::vector<Vec3>(faces, Vec3{0.75, 0.75, 0.75});
  std::vector<Vec3> albedo;
  albedo.reserve(faces);
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty() || row[0] == '#') continue;
    std::istringstream ss(row);
    Vec3 rgb;
    if (!(ss >> rgb.x >> rgb.y >> rgb.z)) parse_fail(path, line, "expected 'r g b'");
    for (int c = 0; c < 3; ++c)
      if (!(rgb[c] >= 0.0 && rgb[c] <= 1.0)) parse_fail(path, line, "albedo outside [0,1]");
    albedo.push_back(rgb);
  }
  if (albedo.size() != faces) {
    throw std::runtime_error(path + ": " + std::to_string(albedo.size()) +
                             " albedo rows for " + std::to_string(faces) + " faces");
  }
  return albedo;
}

void save_albedo_sidecar(const std::vector<Vec3>& albedo, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(9);
  for (const Vec3& rgb : albedo) out << rgb.x << " " << rgb.y << " " << rgb.z << "\n";
}

TriMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  TriMesh mesh;
  std::string row;
  int line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (row.empty()) continue;
    std::istringstream ss(row);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      if (!(ss >> v.x >> v.y >> v.z)) parse_fail(path, line, "bad vertex record");
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ss >> token) {
        long v = parse_face_index(token, path, line);
        if (v < 0) v = static_cast<long>(mesh.vertices.size()) + v + 1;
        if (v < 1 || v > static_cast<long>(mesh.vertices.size()))
          parse_fail(path, line, "vertex index out of range");
        poly.push_back(static_cast<std::uint32_t>(v - 1));
      }
      if (poly.size() < 3) parse_fail(path, line, "face with fewer than 3 vertices");
      for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
    }
    // vt/vn/usemtl/... are ignored
  }
  mesh.albedo = load_albedo_sidecar(albedo_sidecar_path(path), mesh.face_count());
  return mesh;
}

void save_obj(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(9);
  for (const Vec3& v : mesh.vertices) out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  for (const auto& f : mesh.faces)
    out << "f " << f[0] + 1 << " " << f[1] + 1 << " " << f[2] + 1 << "\n";
  if (!mesh.albedo.empty()) save_albedo_sidecar(mesh.albedo, albedo_sidecar_path(path));
}

}  // namespace lambert
