#include "peel/mesh.hpp"

#include "peel/errors.hpp"
#include "ply.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace peel {

void TriMesh::validate() const {
  if (!colors.empty() && colors.size() != vertices.size()) {
    throw ArgumentError("mesh: " + std::to_string(colors.size()) + " colors for " +
                        std::to_string(vertices.size()) + " vertices");
  }
  for (const Vec3& v : vertices) {
    if (!v.allFinite()) {
      throw ArgumentError("mesh: non-finite vertex coordinate");
    }
  }
  const auto n = vertices.size();
  for (const Triangle& tri : triangles) {
    if (tri[0] >= n || tri[1] >= n || tri[2] >= n) {
      throw ArgumentError("mesh: triangle index out of range");
    }
  }
}

Aabb TriMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) {
    box.extend(v);
  }
  return box;
}

double TriMesh::triangle_area(std::size_t index) const {
  const Triangle& tri = triangles[index];
  const Vec3& a = vertices[tri[0]];
  return 0.5 * (vertices[tri[1]] - a).cross(vertices[tri[2]] - a).norm();
}

double TriMesh::surface_area() const {
  double area = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    area += triangle_area(i);
  }
  return area;
}

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

// OBJ face token "i", "i/t", "i//n" or "i/t/n"; negative indices count from the end.
std::uint32_t parse_face_index(const std::string& token, std::size_t vertex_count,
                               const std::filesystem::path& path, std::size_t line_no) {
  const std::string head = token.substr(0, token.find('/'));
  long long idx = 0;
  try {
    std::size_t used = 0;
    idx = std::stoll(head, &used);
    if (used != head.size()) {
      throw std::invalid_argument(head);
    }
  } catch (const std::exception&) {
    throw ParseError(ParseErrorKind::kMalformedData, path,
                     "line " + std::to_string(line_no) + ": bad face index '" + token + "'");
  }
  const long long resolved = idx < 0 ? static_cast<long long>(vertex_count) + idx : idx - 1;
  if (idx == 0 || resolved < 0 || resolved >= static_cast<long long>(vertex_count)) {
    throw ParseError(ParseErrorKind::kMalformedData, path,
                     "line " + std::to_string(line_no) + ": face index out of range");
  }
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError(path, "cannot open");
  }
  TriMesh mesh;
  std::vector<Vec3> colors;
  bool all_colored = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      double vals[6];
      int n = 0;
      while (n < 6 && ss >> vals[n]) {
        ++n;
      }
      if (n < 3) {
        throw ParseError(ParseErrorKind::kMalformedData, path,
                         "line " + std::to_string(line_no) + ": vertex needs 3 coordinates");
      }
      mesh.vertices.emplace_back(vals[0], vals[1], vals[2]);
      if (n == 6) {
        colors.emplace_back(255.0 * vals[3], 255.0 * vals[4], 255.0 * vals[5]);
      } else {
        all_colored = false;
      }
    } else if (tag == "f") {
      std::vector<std::uint32_t> poly;
      std::string token;
      while (ss >> token) {
        poly.push_back(parse_face_index(token, mesh.vertices.size(), path, line_no));
      }
      if (poly.size() < 3) {
        throw ParseError(ParseErrorKind::kMalformedData, path,
                         "line " + std::to_string(line_no) + ": face needs 3 vertices");
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
  }
  if (all_colored && !mesh.vertices.empty()) {
    for (Vec3& c : colors) {
      c = c.cwiseMax(0.0).cwiseMin(255.0);
    }
    mesh.colors = std::move(colors);
  }
  try {
    mesh.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(ParseErrorKind::kMalformedData, path, e.what());
  }
  return mesh;
}

TriMesh load_ply_mesh(const std::filesystem::path& path) {
  const ply::File file = ply::read(path);
  const ply::Element* vertex = file.find("vertex");
  if (!vertex) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, "no vertex element");
  }
  const auto x = vertex->find("x"), y = vertex->find("y"), z = vertex->find("z");
  if (!x || !y || !z) {
    throw ParseError(ParseErrorKind::kMalformedHeader, path, "vertex element lacks x/y/z");
  }
  TriMesh mesh;
  mesh.vertices.reserve(vertex->count);
  for (std::size_t i = 0; i < vertex->count; ++i) {
    mesh.vertices.emplace_back(vertex->scalars[*x][i], vertex->scalars[*y][i],
                               vertex->scalars[*z][i]);
  }
  const auto r = vertex->find("red"), g = vertex->find("green"), b = vertex->find("blue");
  if (r && g && b) {
    const bool unit = vertex->properties[*r].type == ply::Type::kFloat32 ||
                      vertex->properties[*r].type == ply::Type::kFloat64;
    const double s = unit ? 255.0 : 1.0;
    mesh.colors.reserve(vertex->count);
    for (std::size_t i = 0; i < vertex->count; ++i) {
      Vec3 c{s * vertex->scalars[*r][i], s * vertex->scalars[*g][i], s * vertex->scalars[*b][i]};
      mesh.colors.push_back(c.cwiseMax(0.0).cwiseMin(255.0));
    }
  }
  if (const ply::Element* face = file.find("face")) {
    auto idx = face->find("vertex_indices");
    if (!idx) {
      idx = face->find("vertex_index");
    }
    if (!idx || !face->properties[*idx].is_list) {
      throw ParseError(ParseErrorKind::kMalformedHeader, path, "face element lacks vertex_indices");
    }
    for (const auto& poly : face->lists[*idx]) {
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        if (poly[0] < 0 || poly[k] < 0 || poly[k + 1] < 0) {
          throw ParseError(ParseErrorKind::kMalformedData, path, "negative face index");
        }
        mesh.triangles.push_back({static_cast<std::uint32_t>(poly[0]),
                                  static_cast<std::uint32_t>(poly[k]),
                                  static_cast<std::uint32_t>(poly[k + 1])});
      }
    }
  }
  try {
    mesh.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(ParseErrorKind::kMalformedData, path, e.what());
  }
  return mesh;
}

TriMesh load_mesh(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".obj") {
    return load_obj(path);
  }
  if (ext == ".ply") {
    return load_ply_mesh(path);
  }
  throw ParseError(ParseErrorKind::kUnsupported, path, "unsupported mesh extension '" + ext + "'");
}

void write_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError(path, "cannot open for writing");
  }
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    out << "v " << v.x() << ' ' << v.y() << ' ' << v.z();
    if (mesh.has_colors()) {
      const Vec3 c = mesh.colors[i] / 255.0;
      out << ' ' << c.x() << ' ' << c.y() << ' ' << c.z();
    }
    out << '\n';
  }
  for (const auto& tri : mesh.triangles) {
    out << "f " << tri[0] + 1 << ' ' << tri[1] + 1 << ' ' << tri[2] + 1 << '\n';
  }
  if (!out) {
    throw IoError(path, "write failed");
  }
}

}  // namespace peel
