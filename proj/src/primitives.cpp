#include "peel/primitives.hpp"

#include "peel/errors.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

namespace peel {

TriMesh make_icosphere(int subdivisions, double radius, const Vec3& center) {
  if (subdivisions < 0 || !(radius > 0.0)) {
    throw ArgumentError("make_icosphere: need subdivisions >= 0 and radius > 0");
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (Vec3& v : verts) {
    v.normalize();
  }
  std::vector<TriMesh::Triangle> tris = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
  };

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) {
        return it->second;
      }
      verts.push_back((0.5 * (verts[a] + verts[b])).normalized());
      const auto id = static_cast<std::uint32_t>(verts.size() - 1);
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<TriMesh::Triangle> next;
    next.reserve(tris.size() * 4);
    for (const auto& tri : tris) {
      const std::uint32_t ab = midpoint(tri[0], tri[1]);
      const std::uint32_t bc = midpoint(tri[1], tri[2]);
      const std::uint32_t ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }

  TriMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const Vec3& v : verts) {
    mesh.vertices.push_back(center + radius * v);
  }
  mesh.triangles = std::move(tris);
  return mesh;
}

TriMesh make_box(const Vec3& lo, const Vec3& hi) {
  TriMesh mesh;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.emplace_back((i & 1) ? hi.x() : lo.x(), (i & 2) ? hi.y() : lo.y(),
                               (i & 4) ? hi.z() : lo.z());
  }
  // Two triangles per face, outward winding.
  mesh.triangles = {
      {0, 2, 1}, {1, 2, 3},  // z = lo
      {4, 5, 6}, {5, 7, 6},  // z = hi
      {0, 1, 4}, {1, 5, 4},  // y = lo
      {2, 6, 3}, {3, 6, 7},  // y = hi
      {0, 4, 2}, {2, 4, 6},  // x = lo
      {1, 3, 5}, {3, 7, 5},  // x = hi
  };
  return mesh;
}

TriMesh merge_meshes(const std::vector<TriMesh>& parts) {
  TriMesh out;
  bool colored = !parts.empty();
  for (const TriMesh& part : parts) {
    colored = colored && part.has_colors();
  }
  for (const TriMesh& part : parts) {
    const auto base = static_cast<std::uint32_t>(out.vertices.size());
    out.vertices.insert(out.vertices.end(), part.vertices.begin(), part.vertices.end());
    if (colored) {
      out.colors.insert(out.colors.end(), part.colors.begin(), part.colors.end());
    }
    for (const auto& tri : part.triangles) {
      out.triangles.push_back({tri[0] + base, tri[1] + base, tri[2] + base});
    }
  }
  return out;
}

void paint(TriMesh& mesh, const Vec3& rgb255) {
  mesh.colors.assign(mesh.vertices.size(), rgb255);
}

namespace {

TriMesh ellipsoid(const Vec3& center, const Vec3& radii, const Mat3& rotation, const Vec3& color) {
  TriMesh m = make_icosphere(3);
  for (Vec3& v : m.vertices) {
    v = center + rotation * radii.cwiseProduct(v);
  }
  paint(m, color);
  return m;
}

// Ellipsoid spanning the segment from a to b.
TriMesh limb(const Vec3& a, const Vec3& b, double radius, const Vec3& color) {
  const Vec3 axis = b - a;
  const Mat3 rot = Eigen::Quaterniond::FromTwoVectors(Vec3::UnitY(), axis).toRotationMatrix();
  return ellipsoid(0.5 * (a + b), {radius, 0.5 * axis.norm() + 0.5 * radius, radius}, rot, color);
}

}  // namespace

TriMesh make_humanoid(double arm_spread_deg, double stride_deg) {
  const Vec3 skin{224, 172, 140};
  const Vec3 shirt{40, 90, 170};
  const Vec3 pants{50, 50, 60};
  const double arm = arm_spread_deg * std::numbers::pi / 180.0;
  const double stride = stride_deg * std::numbers::pi / 180.0;

  std::vector<TriMesh> parts;
  parts.push_back(ellipsoid({0, 1.66, 0}, {0.09, 0.115, 0.1}, Mat3::Identity(), skin));
  parts.push_back(limb({0, 1.47, 0}, {0, 1.56, 0}, 0.045, skin));
  parts.push_back(ellipsoid({0, 1.23, 0}, {0.17, 0.26, 0.1}, Mat3::Identity(), shirt));
  parts.push_back(ellipsoid({0, 0.95, 0}, {0.16, 0.1, 0.1}, Mat3::Identity(), pants));

  for (double side : {-1.0, 1.0}) {
    const Vec3 shoulder{side * 0.2, 1.43, 0};
    const Vec3 elbow = shoulder + 0.3 * Vec3{side * std::sin(arm), -std::cos(arm), 0};
    const Vec3 wrist = elbow + 0.27 * Vec3{side * std::sin(0.6 * arm), -std::cos(0.6 * arm), 0.05};
    parts.push_back(limb(shoulder, elbow, 0.048, shirt));
    parts.push_back(limb(elbow, wrist, 0.04, skin));

    const Vec3 hip{side * 0.09, 0.92, 0};
    const double swing = side * stride;
    const Vec3 knee = hip + 0.43 * Vec3{0, -std::cos(swing), std::sin(swing)};
    const Vec3 ankle = knee + 0.42 * Vec3{0, -1.0, 0};
    parts.push_back(limb(hip, knee, 0.07, pants));
    parts.push_back(limb(knee, ankle, 0.055, pants));
    parts.push_back(limb(ankle + Vec3{0, 0.02, -0.03}, ankle + Vec3{0, 0.02, 0.15}, 0.04, skin));
  }
  return merge_meshes(parts);
}

}  // namespace peel
