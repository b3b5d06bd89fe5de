#pragma once

// Test-only reference implementations, independent of the library code paths they check.

#include "peel/bvh.hpp"
#include "peel/camera.hpp"
#include "peel/mesh.hpp"
#include "peel/peel_maps.hpp"
#include "peel/primitives.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace peel::testing {

struct OracleHit {
  double t;
  std::uint32_t triangle_id;
};

// Moller-Trumbore with inclusive edges, all hits with t > 0, sorted by (t, id).
inline std::vector<OracleHit> brute_force_hits(const TriMesh& mesh, const Ray& ray) {
  std::vector<OracleHit> hits;
  for (std::uint32_t id = 0; id < mesh.triangles.size(); ++id) {
    const auto& tri = mesh.triangles[id];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3 e1 = mesh.vertices[tri[1]] - a;
    const Vec3 e2 = mesh.vertices[tri[2]] - a;
    const Vec3 p = ray.direction.cross(e2);
    const double det = e1.dot(p);
    if (det == 0.0) {
      continue;
    }
    const double inv = 1.0 / det;
    const Vec3 s = ray.origin - a;
    const double u = s.dot(p) * inv;
    if (u < 0.0 || u > 1.0) {
      continue;
    }
    const Vec3 q = s.cross(e1);
    const double v = ray.direction.dot(q) * inv;
    if (v < 0.0 || u + v > 1.0) {
      continue;
    }
    const double t = e2.dot(q) * inv;
    if (t > 0.0) {
      hits.push_back({t, id});
    }
  }
  std::sort(hits.begin(), hits.end(), [](const OracleHit& x, const OracleHit& y) {
    return x.t < y.t || (x.t == y.t && x.triangle_id < y.triangle_id);
  });
  return hits;
}

struct BruteChamfer {
  double fwd = 0.0;
  double bwd = 0.0;
  double sum() const { return fwd + bwd; }
};

inline double brute_directed(std::span<const Vec3> from, std::span<const Vec3> to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) {
      best = std::min(best, (p - q).squaredNorm());
    }
    sum += best;
  }
  return sum;
}

inline BruteChamfer brute_chamfer(std::span<const Vec3> p, std::span<const Vec3> q) {
  return {brute_directed(p, q), brute_directed(q, p)};
}

inline std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<Vec3> pts(n);
  for (Vec3& p : pts) {
    p = Vec3{u(rng), u(rng), u(rng)};
  }
  return pts;
}

// Outer box spanning z in [1, 4] and inner box spanning z in [2, 3], both
// centered on the optical axis of a camera at the origin with identity pose.
// The outer box leaves the image corners empty.
struct NestedBoxes {
  TriMesh mesh;
  ViewConfig view;
  static constexpr double kPlanes[4] = {1.0, 2.0, 3.0, 4.0};

  // Pixels whose ray crosses all four planes through the box front/back faces.
  bool in_core(Pixel px) const {
    const Vec3 d = ray_direction(view.intrinsics, px);
    const double limit = 0.2 / 3.0;  // inner box half-width over its back-face depth
    return std::abs(d.x()) < limit - 1e-9 && std::abs(d.y()) < limit - 1e-9;
  }
};

inline NestedBoxes make_nested_boxes(int resolution = 64) {
  NestedBoxes scene;
  TriMesh outer = make_box({-0.4, -0.4, 1.0}, {0.4, 0.4, 4.0});
  TriMesh inner = make_box({-0.2, -0.2, 2.0}, {0.2, 0.2, 3.0});
  paint(outer, Vec3(200, 30, 30));
  paint(inner, Vec3(30, 30, 200));
  scene.mesh = merge_meshes({outer, inner});
  scene.view.intrinsics = Intrinsics::centered(resolution, resolution);
  scene.view.label = "nested";
  return scene;
}

// Random valid map set: strictly increasing nonzero prefix, white background.
inline PeeledMapSet random_map_set(std::mt19937_64& rng, int width, int height, int layers) {
  PeeledMapSet set = PeeledMapSet::blank(Intrinsics::centered(width, height), layers);
  std::uniform_int_distribution<int> count(0, layers);
  std::uniform_real_distribution<float> step(0.01f, 1.5f);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int hits = count(rng);
      float depth = 0.5f;
      for (int i = 0; i < hits; ++i) {
        depth += step(rng);
        set.depth[i].at(x, y) = depth;
        set.rgb[i].at(x, y) = Rgb{static_cast<std::uint8_t>(byte(rng)),
                                  static_cast<std::uint8_t>(byte(rng)),
                                  static_cast<std::uint8_t>(byte(rng))};
      }
    }
  }
  set.meta.view_label = "random";
  set.meta.source = "generated";
  return set;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("peeled_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace peel::testing
