#pragma once

#include "peel/geometry.hpp"
#include "peel/mesh.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace peel {

/// One ray-surface intersection. `point` and `zdepth` are expressed in the ray's frame.
struct Hit {
  double t = 0.0;
  double zdepth = 0.0;
  std::uint32_t triangle_id = 0;
  Vec3 bary = Vec3::Zero();  // weights of the triangle's vertices 0, 1, 2
  Vec3 point = Vec3::Zero();
};

struct TriangleHit {
  double t;
  Vec3 bary;
};

/// Edge-function ray/triangle test with inclusive edges. Returns nothing for
/// misses, rays parallel to the triangle plane, and zero-area triangles. The
/// returned t may be negative.
std::optional<TriangleHit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                              const Vec3& c);

/// Closest point on triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Binary SAH bounding volume hierarchy over a mesh's triangles. Owns a copy of
/// the geometry, so it stays valid after the source mesh goes away.
class Bvh {
 public:
  struct Node {
    Aabb box;
    std::uint32_t first = 0;  // leaf: offset into triangle_order(); inner: index of left child
    std::uint32_t count = 0;  // leaf: triangle count; inner: 0 (right child is first + 1)

    bool is_leaf() const { return count > 0; }
  };

  /// Throws ArgumentError for a mesh without triangles.
  explicit Bvh(const TriMesh& mesh);

  /// Every intersection with t > 0, sorted by (t, triangle_id). No deduplication.
  std::vector<Hit> intersect_all(const Ray& ray) const;

  /// Distance from p to the nearest point on the surface.
  double distance_to_surface(const Vec3& p) const;

  const Aabb& bounds() const { return nodes_.front().box; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const std::uint32_t> triangle_order() const { return order_; }
  std::size_t triangle_count() const { return triangles_.size(); }
  std::size_t degenerate_count() const { return degenerate_count_; }
  Aabb triangle_bounds(std::uint32_t id) const;

 private:
  void build();

  std::vector<Vec3> vertices_;
  std::vector<TriMesh::Triangle> triangles_;
  std::vector<std::uint8_t> degenerate_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::size_t degenerate_count_ = 0;
};

/// All intersections along the ray with t > 0, sorted ascending, hits closer than
/// `eps` in t to the previous kept hit merged into it, truncated to `max_hits`.
std::vector<Hit> peel_trace(const Bvh& bvh, const Ray& ray, std::size_t max_hits, double eps);

}  // namespace peel
