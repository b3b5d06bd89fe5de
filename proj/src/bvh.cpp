#include "peel/bvh.hpp"

#include "peel/errors.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace peel {

namespace {

constexpr std::uint32_t kMaxLeafSize = 4;
constexpr int kBinCount = 16;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-ray constants of the watertight (sheared, axis-permuted) triangle test.
struct ShearedRay {
  int kx, ky, kz;
  double sx, sy, sz;
  Vec3 origin;

  explicit ShearedRay(const Ray& ray) : origin(ray.origin) {
    const Vec3& d = ray.direction;
    d.cwiseAbs().maxCoeff(&kz);
    kx = (kz + 1) % 3;
    ky = (kx + 1) % 3;
    if (d[kz] < 0.0) {
      std::swap(kx, ky);
    }
    sx = d[kx] / d[kz];
    sy = d[ky] / d[kz];
    sz = 1.0 / d[kz];
  }

  std::optional<TriangleHit> intersect(const Vec3& a, const Vec3& b, const Vec3& c) const {
    const Vec3 pa = a - origin;
    const Vec3 pb = b - origin;
    const Vec3 pc = c - origin;
    const double ax = pa[kx] - sx * pa[kz];
    const double ay = pa[ky] - sy * pa[kz];
    const double bx = pb[kx] - sx * pb[kz];
    const double by = pb[ky] - sy * pb[kz];
    const double cx = pc[kx] - sx * pc[kz];
    const double cy = pc[ky] - sy * pc[kz];

    // Edge functions; a zero value is on the edge and counts as inside.
    const double u = cx * by - cy * bx;
    const double v = ax * cy - ay * cx;
    const double w = bx * ay - by * ax;
    if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) {
      return std::nullopt;
    }
    const double det = u + v + w;
    if (det == 0.0) {
      return std::nullopt;
    }
    const double az = sz * pa[kz];
    const double bz = sz * pb[kz];
    const double cz = sz * pc[kz];
    const double t = (u * az + v * bz + w * cz) / det;
    return TriangleHit{t, Vec3{u / det, v / det, w / det}};
  }
};

struct SlabRay {
  Vec3 origin;
  Vec3 inv_dir;
  std::array<bool, 3> zero;

  explicit SlabRay(const Ray& ray) : origin(ray.origin) {
    for (int i = 0; i < 3; ++i) {
      zero[i] = ray.direction[i] == 0.0;
      inv_dir[i] = zero[i] ? 0.0 : 1.0 / ray.direction[i];
    }
  }

  // True if the box overlaps the ray for some t >= 0.
  bool hits(const Aabb& box) const {
    double t0 = 0.0;
    double t1 = kInf;
    for (int i = 0; i < 3; ++i) {
      if (zero[i]) {
        if (origin[i] < box.min[i] || origin[i] > box.max[i]) {
          return false;
        }
        continue;
      }
      double tn = (box.min[i] - origin[i]) * inv_dir[i];
      double tf = (box.max[i] - origin[i]) * inv_dir[i];
      if (tn > tf) {
        std::swap(tn, tf);
      }
      // Widen slightly so hits on a box face are never culled by rounding.
      tf *= 1.0 + 4.0 * std::numeric_limits<double>::epsilon();
      t0 = std::max(t0, tn);
      t1 = std::min(t1, tf);
      if (t0 > t1) {
        return false;
      }
    }
    return true;
  }
};

double box_distance2(const Aabb& box, const Vec3& p) {
  const Vec3 d = (box.min - p).cwiseMax(p - box.max).cwiseMax(0.0);
  return d.squaredNorm();
}

}  // namespace

std::optional<TriangleHit> intersect_triangle(const Ray& ray, const Vec3& a, const Vec3& b,
                                              const Vec3& c) {
  if (ray.direction.isZero(0.0)) {
    return std::nullopt;
  }
  return ShearedRay(ray).intersect(a, b, c);
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) {
    return a;
  }
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) {
    return b;
  }
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    return a + (d1 / (d1 - d3)) * ab;
  }
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) {
    return c;
  }
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    return a + (d2 / (d2 - d6)) * ac;
  }
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }
  const double denom = va + vb + vc;
  if (denom == 0.0) {
    // Collinear triangle: fall back to the nearest edge point.
    const Vec3 candidates[] = {a, b, c};
    Vec3 best = a;
    for (const Vec3& q : candidates) {
      if ((q - p).squaredNorm() < (best - p).squaredNorm()) {
        best = q;
      }
    }
    return best;
  }
  const double v = vb / denom;
  const double w = vc / denom;
  return a + v * ab + w * ac;
}

Bvh::Bvh(const TriMesh& mesh) : vertices_(mesh.vertices), triangles_(mesh.triangles) {
  if (triangles_.empty()) {
    throw ArgumentError("build_bvh: mesh has no triangles");
  }
  mesh.validate();
  degenerate_.resize(triangles_.size(), 0);
  for (std::size_t i = 0; i < triangles_.size(); ++i) {
    const auto& tri = triangles_[i];
    const Vec3& a = vertices_[tri[0]];
    const Vec3 n = (vertices_[tri[1]] - a).cross(vertices_[tri[2]] - a);
    if (n.squaredNorm() == 0.0) {
      degenerate_[i] = 1;
      ++degenerate_count_;
    }
  }
  build();
}

Aabb Bvh::triangle_bounds(std::uint32_t id) const {
  Aabb box;
  for (std::uint32_t v : triangles_[id]) {
    box.extend(vertices_[v]);
  }
  return box;
}

void Bvh::build() {
  const auto n = static_cast<std::uint32_t>(triangles_.size());
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), 0u);

  std::vector<Aabb> boxes(n);
  std::vector<Vec3> centroids(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    boxes[i] = triangle_bounds(i);
    centroids[i] = boxes[i].center();
  }

  nodes_.reserve(2 * n);
  nodes_.push_back(Node{{}, 0, n});

  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const std::uint32_t node_id = stack.back();
    stack.pop_back();
    const std::uint32_t first = nodes_[node_id].first;
    const std::uint32_t count = nodes_[node_id].count;

    Aabb box;
    Aabb centroid_box;
    for (std::uint32_t i = first; i < first + count; ++i) {
      box.extend(boxes[order_[i]]);
      centroid_box.extend(centroids[order_[i]]);
    }
    nodes_[node_id].box = box;
    if (count <= kMaxLeafSize) {
      continue;
    }

    // Binned SAH over the centroid bounds.
    double best_cost = kInf;
    int best_axis = -1;
    int best_split = 0;
    const Vec3 cextent = centroid_box.extent();
    for (int axis = 0; axis < 3; ++axis) {
      if (!(cextent[axis] > 0.0)) {
        continue;
      }
      std::array<Aabb, kBinCount> bin_box;
      std::array<std::uint32_t, kBinCount> bin_count{};
      const double scale = kBinCount / cextent[axis];
      auto bin_of = [&](std::uint32_t tri) {
        const int b = static_cast<int>((centroids[tri][axis] - centroid_box.min[axis]) * scale);
        return std::clamp(b, 0, kBinCount - 1);
      };
      for (std::uint32_t i = first; i < first + count; ++i) {
        const int b = bin_of(order_[i]);
        bin_box[b].extend(boxes[order_[i]]);
        ++bin_count[b];
      }
      std::array<double, kBinCount> right_area{};
      std::array<std::uint32_t, kBinCount> right_count{};
      Aabb acc;
      std::uint32_t acc_count = 0;
      for (int b = kBinCount - 1; b > 0; --b) {
        acc.extend(bin_box[b]);
        acc_count += bin_count[b];
        right_area[b] = acc.surface_area();
        right_count[b] = acc_count;
      }
      acc = Aabb{};
      acc_count = 0;
      for (int b = 0; b < kBinCount - 1; ++b) {
        acc.extend(bin_box[b]);
        acc_count += bin_count[b];
        if (acc_count == 0 || right_count[b + 1] == 0) {
          continue;
        }
        const double cost = acc.surface_area() * acc_count + right_area[b + 1] * right_count[b + 1];
        if (cost < best_cost) {
          best_cost = cost;
          best_axis = axis;
          best_split = b + 1;
        }
      }
    }
    if (best_axis < 0) {
      continue;  // all centroids coincide; keep as an oversized leaf
    }

    const double scale = kBinCount / cextent[best_axis];
    auto* mid = std::partition(order_.data() + first, order_.data() + first + count,
                               [&](std::uint32_t tri) {
                                 const int b = static_cast<int>(
                                     (centroids[tri][best_axis] - centroid_box.min[best_axis]) *
                                     scale);
                                 return std::clamp(b, 0, kBinCount - 1) < best_split;
                               });
    const auto left_count = static_cast<std::uint32_t>(mid - (order_.data() + first));
    if (left_count == 0 || left_count == count) {
      continue;
    }
    const auto left = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{{}, first, left_count});
    nodes_.push_back(Node{{}, first + left_count, count - left_count});
    nodes_[node_id].first = left;
    nodes_[node_id].count = 0;
    stack.push_back(left + 1);
    stack.push_back(left);
  }
}

std::vector<Hit> Bvh::intersect_all(const Ray& ray) const {
  std::vector<Hit> hits;
  if (ray.direction.isZero(0.0)) {
    return hits;
  }
  const ShearedRay sheared(ray);
  const SlabRay slab(ray);

  std::vector<std::uint32_t> stack;
  stack.reserve(64);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (!slab.hits(node.box)) {
      continue;
    }
    if (!node.is_leaf()) {
      stack.push_back(node.first + 1);
      stack.push_back(node.first);
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const std::uint32_t id = order_[i];
      if (degenerate_[id]) {
        continue;
      }
      const auto& tri = triangles_[id];
      const auto th = sheared.intersect(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
      if (!th || !(th->t > 0.0)) {
        continue;
      }
      Hit hit;
      hit.t = th->t;
      hit.triangle_id = id;
      hit.bary = th->bary;
      hit.point = ray.origin + th->t * ray.direction;
      hit.zdepth = hit.point.z();
      hits.push_back(hit);
    }
  }
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return a.t < b.t || (a.t == b.t && a.triangle_id < b.triangle_id);
  });
  return hits;
}

double Bvh::distance_to_surface(const Vec3& p) const {
  double best = kInf;
  std::vector<std::uint32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (box_distance2(node.box, p) >= best) {
      continue;
    }
    if (!node.is_leaf()) {
      const std::uint32_t l = node.first;
      const std::uint32_t r = node.first + 1;
      // Visit the nearer child first.
      if (box_distance2(nodes_[l].box, p) < box_distance2(nodes_[r].box, p)) {
        stack.push_back(r);
        stack.push_back(l);
      } else {
        stack.push_back(l);
        stack.push_back(r);
      }
      continue;
    }
    for (std::uint32_t i = node.first; i < node.first + node.count; ++i) {
      const auto& tri = triangles_[order_[i]];
      const Vec3 q =
          closest_point_on_triangle(p, vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
      best = std::min(best, (q - p).squaredNorm());
    }
  }
  return std::sqrt(best);
}

std::vector<Hit> peel_trace(const Bvh& bvh, const Ray& ray, std::size_t max_hits, double eps) {
  if (ray.direction.isZero(0.0)) {
    throw ArgumentError("peel_trace: zero direction");
  }
  if (max_hits < 1) {
    throw ArgumentError("peel_trace: max_hits must be at least 1");
  }
  if (!(eps > 0.0)) {
    throw ArgumentError("peel_trace: eps must be positive");
  }
  const std::vector<Hit> all = bvh.intersect_all(ray);
  std::vector<Hit> kept;
  kept.reserve(std::min(all.size(), max_hits));
  for (const Hit& hit : all) {
    if (!kept.empty() && hit.t - kept.back().t < eps) {
      continue;
    }
    if (kept.size() == max_hits) {
      break;
    }
    kept.push_back(hit);
  }
  return kept;
}

}  // namespace peel
