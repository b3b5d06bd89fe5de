#include "peel/render.hpp"

#include "peel/errors.hpp"
#include "peel/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

namespace peel {

namespace {

std::uint8_t round_channel(double value) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(value + 0.5), 0.0, 255.0));
}

}  // namespace

Rgb shade_hit(const TriMesh& mesh, const Hit& hit, Rgb flat) {
  if (!mesh.has_colors()) {
    return flat;
  }
  const auto& tri = mesh.triangles.at(hit.triangle_id);
  const Vec3 c = hit.bary.x() * mesh.colors[tri[0]] + hit.bary.y() * mesh.colors[tri[1]] +
                 hit.bary.z() * mesh.colors[tri[2]];
  return {round_channel(c.x()), round_channel(c.y()), round_channel(c.z())};
}

PeeledMapSet render_peeled(const TriMesh& mesh, const ViewConfig& view,
                           const RenderOptions& options, RenderDiagnostics* diagnostics) {
  if (options.layers < 1) {
    throw ArgumentError("render_peeled: need at least one layer");
  }
  if (options.layers > 255) {
    throw ArgumentError("render_peeled: at most 255 layers");
  }
  view.intrinsics.validate();
  view.pose.validate();
  mesh.validate();

  // Trace in the camera frame: the pixel ray has origin 0 and direction z = 1,
  // so the ray parameter of a hit is its z-depth.
  TriMesh camera_mesh;
  camera_mesh.triangles = mesh.triangles;
  camera_mesh.vertices.reserve(mesh.vertices.size());
  for (const Vec3& v : mesh.vertices) {
    camera_mesh.vertices.push_back(view.pose.to_camera(v));
  }
  const Bvh bvh(camera_mesh);

  double eps = options.dedup_eps.value_or(kDefaultDedupFactor * mesh.bounds().diagonal());
  if (!(eps > 0.0)) {
    eps = 1e-12;
  }

  const Intrinsics& intr = view.intrinsics;
  const int layers = options.layers;
  PeeledMapSet set = PeeledMapSet::blank(intr, layers);
  set.meta.view_label = view.label;
  set.meta.pose = view.pose;

  std::atomic<std::size_t> hit_pixels{0};
  std::atomic<std::size_t> truncated{0};
  parallel_for(static_cast<std::size_t>(intr.height), options.threads, [&](std::size_t row) {
    const int y = static_cast<int>(row);
    std::size_t row_hits = 0;
    std::size_t row_truncated = 0;
    for (int x = 0; x < intr.width; ++x) {
      const Ray ray{Vec3::Zero(), ray_direction(intr, {x, y})};
      const std::vector<Hit> hits =
          peel_trace(bvh, ray, static_cast<std::size_t>(layers) + 1, eps);
      if (hits.empty()) {
        continue;
      }
      ++row_hits;
      if (hits.size() > static_cast<std::size_t>(layers)) {
        ++row_truncated;
      }
      int layer = 0;
      float previous = 0.0f;
      for (const Hit& hit : hits) {
        if (layer == layers) {
          break;
        }
        const auto depth = static_cast<float>(hit.zdepth);
        // Distinct double depths can round to the same float; keep the layer prefix strictly increasing.
        if (!(depth > previous)) {
          continue;
        }
        set.depth[layer].at(x, y) = depth;
        set.rgb[layer].at(x, y) = shade_hit(mesh, hit, options.flat_color);
        previous = depth;
        ++layer;
      }
    }
    hit_pixels += row_hits;
    truncated += row_truncated;
  });

  if (diagnostics) {
    diagnostics->degenerate_triangles = bvh.degenerate_count();
    diagnostics->hit_pixels = hit_pixels;
    diagnostics->truncated_pixels = truncated;
  }
  return set;
}

}  // namespace peel
