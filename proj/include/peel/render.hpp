#pragma once

#include "peel/bvh.hpp"
#include "peel/camera.hpp"
#include "peel/mesh.hpp"
#include "peel/peel_maps.hpp"

#include <cstddef>
#include <optional>

namespace peel {

inline constexpr int kDefaultLayers = 4;
inline constexpr double kDefaultDedupFactor = 1e-6;

struct RenderOptions {
  int layers = kDefaultLayers;
  std::optional<double> dedup_eps;  // default: kDefaultDedupFactor * mesh bounding-box diagonal
  Rgb flat_color = kDefaultFlatColor;
  int threads = 0;  // see resolve_thread_count
};

struct RenderDiagnostics {
  std::size_t degenerate_triangles = 0;
  std::size_t hit_pixels = 0;
  std::size_t truncated_pixels = 0;  // pixels whose ray had more hits than layers
};

/// Barycentric blend of the hit triangle's vertex colors, rounded half up.
/// Colorless meshes return `flat`.
Rgb shade_hit(const TriMesh& mesh, const Hit& hit, Rgb flat = kDefaultFlatColor);

/// Peels `mesh` as seen from `view` into a layered depth/RGB set. Depth is camera-frame z.
PeeledMapSet render_peeled(const TriMesh& mesh, const ViewConfig& view,
                           const RenderOptions& options = {},
                           RenderDiagnostics* diagnostics = nullptr);

}  // namespace peel
