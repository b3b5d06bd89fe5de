#pragma once

#include "peel/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace peel {

/// Indexed triangle mesh with optional per-vertex colors in [0, 255].
struct TriMesh {
  using Triangle = std::array<std::uint32_t, 3>;

  std::vector<Vec3> vertices;
  std::vector<Vec3> colors;  // empty, or one per vertex
  std::vector<Triangle> triangles;

  bool has_colors() const { return !colors.empty(); }

  /// Throws ArgumentError on out-of-range indices, color count mismatch or non-finite coordinates.
  void validate() const;

  Aabb bounds() const;

  double triangle_area(std::size_t index) const;
  double surface_area() const;
};

/// Wavefront OBJ: `v x y z [r g b]` with r, g, b in [0, 1], polygonal `f` records are fan-triangulated.
TriMesh load_obj(const std::filesystem::path& path);

/// ASCII or binary PLY with a `vertex` element (x, y, z, optional red/green/blue) and a `face` list element.
TriMesh load_ply_mesh(const std::filesystem::path& path);

/// Dispatches on the file extension (.obj or .ply).
TriMesh load_mesh(const std::filesystem::path& path);

void write_obj(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace peel
