#pragma once

#include "peel/geometry.hpp"
#include "peel/mesh.hpp"
#include "peel/peel_maps.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace peel {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Rgb> colors;
  std::vector<std::uint8_t> layers;  // 1-based layer index

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }

  void push_back(const Vec3& p, Rgb color, std::uint8_t layer) {
    points.push_back(p);
    colors.push_back(color);
    layers.push_back(layer);
  }

  /// Throws ArgumentError on length mismatch or NaN coordinates.
  void validate() const;
};

struct BackprojectOptions {
  /// Undo the view pose and unit-box transform recorded in the set's meta.
  bool world_frame = false;
};

/// One point per (pixel, layer) with nonzero depth, ordered row-major then by layer.
PointCloud backproject_maps(const PeeledMapSet& set, const BackprojectOptions& options = {});

/// Red, blue, green, yellow for layers 1..4; later layers cycle.
PointCloud color_by_layer(PointCloud cloud);

enum class PlyFormat { kAscii, kBinaryLittleEndian };

/// x, y, z float; red, green, blue uchar; layer uchar.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path,
               PlyFormat format = PlyFormat::kBinaryLittleEndian);

/// Accepts any PLY with x/y/z vertex properties. Missing colors default to
/// white, a missing layer property defaults to 1; both add a warning.
PointCloud read_ply(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Area-weighted uniform samples with barycentrically interpolated colors, all labeled layer 1.
PointCloud sample_surface(const TriMesh& mesh, std::size_t count, std::uint64_t seed);

}  // namespace peel
