#pragma once

#include "peel/camera.hpp"
#include "peel/geometry.hpp"
#include "peel/image.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace peel {

using DepthMap = Image<float>;
using RgbMap = Image<Rgb>;

enum class ViolationKind {
  kNonFinite,
  kNegativeDepth,
  kMonotonicity,
  kBackgroundColor,
  kShape,
};

struct Violation {
  ViolationKind kind;
  int layer;  // 1-based; 0 when the violation concerns the whole pixel column
  Pixel pixel;
};

/// Counts of invariant violations in a PeeledMapSet. Empty means valid.
struct ValidationReport {
  static constexpr std::size_t kMaxSamples = 32;

  std::size_t non_finite = 0;
  std::size_t negative_depth = 0;
  std::size_t monotonicity = 0;       // pixels whose nonzero depths are not a strictly increasing prefix
  std::size_t background_color = 0;   // depth 0 without RGB (255, 255, 255)
  std::size_t shape = 0;              // layers whose resolution or count disagrees with the set
  std::vector<Violation> samples;     // first kMaxSamples violations

  std::size_t total() const {
    return non_finite + negative_depth + monotonicity + background_color + shape;
  }
  bool clean() const { return total() == 0; }

  friend bool operator==(const ValidationReport& a, const ValidationReport& b) {
    return a.non_finite == b.non_finite && a.negative_depth == b.negative_depth &&
           a.monotonicity == b.monotonicity && a.background_color == b.background_color &&
           a.shape == b.shape;
  }
};

struct MapMeta {
  std::string source;
  std::string view_label;
  std::optional<UnitBoxTransform> unit_box;
  std::optional<RigidPose> pose;
  std::map<std::string, std::string> extra;
  std::optional<ValidationReport> validation;  // attached by decode_maps
};

/// n z-depth layers and n RGB layers sharing one resolution. Background is depth 0
/// with RGB (255, 255, 255). Layer 1 is the visible surface.
struct PeeledMapSet {
  Intrinsics intrinsics;
  std::vector<DepthMap> depth;
  std::vector<RgbMap> rgb;
  MapMeta meta;

  /// All-background set.
  static PeeledMapSet blank(const Intrinsics& intr, int layers);

  int layers() const { return static_cast<int>(depth.size()); }
  int width() const { return intrinsics.width; }
  int height() const { return intrinsics.height; }
  bool same_shape(const PeeledMapSet& other) const;
};

ValidationReport validate(const PeeledMapSet& set);

enum class DepthEncoding {
  kFloat32Pfm,      // depth_k.pfm, lossless
  kQuantized16Png,  // depth_k.png, 16-bit; value range stored in meta.json
};

struct EncodeOptions {
  DepthEncoding depth = DepthEncoding::kFloat32Pfm;
};

/// Writes depth_1..n, rgb_1.png..rgb_n.png and meta.json into `dir` (created if
/// needed). Returns the written paths in that order.
std::vector<std::filesystem::path> encode_maps(const PeeledMapSet& set,
                                               const std::filesystem::path& dir,
                                               const EncodeOptions& options = {});

/// Inverse of encode_maps. Validates the result and attaches the report to meta.
/// Throws DecodeError naming the offending file.
PeeledMapSet decode_maps(const std::filesystem::path& dir);

}  // namespace peel
