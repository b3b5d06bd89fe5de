#pragma once

#include "peel/geometry.hpp"
#include "peel/mesh.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace peel {

/// Pixel index. Rays pass through the pixel center (x + 0.5, y + 0.5).
struct Pixel {
  int x = 0;
  int y = 0;
};

/// Pinhole intrinsics. The camera looks down +z; image rows grow with camera-frame y.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;

  /// Principal point at the image center and fx = fy = height (about 53 degrees vertical FOV).
  static Intrinsics centered(int width, int height);

  void validate() const;
  bool contains(Pixel px) const { return px.x >= 0 && px.y >= 0 && px.x < width && px.y < height; }

  friend bool operator==(const Intrinsics&, const Intrinsics&) = default;
};

/// World-to-camera rigid transform: p_cam = rotation * p_world + translation.
struct RigidPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& camera) const { return rotation.transpose() * (camera - translation); }
  Vec3 camera_center() const { return -(rotation.transpose() * translation); }

  /// Throws ArgumentError unless rotation is orthonormal (1e-9) with determinant +1.
  void validate() const;
};

struct ViewConfig {
  Intrinsics intrinsics;
  RigidPose pose;
  std::string label;
};

/// p' = scale * (p + translation).
struct UnitBoxTransform {
  double scale = 1.0;
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return scale * (p + translation); }
  Vec3 invert(const Vec3& p) const { return p / scale - translation; }
};

inline constexpr double kDefaultViewDistance = 2.0;

/// Unnormalized camera-frame direction through the pixel center; z is exactly 1.
Vec3 ray_direction(const Intrinsics& intr, Pixel px);

/// Camera-frame point at z-depth `depth` on the pixel's ray. Depth 0 is background and yields nullopt.
std::optional<Vec3> backproject_pixel(const Intrinsics& intr, Pixel px, double depth);

struct NormalizedMesh {
  TriMesh mesh;
  UnitBoxTransform transform;
};

/// Centers the bounding box at the origin and scales its longest edge to 1.
NormalizedMesh normalize_unit_box(const TriMesh& mesh);

/// Cameras orbiting the origin about +y at `distance`, looking at the origin with up = +y.
/// Azimuth 0 places the camera at (0, 0, -distance).
std::vector<ViewConfig> view_ring(std::span<const double> angles_deg, double distance,
                                  const Intrinsics& intr);

/// Shortest decimal form of an angle: 45 -> "45", 22.5 -> "22.5".
std::string angle_label(double degrees);

}  // namespace peel
