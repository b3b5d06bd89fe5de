#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <limits>

namespace peel {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kBackgroundRgb{255, 255, 255};
inline constexpr Rgb kDefaultFlatColor{128, 128, 128};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

/// Axis-aligned bounding box. Default-constructed boxes are empty.
struct Aabb {
  Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

  bool empty() const { return (min.array() > max.array()).any(); }

  void extend(const Vec3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  void extend(const Aabb& other) {
    min = min.cwiseMin(other.min);
    max = max.cwiseMax(other.max);
  }

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return 0.5 * (min + max); }
  double diagonal() const { return empty() ? 0.0 : extent().norm(); }

  bool contains(const Aabb& other) const {
    return (other.min.array() >= min.array()).all() && (other.max.array() <= max.array()).all();
  }

  double surface_area() const {
    if (empty()) {
      return 0.0;
    }
    const Vec3 e = extent();
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.z() * e.x());
  }
};

}  // namespace peel
