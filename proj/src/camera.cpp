#include "peel/camera.hpp"

#include "peel/errors.hpp"

#include <Eigen/Geometry>

#include <charconv>
#include <cmath>
#include <numbers>
#include <set>

namespace peel {

Intrinsics Intrinsics::centered(int width, int height) {
  Intrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.fx = static_cast<double>(height);
  intr.fy = static_cast<double>(height);
  intr.cx = 0.5 * width;
  intr.cy = 0.5 * height;
  intr.validate();
  return intr;
}

void Intrinsics::validate() const {
  if (width < 1 || height < 1) {
    throw ArgumentError("intrinsics: image size must be at least 1x1");
  }
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ArgumentError("intrinsics: focal lengths must be positive and finite");
  }
  if (!(cx >= 0.0 && cx <= width) || !(cy >= 0.0 && cy <= height)) {
    throw ArgumentError("intrinsics: principal point must lie inside the image");
  }
}

void RigidPose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw ArgumentError("pose: non-finite entries");
  }
  const double err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (err > 1e-9) {
    throw ArgumentError("pose: rotation is not orthonormal");
  }
  if (rotation.determinant() < 0.0) {
    throw ArgumentError("pose: rotation has determinant -1");
  }
}

namespace {

void check_pixel(const Intrinsics& intr, Pixel px) {
  if (!intr.contains(px)) {
    throw ArgumentError("pixel (" + std::to_string(px.x) + ", " + std::to_string(px.y) +
                        ") outside " + std::to_string(intr.width) + "x" +
                        std::to_string(intr.height) + " image");
  }
}

}  // namespace

Vec3 ray_direction(const Intrinsics& intr, Pixel px) {
  check_pixel(intr, px);
  const double xs = px.x + 0.5;
  const double ys = px.y + 0.5;
  return {(xs - intr.cx) / intr.fx, (ys - intr.cy) / intr.fy, 1.0};
}

std::optional<Vec3> backproject_pixel(const Intrinsics& intr, Pixel px, double depth) {
  check_pixel(intr, px);
  if (!(depth >= 0.0)) {
    throw ArgumentError("backproject_pixel: depth must be non-negative");
  }
  if (depth == 0.0) {
    return std::nullopt;
  }
  const double x_norm = px.x + 0.5 - intr.cx;
  const double y_norm = px.y + 0.5 - intr.cy;
  return Vec3{x_norm * depth / intr.fx, y_norm * depth / intr.fy, depth};
}

NormalizedMesh normalize_unit_box(const TriMesh& mesh) {
  if (mesh.vertices.empty()) {
    throw ArgumentError("normalize_unit_box: mesh has no vertices");
  }
  for (const Vec3& v : mesh.vertices) {
    if (!v.allFinite()) {
      throw ArgumentError("normalize_unit_box: non-finite vertex");
    }
  }
  const Aabb box = mesh.bounds();
  const double longest = box.extent().maxCoeff();
  if (!(longest > 0.0)) {
    throw DegenerateGeometryError("normalize_unit_box: all vertices coincide");
  }

  NormalizedMesh out;
  out.transform.scale = 1.0 / longest;
  out.transform.translation = -box.center();
  out.mesh = mesh;
  for (Vec3& v : out.mesh.vertices) {
    v = out.transform.apply(v);
  }
  return out;
}

std::vector<ViewConfig> view_ring(std::span<const double> angles_deg, double distance,
                                  const Intrinsics& intr) {
  if (angles_deg.empty()) {
    throw ArgumentError("view_ring: no angles");
  }
  if (!(distance > 0.0) || !std::isfinite(distance)) {
    throw ArgumentError("view_ring: distance must be positive");
  }
  intr.validate();

  std::set<double> seen;
  std::vector<ViewConfig> views;
  views.reserve(angles_deg.size());
  for (double deg : angles_deg) {
    if (!std::isfinite(deg)) {
      throw ArgumentError("view_ring: non-finite angle");
    }
    if (!seen.insert(deg).second) {
      throw ArgumentError("view_ring: duplicate angle " + angle_label(deg));
    }
    const double rad = deg * std::numbers::pi / 180.0;
    const Vec3 center{-distance * std::sin(rad), 0.0, -distance * std::cos(rad)};

    // Rows of the rotation are the camera axes in world coordinates; camera y points down.
    const Vec3 forward = (-center).normalized();
    const Vec3 down{0.0, -1.0, 0.0};
    const Vec3 right = down.cross(forward).normalized();
    const Vec3 cam_down = forward.cross(right);

    ViewConfig view;
    view.intrinsics = intr;
    view.pose.rotation.row(0) = right.transpose();
    view.pose.rotation.row(1) = cam_down.transpose();
    view.pose.rotation.row(2) = forward.transpose();
    view.pose.translation = -(view.pose.rotation * center);
    view.label = angle_label(deg);
    views.push_back(std::move(view));
  }
  return views;
}

std::string angle_label(double degrees) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), degrees);
  if (ec != std::errc{}) {
    return std::to_string(degrees);
  }
  return std::string(buf, end);
}

}  // namespace peel
