#include "oracles.hpp"

#include "peel/errors.hpp"
#include "peel/point_cloud.hpp"
#include "peel/primitives.hpp"
#include "peel/render.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

namespace peel {
namespace {

using testing::scratch_dir;

TEST(Backproject, EmptyMapsGiveEmptyCloud) {
  const PeeledMapSet set = PeeledMapSet::blank(Intrinsics::centered(16, 16), 4);
  EXPECT_TRUE(backproject_maps(set).empty());
}

TEST(Backproject, OrderAndLayerLabels) {
  PeeledMapSet set = PeeledMapSet::blank(Intrinsics::centered(2, 2), 3);
  set.depth[0].at(1, 0) = 1.0f;
  set.depth[1].at(1, 0) = 2.0f;
  set.depth[0].at(0, 1) = 3.0f;
  set.rgb[1].at(1, 0) = Rgb{1, 2, 3};
  const PointCloud cloud = backproject_maps(set);
  ASSERT_EQ(cloud.size(), 3u);
  EXPECT_EQ(cloud.layers[0], 1);
  EXPECT_EQ(cloud.layers[1], 2);
  EXPECT_EQ(cloud.layers[2], 1);
  EXPECT_EQ(cloud.points[1].z(), 2.0);
  EXPECT_EQ(cloud.points[2].z(), 3.0);
  EXPECT_EQ(cloud.colors[1], (Rgb{1, 2, 3}));
  // pixel (1, 0) of a 2x2 centered camera: sample (1.5, 0.5), principal point (1, 1), f = 2
  EXPECT_DOUBLE_EQ(cloud.points[0].x(), 0.25);
  EXPECT_DOUBLE_EQ(cloud.points[0].y(), -0.25);
}

TEST(Backproject, NestedBoxPointsLieOnPlanes) {
  const auto scene = testing::make_nested_boxes(40);
  const PeeledMapSet set = render_peeled(scene.mesh, scene.view);
  const PointCloud cloud = backproject_maps(set);
  ASSERT_GT(cloud.size(), 0u);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    // every point is on a face of one of the two boxes
    const bool outer = std::abs(p.z() - 1.0) <= 1e-6 || std::abs(p.z() - 4.0) <= 1e-6 ||
                       std::abs(std::abs(p.x()) - 0.4) <= 1e-6 ||
                       std::abs(std::abs(p.y()) - 0.4) <= 1e-6;
    const bool inner = std::abs(p.z() - 2.0) <= 1e-6 || std::abs(p.z() - 3.0) <= 1e-6 ||
                       std::abs(std::abs(p.x()) - 0.2) <= 1e-6 ||
                       std::abs(std::abs(p.y()) - 0.2) <= 1e-6;
    EXPECT_TRUE(outer || inner) << p.transpose();
  }
}

TEST(Backproject, WorldFrameUndoesPoseAndUnitBox) {
  const TriMesh original = make_icosphere(3, 3.0, {5.0, -1.0, 2.0});
  const auto normalized = normalize_unit_box(original);
  const std::array<double, 1> angle{45.0};
  const ViewConfig view = view_ring(angle, 2.0, Intrinsics::centered(48, 48))[0];
  PeeledMapSet set = render_peeled(normalized.mesh, view);
  set.meta.unit_box = normalized.transform;
  const PointCloud cloud = backproject_maps(set, {.world_frame = true});
  ASSERT_GT(cloud.size(), 100u);
  const Bvh bvh(original);
  for (const Vec3& p : cloud.points) {
    EXPECT_LE(bvh.distance_to_surface(p), 1e-5 * 6.0);
  }
}

TEST(Backproject, RoundTripOnSurface) {
  const TriMesh mesh = normalize_unit_box(make_humanoid()).mesh;
  const double diag = mesh.bounds().diagonal();
  const Bvh bvh(mesh);
  const std::array<double, 4> angles{0.0, 45.0, 60.0, 90.0};
  for (const ViewConfig& view : view_ring(angles, 2.0, Intrinsics::centered(64, 64))) {
    const PointCloud cloud = backproject_maps(render_peeled(mesh, view), {.world_frame = true});
    ASSERT_GT(cloud.size(), 0u);
    for (const Vec3& p : cloud.points) {
      EXPECT_LE(bvh.distance_to_surface(p), 1e-3 * diag);
    }
  }
}

TEST(ColorByLayer, Palette) {
  PointCloud cloud;
  for (std::uint8_t k = 1; k <= 5; ++k) {
    cloud.push_back(Vec3::Zero(), Rgb{1, 1, 1}, k);
  }
  const PointCloud colored = color_by_layer(cloud);
  EXPECT_EQ(colored.colors[0], (Rgb{255, 0, 0}));
  EXPECT_EQ(colored.colors[1], (Rgb{0, 0, 255}));
  EXPECT_EQ(colored.colors[2], (Rgb{0, 255, 0}));
  EXPECT_EQ(colored.colors[3], (Rgb{255, 255, 0}));
  EXPECT_EQ(colored.points, cloud.points);
}

PointCloud random_cloud(std::mt19937_64& rng, std::size_t n) {
  PointCloud cloud;
  for (const Vec3& p : testing::random_points(rng, n, 10.0)) {
    const auto f = [](double v) { return static_cast<double>(static_cast<float>(v)); };
    cloud.push_back(Vec3{f(p.x()), f(p.y()), f(p.z())},
                    Rgb{static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                        static_cast<std::uint8_t>(rng())},
                    static_cast<std::uint8_t>(1 + rng() % 4));
  }
  return cloud;
}

TEST(Ply, RoundTripBothFormats) {
  std::mt19937_64 rng(21);
  const auto dir = scratch_dir("ply");
  const PointCloud cloud = random_cloud(rng, 257);
  for (PlyFormat format : {PlyFormat::kAscii, PlyFormat::kBinaryLittleEndian}) {
    const auto path = dir / (format == PlyFormat::kAscii ? "a.ply" : "b.ply");
    write_ply(cloud, path, format);
    std::vector<std::string> warnings;
    const PointCloud back = read_ply(path, &warnings);
    EXPECT_TRUE(warnings.empty());
    ASSERT_EQ(back.size(), cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      ASSERT_EQ(back.points[i], cloud.points[i]) << i;
    }
    EXPECT_EQ(back.colors, cloud.colors);
    EXPECT_EQ(back.layers, cloud.layers);
  }
}

TEST(Ply, EmptyCloudIsValid) {
  const auto dir = scratch_dir("ply_empty");
  write_ply(PointCloud{}, dir / "e.ply");
  EXPECT_TRUE(read_ply(dir / "e.ply").empty());
}

TEST(Ply, MissingLayerDefaultsWithWarning) {
  const auto dir = scratch_dir("ply_nolayer");
  std::ofstream(dir / "p.ply") << "ply\nformat ascii 1.0\nelement vertex 2\n"
                                  "property float x\nproperty float y\nproperty float z\n"
                                  "end_header\n0 0 0\n1 2 3\n";
  std::vector<std::string> warnings;
  const PointCloud cloud = read_ply(dir / "p.ply", &warnings);
  ASSERT_EQ(cloud.size(), 2u);
  EXPECT_EQ(cloud.layers[1], 1);
  EXPECT_EQ(cloud.colors[1], kBackgroundRgb);
  EXPECT_EQ(cloud.points[1], Vec3(1, 2, 3));
  EXPECT_EQ(warnings.size(), 2u);
}

TEST(Ply, MalformedInputs) {
  const auto dir = scratch_dir("ply_bad");
  std::ofstream(dir / "h.ply") << "ply\nformat ascii 1.0\nelement vertex 2\nproperty float x\n";
  std::ofstream(dir / "c.ply") << "ply\nformat ascii 1.0\nelement vertex 3\n"
                                  "property float x\nproperty float y\nproperty float z\n"
                                  "end_header\n0 0 0\n1 2 3\n";
  std::ofstream(dir / "n.ply") << "ply\nformat ascii 1.0\nelement face 1\n"
                                  "property list uchar int vertex_indices\nend_header\n3 0 1 2\n";
  try {
    read_ply(dir / "h.ply");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::kMalformedHeader);
  }
  try {
    read_ply(dir / "c.ply");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::kCountMismatch);
  }
  EXPECT_THROW(read_ply(dir / "n.ply"), ParseError);
  EXPECT_THROW(read_ply(dir / "absent.ply"), IoError);
}

TEST(SampleSurface, SingleTriangle) {
  TriMesh mesh;
  mesh.vertices = {Vec3{0, 0, 1}, Vec3{2, 0, 1}, Vec3{0, 3, 1}};
  mesh.triangles = {{0, 1, 2}};
  const PointCloud cloud = sample_surface(mesh, 2000, 5);
  ASSERT_EQ(cloud.size(), 2000u);
  for (const Vec3& p : cloud.points) {
    EXPECT_NEAR(p.z(), 1.0, 1e-9);
    EXPECT_GE(p.x(), -1e-12);
    EXPECT_GE(p.y(), -1e-12);
    EXPECT_LE(p.x() / 2.0 + p.y() / 3.0, 1.0 + 1e-12);
  }
}

TEST(SampleSurface, SphereRadius) {
  const PointCloud cloud = sample_surface(make_icosphere(4, 1.0), 10000, 6);
  double mean = 0.0;
  for (const Vec3& p : cloud.points) {
    mean += p.norm();
  }
  mean /= static_cast<double>(cloud.size());
  EXPECT_NEAR(mean, 1.0, 0.01);
}

TEST(SampleSurface, AreaWeighted) {
  // two disjoint squares with area ratio 9:1
  TriMesh mesh;
  mesh.vertices = {Vec3{0, 0, 0}, Vec3{3, 0, 0}, Vec3{3, 3, 0}, Vec3{0, 3, 0},
                   Vec3{10, 0, 0}, Vec3{11, 0, 0}, Vec3{11, 1, 0}, Vec3{10, 1, 0}};
  mesh.triangles = {{0, 1, 2}, {0, 2, 3}, {4, 5, 6}, {4, 6, 7}};
  const std::size_t n = 20000;
  const PointCloud cloud = sample_surface(mesh, n, 7);
  std::size_t small = 0;
  for (const Vec3& p : cloud.points) {
    small += p.x() >= 10.0;
  }
  const double expected = n * 0.1;
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  EXPECT_NEAR(static_cast<double>(small), expected, 3.0 * sigma);
}

TEST(SampleSurface, SeedDeterminism) {
  const TriMesh mesh = make_humanoid();
  const PointCloud a = sample_surface(mesh, 500, 99);
  const PointCloud b = sample_surface(mesh, 500, 99);
  const PointCloud c = sample_surface(mesh, 500, 100);
  EXPECT_EQ(a.points, b.points);
  EXPECT_NE(a.points, c.points);
}

TEST(SampleSurface, DegenerateMesh) {
  TriMesh mesh;
  mesh.vertices = {Vec3{0, 0, 0}, Vec3{1, 1, 1}, Vec3{2, 2, 2}};
  mesh.triangles = {{0, 1, 2}};
  EXPECT_THROW(sample_surface(mesh, 10, 1), DegenerateGeometryError);
  EXPECT_THROW(sample_surface(make_icosphere(1), 0, 1), ArgumentError);
}

}  // namespace
}  // namespace peel
