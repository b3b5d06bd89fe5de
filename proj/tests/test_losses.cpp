#include "oracles.hpp"

#include "peel/errors.hpp"
#include "peel/losses.hpp"

#include <gtest/gtest.h>

#include <random>

namespace peel {
namespace {

using testing::brute_chamfer;
using testing::random_points;

std::vector<Vec3> pts(std::initializer_list<Vec3> list) { return list; }

TEST(Chamfer, Examples) {
  const auto p = pts({Vec3{0, 0, 0}});
  EXPECT_EQ(chamfer(p, p).sum, 0.0);
  const auto q = pts({Vec3{1, 0, 0}});
  EXPECT_EQ(chamfer(p, q).sum, 2.0);
  const auto two = pts({Vec3{0, 0, 0}, Vec3{2, 0, 0}});
  // forward: 0 + 1; backward: 1 + 0
  const auto r = chamfer(two, pts({Vec3{1, 0, 0}, Vec3{0, 0, 0}}));
  EXPECT_EQ(r.sum, 2.0);
  EXPECT_EQ(r.mean_fwd, 0.5);
  EXPECT_EQ(r.mean_bwd, 0.5);
  const auto s = chamfer(pts({Vec3{0, 0, 0}, Vec3{0, 0, 1}}), pts({Vec3{0, 0, 0}, Vec3{0, 1, 1}}));
  EXPECT_EQ(s.sum, 2.0);
}

TEST(Chamfer, EmptyInputRejected) {
  const auto p = pts({Vec3{0, 0, 0}});
  EXPECT_THROW(chamfer(p, std::vector<Vec3>{}), ArgumentError);
  EXPECT_THROW(chamfer(std::vector<Vec3>{}, p), ArgumentError);
}

TEST(Chamfer, MatchesBruteForceAndIsSymmetric) {
  std::mt19937_64 rng(101);
  for (int i = 0; i < 60; ++i) {
    const auto p = random_points(rng, 1 + rng() % 500);
    const auto q = random_points(rng, 1 + rng() % 500, 1.5);
    const auto fast = chamfer(p, q, 1);
    const auto slow = brute_chamfer(p, q);
    EXPECT_NEAR(fast.sum, slow.sum(), 1e-9 * std::max(1.0, slow.sum()));
    EXPECT_NEAR(fast.mean_fwd, slow.fwd / p.size(), 1e-12 * std::max(1.0, slow.fwd));
    EXPECT_EQ(chamfer(q, p, 1).sum, fast.sum);
  }
}

TEST(Chamfer, ClusteredAndDuplicatePoints) {
  std::mt19937_64 rng(5);
  auto p = random_points(rng, 200, 1e-3);
  auto q = p;
  q.insert(q.end(), p.begin(), p.begin() + 50);  // duplicates
  for (int i = 0; i < 100; ++i) {
    q.push_back(Vec3{5, 5, 5});
  }
  const auto fast = chamfer(p, q, 1);
  EXPECT_NEAR(fast.sum, brute_chamfer(p, q).sum(), 1e-9 * fast.sum);
}

TEST(Chamfer, ThreadCountIndependent) {
  std::mt19937_64 rng(7);
  const auto p = random_points(rng, 3000);
  const auto q = random_points(rng, 2000);
  EXPECT_EQ(chamfer(p, q, 1).sum, chamfer(p, q, 4).sum);
}

TEST(Chamfer, SmallTranslationClosedForm) {
  std::mt19937_64 rng(9);
  // well-separated points so each nearest neighbor is the translated copy
  std::vector<Vec3> p;
  for (int x = 0; x < 6; ++x) {
    for (int y = 0; y < 6; ++y) {
      for (int z = 0; z < 6; ++z) {
        p.push_back(Vec3(x, y, z) * 0.5);
      }
    }
  }
  const Vec3 t{0.01, -0.02, 0.005};
  std::vector<Vec3> q = p;
  for (Vec3& v : q) {
    v += t;
  }
  EXPECT_NEAR(chamfer(p, q).sum, 2.0 * p.size() * t.squaredNorm(), 1e-12);
}

TEST(KdTree, NearestMatchesLinearScan) {
  std::mt19937_64 rng(13);
  const auto points = random_points(rng, 1000);
  const KdTree tree(points);
  for (const Vec3& query : random_points(rng, 300, 1.3)) {
    double best = 1e300;
    for (const Vec3& p : points) {
      best = std::min(best, (p - query).squaredNorm());
    }
    const auto n = tree.nearest(query);
    EXPECT_EQ(n.distance2, best);
    EXPECT_EQ((points[n.index] - query).squaredNorm(), best);
  }
}

PeeledMapSet flat_set(int w, int h, int layers, float depth) {
  PeeledMapSet set = PeeledMapSet::blank(Intrinsics::centered(w, h), layers);
  for (int k = 0; k < layers; ++k) {
    for (float& d : set.depth[k].data()) {
      d = depth + k;
    }
  }
  return set;
}

TEST(DepthLoss, ZeroOnIdentity) {
  std::mt19937_64 rng(3);
  const auto set = testing::random_map_set(rng, 9, 7, 4);
  EXPECT_EQ(depth_loss(set, set, 10.0), 0.0);
  EXPECT_EQ(rgb_loss(set, set), 0.0);
  EXPECT_EQ(smoothness_loss(set, set), 0.0);
}

TEST(DepthLoss, LayerWeights) {
  const PeeledMapSet gt = flat_set(1, 1, 4, 1.0f);
  PeeledMapSet pred = gt;
  pred.depth[0].at(0, 0) += 0.25f;
  EXPECT_EQ(depth_loss(pred, gt, 10.0), 0.25);
  pred = gt;
  pred.depth[2].at(0, 0) += 0.25f;
  EXPECT_EQ(depth_loss(pred, gt, 10.0), 2.5);
  EXPECT_EQ(depth_loss(pred, gt, 1.0), 0.25);
  // float storage: 0.2 is not exact
  pred = gt;
  pred.depth[3].at(0, 0) = 4.2f;
  EXPECT_NEAR(depth_loss(pred, gt, 10.0), 2.0, 1e-5);
}

TEST(DepthLoss, GammaSkipsGroundTruthBackground) {
  PeeledMapSet gt = flat_set(1, 1, 4, 1.0f);
  gt.depth[2].at(0, 0) = 0.0f;
  gt.depth[3].at(0, 0) = 0.0f;
  PeeledMapSet pred = gt;
  pred.depth[2].at(0, 0) = 0.5f;
  EXPECT_EQ(depth_loss(pred, gt, 10.0), 0.5);
}

TEST(DepthLoss, GammaLinearityOnOccludedLayer) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<float> noise(-0.3f, 0.3f);
  const PeeledMapSet gt = flat_set(16, 16, 4, 2.0f);
  PeeledMapSet pred = gt;
  for (float& d : pred.depth[2].data()) {
    d += noise(rng);
  }
  const double base = depth_loss(pred, gt, 1.0);
  ASSERT_GT(base, 0.0);
  for (double gamma : {2.0, 10.0, 37.5}) {
    EXPECT_NEAR(depth_loss(pred, gt, gamma), gamma * base, 1e-12 * gamma * base);
  }
  EXPECT_THROW(depth_loss(pred, gt, 0.5), ArgumentError);
}

TEST(RgbLoss, ScaledChannelDifference) {
  PeeledMapSet gt = PeeledMapSet::blank(Intrinsics::centered(1, 1), 2);
  PeeledMapSet pred = gt;
  pred.rgb[1].at(0, 0) = Rgb{204, 255, 255};
  EXPECT_DOUBLE_EQ(rgb_loss(pred, gt), 0.2);
  // the first layer is not part of this term
  pred.rgb[0].at(0, 0) = Rgb{0, 0, 0};
  EXPECT_DOUBLE_EQ(rgb_loss(pred, gt), 0.2);
}

TEST(Gradient, ForwardDifferences) {
  Image<double> m(2, 2);
  m.at(0, 0) = 0;
  m.at(1, 0) = 1;
  m.at(0, 1) = 2;
  m.at(1, 1) = 4;
  const Gradient g = image_gradient(m);
  EXPECT_EQ(g.dx.at(0, 0), 1);
  EXPECT_EQ(g.dx.at(0, 1), 2);
  EXPECT_EQ(g.dx.at(1, 0), 0);
  EXPECT_EQ(g.dx.at(1, 1), 0);
  EXPECT_EQ(g.dy.at(0, 0), 2);
  EXPECT_EQ(g.dy.at(1, 0), 3);
  EXPECT_EQ(g.dy.at(0, 1), 0);
  EXPECT_EQ(g.dy.at(1, 1), 0);
  EXPECT_THROW(image_gradient(Image<double>(1, 5)), ArgumentError);
}

TEST(Smoothness, InteriorSpike) {
  const PeeledMapSet gt = PeeledMapSet::blank(Intrinsics::centered(5, 5), 1);
  PeeledMapSet pred = gt;
  pred.depth[0].at(2, 2) = 0.5f;
  EXPECT_EQ(smoothness_loss(pred, gt), 2.0);
}

TEST(Smoothness, ConstantOffsetIsFree) {
  const PeeledMapSet gt = flat_set(6, 4, 3, 1.0f);
  PeeledMapSet pred = gt;
  for (auto& layer : pred.depth) {
    for (float& d : layer.data()) {
      d += 0.5f;
    }
  }
  EXPECT_EQ(smoothness_loss(pred, gt), 0.0);
  EXPECT_GT(depth_loss(pred, gt, 10.0), 0.0);
}

TEST(Losses, ShapeMismatch) {
  const PeeledMapSet a = flat_set(4, 4, 2, 1.0f);
  const PeeledMapSet b = flat_set(4, 4, 3, 1.0f);
  const PeeledMapSet c = flat_set(5, 4, 2, 1.0f);
  EXPECT_THROW(depth_loss(a, b, 10.0), ArgumentError);
  EXPECT_THROW(rgb_loss(a, c), ArgumentError);
  EXPECT_THROW(smoothness_loss(c, a), ArgumentError);
}

PointCloud cloud_of(const std::vector<Vec3>& points) {
  PointCloud c;
  for (const Vec3& p : points) {
    c.push_back(p, kBackgroundRgb, 1);
  }
  return c;
}

TEST(Combined, AdversarialOnly) {
  const PeeledMapSet gt = flat_set(4, 4, 4, 1.0f);
  PeeledMapSet pred = gt;
  pred.depth[0].at(1, 1) = 3.0f;
  LossWeights w{10.0, 0.0, 0.0, 0.0, 0.0, 7.0};
  const auto r = combined_loss(pred, gt, cloud_of({Vec3{0, 0, 1}}), w);
  EXPECT_EQ(r.total, 7.0);
}

TEST(Combined, MatchesHandComposedSum) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<float> noise(-0.2f, 0.2f);
  const PeeledMapSet gt = testing::random_map_set(rng, 12, 10, 4);
  PeeledMapSet pred = gt;
  for (auto& layer : pred.depth) {
    for (float& d : layer.data()) {
      if (d != 0.0f) {
        d = std::max(0.01f, d + noise(rng));
      }
    }
  }
  pred.rgb[2].at(3, 3) = Rgb{0, 0, 0};
  const PointCloud gt_cloud = backproject_maps(gt);
  const LossWeights w;
  const auto r = combined_loss(pred, gt, gt_cloud, w);

  const auto pred_pts = backproject_maps(pred).points;
  const double cham = brute_chamfer(pred_pts, gt_cloud.points).sum();
  const double expected = w.adversarial + 100.0 * depth_loss(pred, gt, 10.0) +
                          500.0 * rgb_loss(pred, gt) + 500.0 * cham +
                          500.0 * smoothness_loss(pred, gt);
  EXPECT_NEAR(r.total, expected, 1e-9 * expected);
  EXPECT_TRUE(r.chamfer_defined);
  EXPECT_NEAR(r.chamfer, cham, 1e-9 * cham);
}

TEST(Combined, EmptyPredictionDropsChamfer) {
  const PeeledMapSet gt = flat_set(4, 4, 2, 1.0f);
  const PeeledMapSet pred = PeeledMapSet::blank(Intrinsics::centered(4, 4), 2);
  const auto r = combined_loss(pred, gt, backproject_maps(gt), LossWeights{});
  EXPECT_FALSE(r.chamfer_defined);
  EXPECT_EQ(r.chamfer, 0.0);
  EXPECT_NEAR(r.total, 100.0 * r.depth + 500.0 * r.rgb + 500.0 * r.smooth, 1e-9 * r.total);
}

TEST(Combined, WeightValidation) {
  const PeeledMapSet gt = flat_set(4, 4, 2, 1.0f);
  LossWeights w;
  w.lambda_rgb = -1.0;
  EXPECT_THROW(combined_loss(gt, gt, backproject_maps(gt), w), ArgumentError);
  EXPECT_THROW(combined_loss(gt, gt, PointCloud{}, LossWeights{}), ArgumentError);
}

}  // namespace
}  // namespace peel
