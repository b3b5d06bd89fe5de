#include "peel/losses.hpp"

#include "peel/errors.hpp"
#include "peel/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace peel {

namespace {

constexpr std::uint32_t kLeafSize = 8;

void require_same_shape(const PeeledMapSet& pred, const PeeledMapSet& gt, const char* op) {
  if (!pred.same_shape(gt)) {
    throw ArgumentError(std::string(op) + ": prediction and ground truth differ in shape");
  }
}

Image<double> to_double(const DepthMap& map) {
  Image<double> out(map.width(), map.height());
  std::transform(map.data().begin(), map.data().end(), out.data().begin(),
                 [](float v) { return static_cast<double>(v); });
  return out;
}

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  index_.resize(points_.size());
  std::iota(index_.begin(), index_.end(), std::size_t{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::uint32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, 0, 0, 0, 0.0});
  if (end - begin <= kLeafSize) {
    return id;
  }
  Aabb box;
  for (std::uint32_t i = begin; i < end; ++i) {
    box.extend(points_[index_[i]]);
  }
  int axis = 0;
  box.extent().maxCoeff(&axis);
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(index_.begin() + begin, index_.begin() + mid, index_.begin() + end,
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[index_[mid]][axis];
  const std::uint32_t left = build(begin, mid);
  const std::uint32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  nodes_[id].axis = static_cast<std::uint8_t>(axis);
  nodes_[id].split = split;
  return id;
}

void KdTree::search(std::uint32_t node_id, const Vec3& q, Nearest& best) const {
  const Node& node = nodes_[node_id];
  if (node.left == 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d2 = (points_[index_[i]] - q).squaredNorm();
      if (d2 < best.distance2) {
        best = {index_[i], d2};
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds >= split.
  const double diff = q[node.axis] - node.split;
  const std::uint32_t near = diff < 0.0 ? node.left : node.right;
  const std::uint32_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, best);
  if (diff * diff < best.distance2) {
    search(far, q, best);
  }
}

KdTree::Nearest KdTree::nearest(const Vec3& query) const {
  if (points_.empty()) {
    throw ArgumentError("KdTree::nearest on an empty tree");
  }
  Nearest best{0, std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

ChamferResult chamfer(std::span<const Vec3> p, std::span<const Vec3> q, int threads) {
  if (p.empty() || q.empty()) {
    throw ArgumentError("chamfer: both point sets must be non-empty");
  }
  auto directed = [threads](std::span<const Vec3> from, const KdTree& to) {
    std::vector<double> d2(from.size());
    parallel_for(from.size(), threads, [&](std::size_t i) { d2[i] = to.nearest(from[i]).distance2; });
    // Sequential reduction keeps the sum independent of scheduling.
    double sum = 0.0;
    for (double v : d2) {
      sum += v;
    }
    return sum;
  };
  const KdTree p_tree(p);
  const KdTree q_tree(q);
  const double fwd = directed(p, q_tree);
  const double bwd = directed(q, p_tree);
  return {fwd + bwd, fwd / static_cast<double>(p.size()), bwd / static_cast<double>(q.size())};
}

ChamferResult chamfer(const PointCloud& p, const PointCloud& q, int threads) {
  return chamfer(std::span<const Vec3>(p.points), std::span<const Vec3>(q.points), threads);
}

double depth_loss(const PeeledMapSet& pred, const PeeledMapSet& gt, double gamma) {
  require_same_shape(pred, gt, "depth_loss");
  if (!(gamma >= 1.0)) {
    throw ArgumentError("depth_loss: gamma must be >= 1");
  }
  double loss = 0.0;
  for (int i = 0; i < gt.layers(); ++i) {
    const bool occlusion_layer = i + 1 >= kFirstOccludedLayer;
    const auto& g = gt.depth[i].data();
    const auto& p = pred.depth[i].data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double m = (occlusion_layer && g[k] != 0.0f) ? gamma : 1.0;
      loss += m * std::abs(static_cast<double>(g[k]) - static_cast<double>(p[k]));
    }
  }
  return loss;
}

double rgb_loss(const PeeledMapSet& pred, const PeeledMapSet& gt) {
  require_same_shape(pred, gt, "rgb_loss");
  double loss = 0.0;
  for (int i = 1; i < gt.layers(); ++i) {
    const auto& g = gt.rgb[i].data();
    const auto& p = pred.rgb[i].data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const int diff = std::abs(g[k].r - p[k].r) + std::abs(g[k].g - p[k].g) + std::abs(g[k].b - p[k].b);
      loss += diff / 255.0;
    }
  }
  return loss;
}

Gradient image_gradient(const Image<double>& map) {
  const int w = map.width();
  const int h = map.height();
  if (w < 2 || h < 2) {
    throw ArgumentError("image_gradient: map must be at least 2x2");
  }
  Gradient g{Image<double>(w, h, 0.0), Image<double>(w, h, 0.0)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) {
        g.dx.at(x, y) = map.at(x + 1, y) - map.at(x, y);
      }
      if (y + 1 < h) {
        g.dy.at(x, y) = map.at(x, y + 1) - map.at(x, y);
      }
    }
  }
  return g;
}

double smoothness_loss(const PeeledMapSet& pred, const PeeledMapSet& gt) {
  require_same_shape(pred, gt, "smoothness_loss");
  double loss = 0.0;
  for (int i = 0; i < gt.layers(); ++i) {
    const Gradient g = image_gradient(to_double(gt.depth[i]));
    const Gradient p = image_gradient(to_double(pred.depth[i]));
    for (std::size_t k = 0; k < g.dx.size(); ++k) {
      loss += std::abs(g.dx.data()[k] - p.dx.data()[k]) + std::abs(g.dy.data()[k] - p.dy.data()[k]);
    }
  }
  return loss;
}

void LossWeights::validate() const {
  if (!(gamma >= 1.0)) {
    throw ArgumentError("loss weights: gamma must be >= 1");
  }
  if (!(lambda_depth >= 0.0 && lambda_rgb >= 0.0 && lambda_cham >= 0.0 && lambda_smooth >= 0.0)) {
    throw ArgumentError("loss weights: lambdas must be non-negative");
  }
  if (!std::isfinite(adversarial)) {
    throw ArgumentError("loss weights: adversarial term must be finite");
  }
}

LossBreakdown combined_loss(const PeeledMapSet& pred, const PeeledMapSet& gt,
                            const PointCloud& gt_cloud, const LossWeights& weights) {
  weights.validate();
  require_same_shape(pred, gt, "combined_loss");
  if (gt_cloud.empty()) {
    throw ArgumentError("combined_loss: ground-truth cloud is empty");
  }

  LossBreakdown out;
  out.weights = weights;
  out.adversarial = weights.adversarial;
  out.depth = depth_loss(pred, gt, weights.gamma);
  out.rgb = rgb_loss(pred, gt);
  out.smooth = smoothness_loss(pred, gt);

  const PointCloud reconstructed = backproject_maps(pred);
  out.chamfer_defined = !reconstructed.empty();
  if (out.chamfer_defined) {
    out.chamfer_detail = chamfer(reconstructed, gt_cloud);
    out.chamfer = out.chamfer_detail.sum;
  }

  out.total = out.adversarial + weights.lambda_depth * out.depth + weights.lambda_rgb * out.rgb +
              weights.lambda_cham * out.chamfer + weights.lambda_smooth * out.smooth;

  const double pixels = static_cast<double>(gt.width()) * gt.height();
  out.depth_mean = out.depth / (pixels * gt.layers());
  out.rgb_mean = gt.layers() > 1 ? out.rgb / (pixels * (gt.layers() - 1) * 3) : 0.0;
  out.smooth_mean = out.smooth / (pixels * gt.layers());
  return out;
}

}  // namespace peel
