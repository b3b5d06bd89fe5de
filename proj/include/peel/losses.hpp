#pragma once

#include "peel/geometry.hpp"
#include "peel/image.hpp"
#include "peel/peel_maps.hpp"
#include "peel/point_cloud.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace peel {

/// Static 3-d tree for exact nearest-neighbor queries.
class KdTree {
 public:
  struct Nearest {
    std::size_t index;
    double distance2;
  };

  explicit KdTree(std::span<const Vec3> points);

  /// Throws ArgumentError on an empty tree.
  Nearest nearest(const Vec3& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::uint32_t left;  // 0 for leaves
    std::uint32_t right;
    std::uint8_t axis;
    double split;
  };

  std::uint32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::uint32_t node, const Vec3& q, Nearest& best) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> index_;
  std::vector<Node> nodes_;
};

struct ChamferResult {
  double sum = 0.0;       // forward + backward, squared distances
  double mean_fwd = 0.0;  // forward sum / |P|
  double mean_bwd = 0.0;  // backward sum / |Q|
};

/// Symmetric squared-distance Chamfer distance. Throws ArgumentError if either set is empty.
ChamferResult chamfer(std::span<const Vec3> p, std::span<const Vec3> q, int threads = 0);
ChamferResult chamfer(const PointCloud& p, const PointCloud& q, int threads = 0);

/// Occlusion weight applies to nonzero ground-truth pixels in layers 3 and up.
inline constexpr int kFirstOccludedLayer = 3;

/// Sum over layers and pixels of m * |d - d_hat|, m = gamma on occluded pixels, else 1.
double depth_loss(const PeeledMapSet& pred, const PeeledMapSet& gt, double gamma);

/// Sum over layers 2..n, pixels and channels of |r - r_hat| / 255.
double rgb_loss(const PeeledMapSet& pred, const PeeledMapSet& gt);

struct Gradient {
  Image<double> dx;
  Image<double> dy;
};

/// Forward differences; the last column of dx and the last row of dy are zero.
Gradient image_gradient(const Image<double>& map);

/// Sum over layers of the L1 norm of the difference of depth gradients.
double smoothness_loss(const PeeledMapSet& pred, const PeeledMapSet& gt);

struct LossWeights {
  double gamma = 10.0;
  double lambda_depth = 100.0;
  double lambda_rgb = 500.0;
  double lambda_cham = 500.0;
  double lambda_smooth = 500.0;
  double adversarial = 0.0;  // externally computed GAN term

  void validate() const;
};

struct LossBreakdown {
  double depth = 0.0;
  double rgb = 0.0;
  double chamfer = 0.0;  // Chamfer sum; 0 when undefined
  double smooth = 0.0;
  double adversarial = 0.0;
  double total = 0.0;
  bool chamfer_defined = true;
  ChamferResult chamfer_detail;
  LossWeights weights;

  // Per-pixel means for reporting only; never part of total.
  double depth_mean = 0.0;
  double rgb_mean = 0.0;
  double smooth_mean = 0.0;
};

/// Weighted objective. The Chamfer term compares backproject_maps(pred) against
/// gt_cloud; if pred has no foreground it is flagged undefined and left out of total.
LossBreakdown combined_loss(const PeeledMapSet& pred, const PeeledMapSet& gt,
                            const PointCloud& gt_cloud, const LossWeights& weights);

}  // namespace peel
