#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "voxrf/dataset.hpp"
#include "voxrf/field.hpp"
#include "voxrf/renderer.hpp"

namespace voxrf {

struct BoolMask {
  int width = 0, height = 0;
  std::vector<uint8_t> v;

  BoolMask() = default;
  BoolMask(int w, int h, bool fill = false)
      : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}
  uint8_t& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return v[static_cast<std::size_t>(y) * width + x]; }
  int64_t count() const {
    int64_t c = 0;
    for (uint8_t b : v) c += b != 0;
    return c;
  }
};

// Peak signal-to-noise ratio in dB for a unit value range, over all channels
// of the masked pixels (whole image when mask is null). Capped at 99 dB so
// identical images stay finite.
double psnr(const Image& a, const Image& b, const BoolMask* mask = nullptr);

// Mean local SSIM (11x11 Gaussian window, sigma 1.5, k1 0.01 / k2 0.03 on a
// unit range) over masked pixels, averaged across channels. Windows are
// truncated and renormalized at the borders.
double ssim(const Image& a, const Image& b, const BoolMask* mask = nullptr);

struct PredictedMask {
  BoolMask mask;
  double threshold = 0.98;
};

// Pixels whose accumulated weight clears the threshold: the field's own
// claim of where geometry is.
PredictedMask predicted_mask(const Image& accum, double threshold = 0.98);

// Percentage of `visible` pixels also claimed by `predicted`.
double coverage_percent(const BoolMask& predicted, const BoolMask& visible);

// Dice overlap; two empty masks count as perfect agreement.
double dice(const BoolMask& a, const BoolMask& b);

// Eval-view pixels whose oracle surface point lies within depth_threshold of
// the eval camera and is seen unoccluded by at least one training camera.
BoolMask visible_region(const SyntheticScene& scene, const Camera& eval_cam,
                        const std::vector<Camera>& train_cams, double depth_threshold);

// Symmetric chamfer distance: half the sum of the two directed mean
// nearest-neighbor distances.
double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b);
double chamfer_bruteforce(const std::vector<Vec3>& a, const std::vector<Vec3>& b);

struct PointCloudResult {
  std::vector<Vec3> points;
  int64_t rays_attempted = 0;
  bool reached_target = false;
};

struct CloudConfig {
  int points_target = 35000;
  double accum_threshold = 0.5;
  uint64_t seed = 1;
  int64_t max_attempts = 0;  // 0 means 50x the target
};

// Backprojects random camera rays at their expected depth wherever enough
// weight accumulated. Throws when not a single ray qualifies.
PointCloudResult extract_point_cloud(const VoxelRadianceField& field,
                                     const std::vector<Camera>& cameras, const RenderConfig& rcfg,
                                     const CloudConfig& cfg);

struct DepthErrors {
  double rmse = 0, mae = 0;
  int64_t pixels = 0;
};

// Over pixels finite in both maps (and masked, when given).
DepthErrors depth_errors(const Image& depth, const Image& reference, const BoolMask* mask = nullptr);

struct DensityHistogram {
  std::vector<int64_t> counts;  // over [0, 1], equal-width bins
  int64_t total = 0;
};

// Histogram of the softened density 2*(sigmoid(sigma) - 0.5) at uniform
// random points in the bounds.
DensityHistogram density_histogram(const VoxelRadianceField& field, int64_t n_samples, int bins,
                                   uint64_t seed);

// (t, softened density) at k positions evenly spaced from t_near to t_far
// inclusive.
std::vector<std::pair<double, double>> density_along_ray(const VoxelRadianceField& field,
                                                         const Ray& ray, int k, double t_near,
                                                         double t_far);

// Number of contiguous runs strictly above the threshold.
int count_peaks(const std::vector<std::pair<double, double>>& profile, double threshold = 0.5);

void write_ply(const std::vector<Vec3>& points, const std::string& path);

}  // namespace voxrf
