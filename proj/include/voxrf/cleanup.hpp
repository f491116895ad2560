#pragma once

#include "voxrf/optim.hpp"

namespace voxrf {

// Uniform points over the grid bounds; appends to `out`.
void sample_free_space_points(const Aabb& bounds, int count, Rng& rng, std::vector<Vec3>& out);

// Mean over points of sigmoid(sigma(x))^2. Empty space contributes the floor
// value 0.25 and a gentle pull downward; occupied space contributes close to
// 1 with a vanishing pull, which is what lets real surfaces survive while
// unsupervised blobs fade. Optionally accumulates d/d(raw density).
double fsp_loss(const VoxelRadianceField& field, const std::vector<Vec3>& points,
                GradientBuffer* grads = nullptr);

struct CleanupConfig {
  int iterations = 1000;
  double lambda = 0.1;
  int points_per_step = 1 << 17;
  int rays_per_step = 2048;
  int samples_per_ray = 192;
  double lr = 2e-2;           // constant; fresh optimizer state
  int oversample = 4;         // extra free-space samples per ray in rays-only mode
  uint64_t seed = 1;
  double t_near = 0.05;
  double t_far = 0.0;         // auto
};

// Post-hoc pass over a trained field: keeps optimizing the photometric loss
// while penalizing free-space density at uniformly drawn 3d points.
std::vector<LossReport> cleanup(VoxelRadianceField& field, const Dataset& dataset,
                                const CleanupConfig& cfg);

// Same penalty, but only at points along the training rays, so regions no
// ray crosses keep their density. Exists to quantify how much the uniform
// 3d sampling matters.
std::vector<LossReport> cleanup_rays_only(VoxelRadianceField& field, const Dataset& dataset,
                                          const CleanupConfig& cfg, bool oversampled);

// Applies the free-space penalty from the first training step instead of
// post hoc; cfg.lambda and cfg.fsp_mode choose the penalty.
std::vector<LossReport> train_with_fsp(VoxelRadianceField& field, const Dataset& dataset,
                                       const TrainConfig& cfg);

}  // namespace voxrf
