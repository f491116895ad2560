#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voxrf/dataset.hpp"
#include "voxrf/field.hpp"
#include "voxrf/renderer.hpp"

namespace voxrf {

struct AdamConfig {
  double lr = 1e-2;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
};

struct AdamState {
  std::vector<double> m, v;
  int64_t t = 0;
  uint64_t skipped_nonfinite = 0;

  void init(std::size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
    t = 0;
    skipped_nonfinite = 0;
  }
};

// One bias-corrected Adam update in place. A non-finite gradient entry leaves
// that parameter and its moments untouched and bumps the skip counter.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg);

struct RayBatch {
  std::vector<int> frame;  // dataset frame index
  std::vector<int> px, py;
};

RayBatch draw_ray_batch(const Dataset& dataset, Split split, int count, Rng& rng);

// Mean over rays of the channel-summed squared error against the frame
// pixel. Optionally accumulates parameter gradients. Jittered sample
// positions derive from (seed, ray index), so a given seed is reproducible.
double photometric_loss(const VoxelRadianceField& field, const Dataset& dataset,
                        const RayBatch& batch, const RenderConfig& cfg, uint64_t seed,
                        GradientBuffer* grads = nullptr);

enum class FspMode { None, Uniform3d, RaysOnly, RaysOnlyOversampled };

struct TrainConfig {
  int steps = 2000;
  int rays_per_step = 2048;
  int samples_per_ray = 192;
  AdamConfig adam;
  bool cosine_decay = true;       // cosine from adam.lr down to lr_final_scale * adam.lr
  double lr_final_scale = 0.01;
  bool stratified = true;
  double t_near = 0.05;
  double t_far = 0.0;             // <= t_near means 2x bounds diagonal
  uint64_t seed = 1;

  double l2_weight = 0.0;         // weight on mean squared raw parameter

  double lambda = 0.0;            // free-space penalty weight
  FspMode fsp_mode = FspMode::None;
  int fsp_points = 1 << 17;       // uniform3d points per step
  int fsp_oversample = 4;         // extra samples per ray in the oversampled mode

  double divergence_factor = 10.0;
  int divergence_patience = 100;
};

struct LossReport {
  int step = 0;
  double l_rec = 0, l_fsp = 0, l2_term = 0, total = 0;
  double wall_ms = 0;
  int64_t fsp_points = 0;
};

// Shared engine behind training, fine-tuning and cleanup. Draws a fresh ray
// batch (and free-space batch, if enabled) every step, accumulates exact
// gradients, and applies Adam. Aborts with DivergenceError when the
// reconstruction loss stays above divergence_factor times its initial value
// for divergence_patience consecutive steps.
std::vector<LossReport> optimize(VoxelRadianceField& field, const Dataset& dataset,
                                 const TrainConfig& cfg);

// Plain photometric training.
std::vector<LossReport> train(VoxelRadianceField& field, const Dataset& dataset,
                              const TrainConfig& cfg);

// Photometric training plus an L2 pull on the raw parameters; the weight
// comes from cfg.l2_weight.
std::vector<LossReport> l2_regularized_train(VoxelRadianceField& field, const Dataset& dataset,
                                             const TrainConfig& cfg);

void write_loss_csv(const std::vector<LossReport>& log, const std::string& path);

}  // namespace voxrf
