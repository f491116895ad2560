#include "voxrf/cleanup.hpp"

#include "voxrf/parallel.hpp"

namespace voxrf {
namespace {

constexpr std::size_t kPointChunk = 8192;

struct PointSlot {
  double loss = 0;
  int n = 0;
  uint32_t vidx[8];
  double d[8];
};

TrainConfig cleanup_base(const CleanupConfig& cfg) {
  TrainConfig t;
  t.steps = cfg.iterations;
  t.rays_per_step = cfg.rays_per_step;
  t.samples_per_ray = cfg.samples_per_ray;
  t.adam.lr = cfg.lr;
  t.cosine_decay = false;
  t.lambda = cfg.lambda;
  t.fsp_points = cfg.points_per_step;
  t.fsp_oversample = cfg.oversample;
  t.seed = cfg.seed;
  t.t_near = cfg.t_near;
  t.t_far = cfg.t_far;
  return t;
}

}  // namespace

void sample_free_space_points(const Aabb& bounds, int count, Rng& rng, std::vector<Vec3>& out) {
  if (count <= 0) throw ValidationError("free-space point count must be positive");
  bounds.validate();
  out.reserve(out.size() + count);
  for (int i = 0; i < count; ++i) out.push_back(rng.next_in_box(bounds.lo, bounds.hi));
}

double fsp_loss(const VoxelRadianceField& field, const std::vector<Vec3>& points,
                GradientBuffer* grads) {
  if (points.empty()) throw ValidationError("fsp_loss needs at least one point");
  if (grads && grads->d_density.size() != field.vertex_count())
    throw ValidationError("gradient buffer does not match the field");

  std::size_t n = points.size();
  double inv_n = 1.0 / static_cast<double>(n);
  static thread_local std::vector<PointSlot> slots;
  std::size_t chunk = std::min(kPointChunk, n);
  if (slots.size() < chunk) slots.resize(chunk);
  PointSlot* slot_arr = slots.data();  // lambdas do not capture thread_locals; workers need ours

  double loss = 0.0;
  for (std::size_t c0 = 0; c0 < n; c0 += chunk) {
    std::size_t c1 = std::min(n, c0 + chunk);
    parallel_for(c1 - c0, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        PointSlot& slot = slot_arr[j];
        auto tap = field.tap_density(points[c0 + j]);
        double s = sigmoid(tap.sigma);
        slot.loss = s * s;
        slot.n = 0;
        if (!grads || !tap.inside) continue;
        double chain = 2.0 * s * s * (1.0 - s) * tap.sp_deriv * inv_n;
        slot.n = 8;
        for (int c = 0; c < 8; ++c) {
          slot.vidx[c] = tap.vidx[c];
          slot.d[c] = chain * tap.w[c];
        }
      }
    });
    for (std::size_t j = 0; j < c1 - c0; ++j) {
      loss += slots[j].loss;
      for (int c = 0; c < slots[j].n; ++c) grads->d_density[slots[j].vidx[c]] += slots[j].d[c];
    }
  }
  return loss * inv_n;
}

std::vector<LossReport> cleanup(VoxelRadianceField& field, const Dataset& dataset,
                                const CleanupConfig& cfg) {
  TrainConfig t = cleanup_base(cfg);
  t.fsp_mode = FspMode::Uniform3d;
  return optimize(field, dataset, t);
}

std::vector<LossReport> cleanup_rays_only(VoxelRadianceField& field, const Dataset& dataset,
                                          const CleanupConfig& cfg, bool oversampled) {
  TrainConfig t = cleanup_base(cfg);
  t.fsp_mode = oversampled ? FspMode::RaysOnlyOversampled : FspMode::RaysOnly;
  return optimize(field, dataset, t);
}

std::vector<LossReport> train_with_fsp(VoxelRadianceField& field, const Dataset& dataset,
                                       const TrainConfig& cfg) {
  if (cfg.fsp_mode == FspMode::None)
    throw ValidationError("train_with_fsp needs a free-space sampling mode");
  return optimize(field, dataset, cfg);
}

}  // namespace voxrf
