#include "voxrf/optim.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "voxrf/cleanup.hpp"
#include "voxrf/parallel.hpp"

namespace voxrf {
namespace {

constexpr int kRayChunk = 64;

double lr_at(const TrainConfig& cfg, int step) {
  if (!cfg.cosine_decay || cfg.steps <= 1) return cfg.adam.lr;
  double u = static_cast<double>(step) / (cfg.steps - 1);
  double shape = 0.5 * (1.0 + std::cos(M_PI * u));
  return cfg.adam.lr * (cfg.lr_final_scale + (1.0 - cfg.lr_final_scale) * shape);
}

struct RaySlot {
  RayWorkspace ws;
  RayGradSink sink;
  double loss = 0;
};

// Photometric forward (and optional backward) over one batch. Per-ray work
// runs in parallel; losses and gradients merge in ray order afterwards, so
// the result is independent of the thread count.
double ray_pass(const VoxelRadianceField& field, const Dataset& dataset, const RayBatch& batch,
                const RenderConfig& rcfg, uint64_t seed, int step, GradientBuffer* grads) {
  std::size_t n = batch.frame.size();
  double inv_n = n ? 1.0 / static_cast<double>(n) : 0.0;
  static thread_local std::vector<RaySlot> slots;
  std::size_t chunk = std::min<std::size_t>(kRayChunk, n);
  if (slots.size() < chunk) slots.resize(chunk);
  RaySlot* slot_arr = slots.data();  // lambdas do not capture thread_locals; workers need ours

  double loss_sum = 0.0;
  for (std::size_t c0 = 0; c0 < n; c0 += chunk) {
    std::size_t c1 = std::min(n, c0 + chunk);
    parallel_for(c1 - c0, [&](std::size_t b, std::size_t e) {
      for (std::size_t j = b; j < e; ++j) {
        std::size_t i = c0 + j;
        RaySlot& slot = slot_arr[j];
        slot.sink.clear();
        const Frame& fr = dataset.frames[batch.frame[i]];
        Ray ray = fr.camera.generate_ray(batch.px[i], batch.py[i]);
        RaySamples samples;
        if (rcfg.stratified) {
          Rng jitter(seed, "jitter", (static_cast<uint64_t>(step) << 24) | i);
          samples = sample_ray(rcfg.t_near, rcfg.t_far, rcfg.samples_per_ray, true, &jitter);
        } else {
          samples = sample_ray(rcfg.t_near, rcfg.t_far, rcfg.samples_per_ray, false, nullptr);
        }
        CompositeResult r = render_ray_cached(field, ray, samples, rcfg.background,
                                              rcfg.stop_transmittance, slot.ws);
        Vec3 target{fr.image.at(batch.px[i], batch.py[i], 0),
                    fr.image.at(batch.px[i], batch.py[i], 1),
                    fr.image.at(batch.px[i], batch.py[i], 2)};
        Vec3 err = r.color - target;
        slot.loss = dot(err, err);
        if (grads) {
          CompositeUpstream up;
          up.d_color = err * (2.0 * inv_n);
          backward_from_cache(slot.ws, rcfg.background, up, slot.sink);
        }
      }
    });
    for (std::size_t j = 0; j < c1 - c0; ++j) {
      loss_sum += slots[j].loss;
      if (grads) slots[j].sink.merge_into(*grads);
    }
  }
  return loss_sum * inv_n;
}

}  // namespace

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size())
    throw ValidationError("adam_step: parameter and gradient sizes differ");
  if (state.m.size() != params.size()) state.init(params.size());
  if (!(cfg.beta1 >= 0 && cfg.beta1 < 1) || !(cfg.beta2 >= 0 && cfg.beta2 < 1) || !(cfg.eps > 0))
    throw ValidationError("adam_step: invalid moment or epsilon configuration");
  state.t += 1;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  double* p = params.data();
  const double* g = grads.data();
  double* m = state.m.data();
  double* v = state.v.data();
  uint64_t skipped = 0;
  std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    double gi = g[i];
    if (!std::isfinite(gi)) {
      ++skipped;
      continue;
    }
    if (gi == 0.0 && m[i] == 0.0 && v[i] == 0.0) continue;  // never touched, nothing moves
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
    p[i] -= cfg.lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg.eps);
  }
  state.skipped_nonfinite += skipped;
}

RayBatch draw_ray_batch(const Dataset& dataset, Split split, int count, Rng& rng) {
  if (count <= 0) throw ValidationError("ray batch count must be positive");
  std::vector<int> idx = dataset.split_indices(split);
  if (idx.empty())
    throw ValidationError(std::string("dataset has no ") + split_name(split) + " frames");
  RayBatch b;
  b.frame.resize(count);
  b.px.resize(count);
  b.py.resize(count);
  for (int i = 0; i < count; ++i) {
    int f = idx[rng.next_below(idx.size())];
    b.frame[i] = f;
    b.px[i] = static_cast<int>(rng.next_below(dataset.frames[f].camera.width));
    b.py[i] = static_cast<int>(rng.next_below(dataset.frames[f].camera.height));
  }
  return b;
}

double photometric_loss(const VoxelRadianceField& field, const Dataset& dataset,
                        const RayBatch& batch, const RenderConfig& cfg, uint64_t seed,
                        GradientBuffer* grads) {
  if (batch.frame.size() != batch.px.size() || batch.frame.size() != batch.py.size())
    throw ValidationError("ray batch arrays must have equal length");
  for (std::size_t i = 0; i < batch.frame.size(); ++i) {
    int f = batch.frame[i];
    if (f < 0 || f >= static_cast<int>(dataset.frames.size()))
      throw ValidationError("ray batch frame index out of range");
    const Camera& cam = dataset.frames[f].camera;
    if (batch.px[i] < 0 || batch.px[i] >= cam.width || batch.py[i] < 0 ||
        batch.py[i] >= cam.height)
      throw ValidationError("ray batch pixel out of range");
  }
  if (grads && grads->d_density.size() != field.vertex_count())
    throw ValidationError("gradient buffer does not match the field");
  return ray_pass(field, dataset, batch, cfg, seed, 0, grads);
}

std::vector<LossReport> optimize(VoxelRadianceField& field, const Dataset& dataset,
                                 const TrainConfig& cfg) {
  if (cfg.steps <= 0) throw ValidationError("steps must be positive");
  if (!(cfg.adam.lr > 0)) throw ValidationError("learning rate must be positive");
  if (cfg.rays_per_step <= 0) throw ValidationError("rays_per_step must be positive");
  if (cfg.samples_per_ray < 2) throw ValidationError("samples_per_ray must be at least 2");
  if (cfg.lambda < 0) throw ValidationError("lambda must be non-negative");
  if (cfg.l2_weight < 0) throw ValidationError("l2_weight must be non-negative");
  if (cfg.fsp_mode == FspMode::Uniform3d && cfg.fsp_points <= 0)
    throw ValidationError("fsp_points must be positive");
  if (cfg.fsp_mode == FspMode::RaysOnlyOversampled && cfg.fsp_oversample <= 0)
    throw ValidationError("fsp_oversample must be positive");
  if (cfg.lambda > 0 && cfg.fsp_mode == FspMode::None)
    throw ValidationError("lambda > 0 needs a free-space sampling mode");

  RenderConfig rcfg;
  rcfg.samples_per_ray = cfg.samples_per_ray;
  rcfg.t_near = cfg.t_near;
  rcfg.t_far = cfg.t_far > cfg.t_near ? cfg.t_far : 2.0 * dataset.bounds.diagonal();
  rcfg.stratified = cfg.stratified;
  rcfg.background = dataset.background;

  std::size_t n_vert = field.vertex_count();
  AdamState st_density, st_color;
  st_density.init(n_vert);
  st_color.init(n_vert * 3);
  GradientBuffer grads, fsp_grads;
  grads.resize_for(n_vert);
  bool fsp_backward = cfg.fsp_mode != FspMode::None && cfg.lambda > 0;
  if (fsp_backward) fsp_grads.resize_for(n_vert);

  std::vector<Vec3> fsp_points;
  std::vector<LossReport> log;
  log.reserve(cfg.steps);
  double initial_rec = -1.0;
  int over = 0;
  std::size_t total_params = n_vert * 4;

  for (int s = 0; s < cfg.steps; ++s) {
    auto t0 = std::chrono::steady_clock::now();
    AdamConfig adam = cfg.adam;
    adam.lr = lr_at(cfg, s);

    Rng batch_rng(cfg.seed, "batch", static_cast<uint64_t>(s));
    RayBatch batch = draw_ray_batch(dataset, Split::Train, cfg.rays_per_step, batch_rng);
    grads.clear();
    double l_rec = ray_pass(field, dataset, batch, rcfg, cfg.seed, s, &grads);

    double l_fsp = 0.0;
    int64_t n_points = 0;
    if (cfg.fsp_mode != FspMode::None) {
      fsp_points.clear();
      if (cfg.fsp_mode == FspMode::Uniform3d) {
        Rng pts_rng(cfg.seed, "free-space", static_cast<uint64_t>(s));
        sample_free_space_points(field.bounds(), cfg.fsp_points, pts_rng, fsp_points);
      } else {
        int per_ray = cfg.samples_per_ray *
                      (cfg.fsp_mode == FspMode::RaysOnlyOversampled ? cfg.fsp_oversample : 1);
        for (std::size_t i = 0; i < batch.frame.size(); ++i) {
          Rng rng(cfg.seed, "free-space-ray", (static_cast<uint64_t>(s) << 24) | i);
          const Frame& fr = dataset.frames[batch.frame[i]];
          Ray ray = fr.camera.generate_ray(batch.px[i], batch.py[i]);
          RaySamples smp = sample_ray(rcfg.t_near, rcfg.t_far, per_ray, true, &rng);
          for (double t : smp.t) fsp_points.push_back(ray.origin + ray.dir * t);
        }
      }
      n_points = static_cast<int64_t>(fsp_points.size());
      if (fsp_backward) {
        fsp_grads.clear();
        l_fsp = fsp_loss(field, fsp_points, &fsp_grads);
        // FSP only sees density, so only that block needs the weighted merge.
        for (std::size_t i = 0; i < n_vert; ++i)
          grads.d_density[i] += cfg.lambda * fsp_grads.d_density[i];
      } else {
        l_fsp = fsp_loss(field, fsp_points, nullptr);
      }
    }

    double l2_term = 0.0;
    if (cfg.l2_weight > 0) {
      double acc = 0.0;
      double scale = 2.0 * cfg.l2_weight / static_cast<double>(total_params);
      for (std::size_t i = 0; i < n_vert; ++i) {
        double p = field.raw_density()[i];
        acc += p * p;
        grads.d_density[i] += scale * p;
      }
      for (std::size_t i = 0; i < n_vert * 3; ++i) {
        double p = field.raw_color()[i];
        acc += p * p;
        grads.d_color[i] += scale * p;
      }
      l2_term = acc / static_cast<double>(total_params);
    }

    adam_step(field.raw_density(), grads.d_density, st_density, adam);
    adam_step(field.raw_color(), grads.d_color, st_color, adam);

    if (!std::isfinite(l_rec))
      throw DivergenceError("reconstruction loss became non-finite at step " + std::to_string(s));
    if (initial_rec < 0) initial_rec = std::max(l_rec, 1e-12);
    over = l_rec > cfg.divergence_factor * initial_rec ? over + 1 : 0;
    if (over >= cfg.divergence_patience)
      throw DivergenceError("reconstruction loss stayed " + std::to_string(cfg.divergence_factor) +
                            "x above its initial value for " + std::to_string(over) +
                            " steps (step " + std::to_string(s) + ")");

    LossReport rep;
    rep.step = s;
    rep.l_rec = l_rec;
    rep.l_fsp = l_fsp;
    rep.l2_term = l2_term;
    rep.total = l_rec + cfg.lambda * l_fsp + cfg.l2_weight * l2_term;
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    rep.fsp_points = n_points;
    log.push_back(rep);
  }
  return log;
}

std::vector<LossReport> train(VoxelRadianceField& field, const Dataset& dataset,
                              const TrainConfig& cfg) {
  TrainConfig c = cfg;
  c.lambda = 0.0;
  c.fsp_mode = FspMode::None;
  c.l2_weight = 0.0;
  return optimize(field, dataset, c);
}

std::vector<LossReport> l2_regularized_train(VoxelRadianceField& field, const Dataset& dataset,
                                             const TrainConfig& cfg) {
  if (!(cfg.l2_weight > 0))
    throw ValidationError("l2_regularized_train expects a positive l2_weight");
  TrainConfig c = cfg;
  c.lambda = 0.0;
  c.fsp_mode = FspMode::None;
  return optimize(field, dataset, c);
}

void write_loss_csv(const std::vector<LossReport>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "step,l_rec,l_fsp,l2_term,total,wall_ms,fsp_points\n";
  char buf[256];
  for (const LossReport& r : log) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.3f,%lld\n", r.step, r.l_rec,
                  r.l_fsp, r.l2_term, r.total, r.wall_ms, static_cast<long long>(r.fsp_points));
    out << buf;
  }
  if (!out) throw IoError("short write on " + path);
}

}  // namespace voxrf
