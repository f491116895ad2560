#include "voxrf.h"

#include <string>

#include "voxrf/cleanup.hpp"
#include "voxrf/commands.hpp"
#include "voxrf/metrics.hpp"

namespace {

thread_local std::string g_last_error = "";

voxrf_status fail(voxrf_status code, const char* what) {
  g_last_error = what;
  return code;
}

// Runs fn, translating exceptions to status codes.
template <typename Fn>
voxrf_status guarded(Fn&& fn) {
  try {
    fn();
    return VOXRF_OK;
  } catch (const voxrf::ValidationError& e) {
    return fail(VOXRF_E_VALIDATION, e.what());
  } catch (const voxrf::DivergenceError& e) {
    return fail(VOXRF_E_DIVERGENCE, e.what());
  } catch (const voxrf::IoError& e) {
    return fail(VOXRF_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(VOXRF_E_INTERNAL, e.what());
  } catch (...) {
    return fail(VOXRF_E_INTERNAL, "unknown error");
  }
}

voxrf::RunConfig parse_config(const char* config_json) {
  return voxrf::RunConfig::from_json_text(config_json ? config_json : "");
}

voxrf_status require(bool ok, const char* what) {
  return ok ? VOXRF_OK : fail(VOXRF_E_VALIDATION, what);
}

}  // namespace

struct voxrf_field {
  voxrf::VoxelRadianceField impl;
};

struct voxrf_dataset {
  voxrf::Dataset impl;
};

extern "C" {

const char* voxrf_last_error(void) { return g_last_error.c_str(); }

voxrf_status voxrf_field_create(int nx, int ny, int nz, const double lo[3], const double hi[3],
                                double initial_sigma, voxrf_field** out) {
  if (voxrf_status s = require(out && lo && hi, "null argument"); s != VOXRF_OK) return s;
  *out = nullptr;
  return guarded([&] {
    voxrf::Aabb bounds{{lo[0], lo[1], lo[2]}, {hi[0], hi[1], hi[2]}};
    *out = new voxrf_field{
        voxrf::VoxelRadianceField::init_field(nx, ny, nz, bounds, initial_sigma)};
  });
}

voxrf_status voxrf_field_load(const char* path, voxrf_field** out) {
  if (voxrf_status s = require(out && path, "null argument"); s != VOXRF_OK) return s;
  *out = nullptr;
  return guarded(
      [&] { *out = new voxrf_field{voxrf::VoxelRadianceField::load_checkpoint(path)}; });
}

voxrf_status voxrf_field_save(const voxrf_field* field, const char* path) {
  if (voxrf_status s = require(field && path, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] { field->impl.save_checkpoint(path); });
}

void voxrf_field_destroy(voxrf_field* field) { delete field; }

voxrf_status voxrf_field_resolution(const voxrf_field* field, int* nx, int* ny, int* nz) {
  if (voxrf_status s = require(field && nx && ny && nz, "null argument"); s != VOXRF_OK) return s;
  *nx = field->impl.nx();
  *ny = field->impl.ny();
  *nz = field->impl.nz();
  return VOXRF_OK;
}

voxrf_status voxrf_field_bounds(const voxrf_field* field, double lo[3], double hi[3]) {
  if (voxrf_status s = require(field && lo && hi, "null argument"); s != VOXRF_OK) return s;
  for (int a = 0; a < 3; ++a) {
    lo[a] = field->impl.bounds().lo[a];
    hi[a] = field->impl.bounds().hi[a];
  }
  return VOXRF_OK;
}

voxrf_status voxrf_field_query(const voxrf_field* field, const double point[3], double* sigma,
                               double rgb[3]) {
  if (voxrf_status s = require(field && point, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] {
    voxrf::FieldSample smp = field->impl.query({point[0], point[1], point[2]});
    if (sigma) *sigma = smp.sigma;
    if (rgb)
      for (int c = 0; c < 3; ++c) rgb[c] = smp.color[c];
  });
}

voxrf_status voxrf_field_inject_floater(voxrf_field* field, const double center[3], double radius,
                                        double sigma, const double rgb[3]) {
  if (voxrf_status s = require(field && center && rgb, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] {
    field->impl.inject_floater({center[0], center[1], center[2]}, radius, sigma,
                               {rgb[0], rgb[1], rgb[2]});
  });
}

voxrf_status voxrf_dataset_load(const char* dir, voxrf_dataset** out) {
  if (voxrf_status s = require(out && dir, "null argument"); s != VOXRF_OK) return s;
  *out = nullptr;
  return guarded([&] { *out = new voxrf_dataset{voxrf::load_dataset(dir)}; });
}

void voxrf_dataset_destroy(voxrf_dataset* dataset) { delete dataset; }

voxrf_status voxrf_dataset_frame_count(const voxrf_dataset* dataset, int* count) {
  if (voxrf_status s = require(dataset && count, "null argument"); s != VOXRF_OK) return s;
  *count = static_cast<int>(dataset->impl.frames.size());
  return VOXRF_OK;
}

voxrf_status voxrf_train(voxrf_field* field, const voxrf_dataset* dataset,
                         const char* config_json) {
  if (voxrf_status s = require(field && dataset, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] {
    voxrf::RunConfig cfg = parse_config(config_json);
    voxrf::TrainConfig t;
    t.steps = cfg.steps;
    t.rays_per_step = cfg.rays_per_step;
    t.samples_per_ray = cfg.samples_per_ray;
    t.adam.lr = cfg.lr;
    t.cosine_decay = cfg.cosine_decay;
    t.lr_final_scale = cfg.lr_final_scale;
    t.stratified = cfg.stratified;
    t.l2_weight = cfg.l2_weight;
    t.t_near = cfg.t_near;
    t.t_far = cfg.t_far;
    t.seed = cfg.seed;
    t.divergence_factor = cfg.divergence_factor;
    t.divergence_patience = cfg.divergence_patience;
    if (cfg.l2_weight > 0)
      voxrf::l2_regularized_train(field->impl, dataset->impl, t);
    else
      voxrf::train(field->impl, dataset->impl, t);
  });
}

voxrf_status voxrf_cleanup(voxrf_field* field, const voxrf_dataset* dataset,
                           const char* config_json) {
  if (voxrf_status s = require(field && dataset, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] {
    voxrf::RunConfig cfg = parse_config(config_json);
    voxrf::CleanupConfig c;
    c.iterations = cfg.iterations;
    c.lambda = cfg.lambda;
    c.points_per_step = cfg.fsp_points;
    c.rays_per_step = cfg.rays_per_step;
    c.samples_per_ray = cfg.samples_per_ray;
    c.lr = cfg.cleanup_lr;
    c.oversample = cfg.fsp_oversample;
    c.seed = cfg.seed;
    c.t_near = cfg.t_near;
    c.t_far = cfg.t_far;
    if (cfg.fsp_mode == "uniform3d")
      voxrf::cleanup(field->impl, dataset->impl, c);
    else if (cfg.fsp_mode == "rays_only")
      voxrf::cleanup_rays_only(field->impl, dataset->impl, c, false);
    else if (cfg.fsp_mode == "rays_only_oversampled")
      voxrf::cleanup_rays_only(field->impl, dataset->impl, c, true);
    else
      throw voxrf::ValidationError("cleanup needs fsp_mode uniform3d, rays_only or "
                                   "rays_only_oversampled");
  });
}

voxrf_status voxrf_render_frame(const voxrf_field* field, const voxrf_dataset* dataset,
                                int frame_index, const char* config_json, float* color,
                                float* depth, float* accum) {
  if (voxrf_status s = require(field && dataset, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] {
    const voxrf::Dataset& ds = dataset->impl;
    if (frame_index < 0 || frame_index >= static_cast<int>(ds.frames.size()))
      throw voxrf::ValidationError("frame index out of range");
    voxrf::RunConfig cfg = parse_config(config_json);
    voxrf::RenderConfig rcfg = voxrf::default_render_config(ds.bounds, ds.background);
    rcfg.samples_per_ray = cfg.samples_per_ray;
    rcfg.t_near = cfg.t_near;
    if (cfg.t_far > cfg.t_near) rcfg.t_far = cfg.t_far;
    voxrf::RenderedImage im =
        voxrf::render_image(field->impl, ds.frames[frame_index].camera, rcfg);
    std::size_t n = im.color.pixel_count();
    if (color)
      for (std::size_t i = 0; i < n * 3; ++i) color[i] = im.color.data[i];
    if (depth)
      for (std::size_t i = 0; i < n; ++i) depth[i] = im.depth.data[i];
    if (accum)
      for (std::size_t i = 0; i < n; ++i) accum[i] = im.accum.data[i];
  });
}

voxrf_status voxrf_cmd_make_scene(const char* scene_json, const char* cameras_json,
                                  const char* out_dir, const char* config_json) {
  if (voxrf_status s = require(scene_json && cameras_json && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded(
      [&] { voxrf::cmd_make_scene(scene_json, cameras_json, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_train(const char* dataset_dir, const char* out_dir,
                             const char* config_json) {
  if (voxrf_status s = require(dataset_dir && out_dir, "null argument"); s != VOXRF_OK) return s;
  return guarded([&] { voxrf::cmd_train(dataset_dir, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_cleanup(const char* checkpoint, const char* dataset_dir,
                               const char* out_dir, const char* config_json) {
  if (voxrf_status s = require(checkpoint && dataset_dir && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded(
      [&] { voxrf::cmd_cleanup(checkpoint, dataset_dir, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_render(const char* checkpoint, const char* dataset_dir, const char* out_dir,
                              const char* config_json) {
  if (voxrf_status s = require(checkpoint && dataset_dir && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded(
      [&] { voxrf::cmd_render(checkpoint, dataset_dir, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_eval(const char* checkpoint, const char* dataset_dir, const char* out_dir,
                            const char* config_json) {
  if (voxrf_status s = require(checkpoint && dataset_dir && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded(
      [&] { voxrf::cmd_eval(checkpoint, dataset_dir, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_analyze(const char* checkpoint, const char* dataset_dir,
                               const char* out_dir, const char* config_json) {
  if (voxrf_status s = require(checkpoint && dataset_dir && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded(
      [&] { voxrf::cmd_analyze(checkpoint, dataset_dir, out_dir, parse_config(config_json)); });
}

voxrf_status voxrf_cmd_export_cloud(const char* checkpoint, const char* dataset_dir,
                                    const char* out_dir, const char* config_json) {
  if (voxrf_status s = require(checkpoint && dataset_dir && out_dir, "null argument");
      s != VOXRF_OK)
    return s;
  return guarded([&] {
    voxrf::cmd_export_cloud(checkpoint, dataset_dir, out_dir, parse_config(config_json));
  });
}

}  // extern "C"
