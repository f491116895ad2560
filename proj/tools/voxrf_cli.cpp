#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "voxrf.h"

using nlohmann::json;

namespace {

// Per-invocation option storage; only flags the user actually set override
// the config file.
struct Overrides {
  uint64_t seed;
  int resolution, steps, rays_per_step, samples_per_ray, divergence_patience;
  int fsp_points, fsp_oversample, iterations, cloud_points, hist_bins;
  int profile_frame, profile_px, profile_py, profile_samples;
  int64_t hist_samples;
  double lr, lr_final_scale, l2_weight, t_near, t_far, divergence_factor, lambda;
  double cleanup_lr, accum_threshold, depth_threshold, cloud_accum_threshold, initial_sigma;
  bool cosine_decay, stratified;
  std::string fsp_mode, split, inject_floaters;
};

struct Cmd {
  CLI::App* app = nullptr;
  std::string scene, cameras, checkpoint, dataset, out, config_path;
  Overrides ov{};
  std::vector<std::pair<CLI::Option*, std::function<void(json&)>>> writers;

  void add_common(CLI::App* a) {
    app = a;
    app->add_option("--config", config_path, "JSON config file; flags override its keys");

    auto opt = [&](const char* flag, auto& slot, const char* key, const char* help) {
      CLI::Option* o = app->add_option(flag, slot, help);
      writers.emplace_back(o, [&slot, key](json& j) { j[key] = slot; });
    };
    opt("--seed", ov.seed, "seed", "rng seed");
    opt("--resolution", ov.resolution, "resolution", "grid vertices per axis");
    opt("--steps", ov.steps, "steps", "training steps");
    opt("--rays-per-step", ov.rays_per_step, "rays_per_step", "rays per optimization step");
    opt("--samples-per-ray", ov.samples_per_ray, "samples_per_ray", "samples along each ray");
    opt("--lr", ov.lr, "lr", "training learning rate");
    opt("--cosine-decay", ov.cosine_decay, "cosine_decay", "cosine learning-rate schedule");
    opt("--lr-final-scale", ov.lr_final_scale, "lr_final_scale", "cosine floor as a fraction");
    opt("--stratified", ov.stratified, "stratified", "jitter sample positions while training");
    opt("--l2-weight", ov.l2_weight, "l2_weight", "weight on mean squared raw parameter");
    opt("--t-near", ov.t_near, "t_near", "near plane");
    opt("--t-far", ov.t_far, "t_far", "far plane (0 = auto)");
    opt("--divergence-factor", ov.divergence_factor, "divergence_factor",
        "abort when loss stays this many times above its start");
    opt("--divergence-patience", ov.divergence_patience, "divergence_patience",
        "steps of sustained blow-up before aborting");
    opt("--lambda", ov.lambda, "lambda", "free-space penalty weight");
    opt("--fsp-mode", ov.fsp_mode, "fsp_mode",
        "none | uniform3d | rays_only | rays_only_oversampled");
    opt("--fsp-points", ov.fsp_points, "fsp_points", "free-space points per step");
    opt("--fsp-oversample", ov.fsp_oversample, "fsp_oversample",
        "extra samples per ray in rays_only_oversampled");
    opt("--iterations", ov.iterations, "iterations", "cleanup steps");
    opt("--cleanup-lr", ov.cleanup_lr, "cleanup_lr", "cleanup learning rate");
    opt("--split", ov.split, "split", "train or eval");
    opt("--accum-threshold", ov.accum_threshold, "accum_threshold",
        "accumulation needed to count a pixel as occupied");
    opt("--depth-threshold", ov.depth_threshold, "depth_threshold",
        "visibility depth limit (0 = 2x scene diagonal)");
    opt("--cloud-points", ov.cloud_points, "cloud_points", "point cloud target size");
    opt("--cloud-accum-threshold", ov.cloud_accum_threshold, "cloud_accum_threshold",
        "accumulation needed to backproject a ray");
    opt("--hist-samples", ov.hist_samples, "hist_samples", "histogram sample count");
    opt("--hist-bins", ov.hist_bins, "hist_bins", "histogram bin count");
    opt("--profile-frame", ov.profile_frame, "profile_frame", "frame for the density profile");
    opt("--profile-px", ov.profile_px, "profile_px", "profile pixel x (-1 = center)");
    opt("--profile-py", ov.profile_py, "profile_py", "profile pixel y (-1 = center)");
    opt("--profile-samples", ov.profile_samples, "profile_samples", "positions along the ray");
    opt("--initial-sigma", ov.initial_sigma, "initial_sigma", "density a fresh field starts at");
    opt("--inject-floaters", ov.inject_floaters, "inject_floaters",
        "floater list to inject after training");
  }

  // Config file first, then every flag the user set.
  std::string merged_config() const {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open " + config_path);
      try {
        j = json::parse(in);
      } catch (const json::parse_error& e) {
        throw std::runtime_error(config_path + ": " + e.what());
      }
    }
    for (const auto& [option, write] : writers)
      if (option->count() > 0) write(j);
    return j.dump();
  }
};

int report(voxrf_status status) {
  if (status != VOXRF_OK) std::fprintf(stderr, "error: %s\n", voxrf_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voxel radiance fields: train, clean up, render, evaluate"};
  app.require_subcommand(1);

  Cmd make_scene, train, cleanup, render, eval, analyze, export_cloud;

  make_scene.add_common(app.add_subcommand("make-scene", "Render a synthetic dataset"));
  make_scene.app->add_option("--scene", make_scene.scene, "scene JSON")->required();
  make_scene.app->add_option("--cameras", make_scene.cameras, "camera rig JSON")->required();
  make_scene.app->add_option("--out", make_scene.out, "output directory")->required();

  auto checkpointed = [](Cmd& c, CLI::App* a, bool needs_checkpoint = true) {
    c.add_common(a);
    if (needs_checkpoint)
      c.app->add_option("--checkpoint", c.checkpoint, "field checkpoint")->required();
    c.app->add_option("--dataset", c.dataset, "dataset directory")->required();
    c.app->add_option("--out", c.out, "output directory")->required();
  };

  checkpointed(train, app.add_subcommand("train", "Fit a field to the training views"), false);
  checkpointed(cleanup, app.add_subcommand("cleanup", "Remove free-space density post hoc"));
  checkpointed(render, app.add_subcommand("render", "Render dataset views from a checkpoint"));
  checkpointed(eval, app.add_subcommand("eval", "Image, mask, depth and cloud metrics"));
  checkpointed(analyze, app.add_subcommand("analyze", "Density histogram and ray profile"));
  checkpointed(export_cloud, app.add_subcommand("export-cloud", "Backprojected point cloud"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return VOXRF_E_VALIDATION;
  }

  try {
    if (make_scene.app->parsed())
      return report(voxrf_cmd_make_scene(make_scene.scene.c_str(), make_scene.cameras.c_str(),
                                         make_scene.out.c_str(),
                                         make_scene.merged_config().c_str()));
    if (train.app->parsed())
      return report(
          voxrf_cmd_train(train.dataset.c_str(), train.out.c_str(), train.merged_config().c_str()));
    if (cleanup.app->parsed())
      return report(voxrf_cmd_cleanup(cleanup.checkpoint.c_str(), cleanup.dataset.c_str(),
                                      cleanup.out.c_str(), cleanup.merged_config().c_str()));
    if (render.app->parsed())
      return report(voxrf_cmd_render(render.checkpoint.c_str(), render.dataset.c_str(),
                                     render.out.c_str(), render.merged_config().c_str()));
    if (eval.app->parsed())
      return report(voxrf_cmd_eval(eval.checkpoint.c_str(), eval.dataset.c_str(),
                                   eval.out.c_str(), eval.merged_config().c_str()));
    if (analyze.app->parsed())
      return report(voxrf_cmd_analyze(analyze.checkpoint.c_str(), analyze.dataset.c_str(),
                                      analyze.out.c_str(), analyze.merged_config().c_str()));
    if (export_cloud.app->parsed())
      return report(voxrf_cmd_export_cloud(export_cloud.checkpoint.c_str(),
                                           export_cloud.dataset.c_str(), export_cloud.out.c_str(),
                                           export_cloud.merged_config().c_str()));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return VOXRF_E_IO;
  }
  return VOXRF_E_VALIDATION;
}
