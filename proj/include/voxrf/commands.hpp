#pragma once

#include <string>

namespace voxrf {

// Flat configuration shared by every subcommand. Parsed from a JSON object;
// unknown keys are rejected so typos fail loudly instead of silently running
// defaults. Members mirror TrainConfig/CleanupConfig/metric defaults.
struct RunConfig {
  uint64_t seed = 1;
  int resolution = 64;

  // optimization
  int steps = 2000;
  int rays_per_step = 2048;
  int samples_per_ray = 192;
  double lr = 1e-2;
  bool cosine_decay = true;
  double lr_final_scale = 0.01;
  bool stratified = true;
  double l2_weight = 0.0;
  double t_near = 0.05;
  double t_far = 0.0;  // auto
  double divergence_factor = 10.0;
  int divergence_patience = 100;

  // free-space penalty
  double lambda = 0.1;
  std::string fsp_mode = "uniform3d";  // none | uniform3d | rays_only | rays_only_oversampled
  int fsp_points = 1 << 17;
  int fsp_oversample = 4;
  int iterations = 1000;   // cleanup steps
  double cleanup_lr = 2e-2;

  // rendering and metrics
  std::string split = "eval";
  double accum_threshold = 0.98;
  double depth_threshold = 0.0;  // auto: 2x scene diagonal
  int cloud_points = 35000;
  double cloud_accum_threshold = 0.5;
  int64_t hist_samples = 200000;
  int hist_bins = 20;
  int profile_frame = 0;
  int profile_px = -1;  // default: image center
  int profile_py = -1;
  int profile_samples = 256;

  // scene fixtures
  double initial_sigma = 0.1;
  std::string inject_floaters;  // path to a floater list applied after training

  static RunConfig from_json_text(const std::string& text);
  std::string to_json_text(const std::string& command) const;
};

// Each command writes its outputs plus run_config.json under out_dir.
void cmd_make_scene(const std::string& scene_path, const std::string& cameras_path,
                    const std::string& out_dir, const RunConfig& cfg);
void cmd_train(const std::string& dataset_dir, const std::string& out_dir, const RunConfig& cfg);
void cmd_cleanup(const std::string& checkpoint, const std::string& dataset_dir,
                 const std::string& out_dir, const RunConfig& cfg);
void cmd_render(const std::string& checkpoint, const std::string& dataset_dir,
                const std::string& out_dir, const RunConfig& cfg);
void cmd_eval(const std::string& checkpoint, const std::string& dataset_dir,
              const std::string& out_dir, const RunConfig& cfg);
void cmd_analyze(const std::string& checkpoint, const std::string& dataset_dir,
                 const std::string& out_dir, const RunConfig& cfg);
void cmd_export_cloud(const std::string& checkpoint, const std::string& dataset_dir,
                      const std::string& out_dir, const RunConfig& cfg);

}  // namespace voxrf
