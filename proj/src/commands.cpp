#include "voxrf/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "voxrf/cleanup.hpp"
#include "voxrf/metrics.hpp"
#include "voxrf/parallel.hpp"
#include "voxrf/plot.hpp"

namespace voxrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("short write on " + path);
}

void echo_config(const RunConfig& cfg, const std::string& command, const std::string& out_dir) {
  write_text((fs::path(out_dir) / "run_config.json").string(), cfg.to_json_text(command));
}

FspMode parse_fsp_mode(const std::string& name) {
  if (name == "none") return FspMode::None;
  if (name == "uniform3d") return FspMode::Uniform3d;
  if (name == "rays_only") return FspMode::RaysOnly;
  if (name == "rays_only_oversampled") return FspMode::RaysOnlyOversampled;
  throw ValidationError("unknown fsp_mode '" + name + "'");
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "eval") return Split::Eval;
  throw ValidationError("unknown split '" + name + "'");
}

TrainConfig train_config_from(const RunConfig& cfg) {
  TrainConfig t;
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
  return t;
}

RenderConfig render_config_from(const RunConfig& cfg, const Dataset& ds) {
  RenderConfig r = default_render_config(ds.bounds, ds.background);
  r.samples_per_ray = cfg.samples_per_ray;
  r.t_near = cfg.t_near;
  if (cfg.t_far > cfg.t_near) r.t_far = cfg.t_far;
  return r;
}

std::vector<Camera> split_cameras(const Dataset& ds, Split split) {
  std::vector<Camera> cams;
  for (const Frame& f : ds.frames)
    if (f.split == split) cams.push_back(f.camera);
  return cams;
}

void apply_floaters(VoxelRadianceField& field, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    j = json::parse(in);
    for (const json& f : j.at("floaters")) {
      Vec3 center{f.at("center")[0].get<double>(), f.at("center")[1].get<double>(),
                  f.at("center")[2].get<double>()};
      Vec3 color{f.at("color")[0].get<double>(), f.at("color")[1].get<double>(),
                 f.at("color")[2].get<double>()};
      field.inject_floater(center, f.at("radius").get<double>(), f.at("density").get<double>(),
                           color);
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

SyntheticScene load_scene_for(const std::string& dataset_dir) {
  fs::path p = fs::path(dataset_dir) / "scene.json";
  if (!fs::exists(p))
    throw ValidationError(p.string() +
                          " not found; evaluation needs the scene file a make-scene run emits");
  return load_scene(p.string());
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  RunConfig cfg;
  if (text.empty()) return cfg;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");

  try {
    for (auto& [key, value] : j.items()) {
      if (key == "seed") cfg.seed = value.get<uint64_t>();
      else if (key == "resolution") cfg.resolution = value.get<int>();
      else if (key == "steps") cfg.steps = value.get<int>();
      else if (key == "rays_per_step") cfg.rays_per_step = value.get<int>();
      else if (key == "samples_per_ray") cfg.samples_per_ray = value.get<int>();
      else if (key == "lr") cfg.lr = value.get<double>();
      else if (key == "cosine_decay") cfg.cosine_decay = value.get<bool>();
      else if (key == "lr_final_scale") cfg.lr_final_scale = value.get<double>();
      else if (key == "stratified") cfg.stratified = value.get<bool>();
      else if (key == "l2_weight") cfg.l2_weight = value.get<double>();
      else if (key == "t_near") cfg.t_near = value.get<double>();
      else if (key == "t_far") cfg.t_far = value.get<double>();
      else if (key == "divergence_factor") cfg.divergence_factor = value.get<double>();
      else if (key == "divergence_patience") cfg.divergence_patience = value.get<int>();
      else if (key == "lambda") cfg.lambda = value.get<double>();
      else if (key == "fsp_mode") cfg.fsp_mode = value.get<std::string>();
      else if (key == "fsp_points") cfg.fsp_points = value.get<int>();
      else if (key == "fsp_oversample") cfg.fsp_oversample = value.get<int>();
      else if (key == "iterations") cfg.iterations = value.get<int>();
      else if (key == "cleanup_lr") cfg.cleanup_lr = value.get<double>();
      else if (key == "split") cfg.split = value.get<std::string>();
      else if (key == "accum_threshold") cfg.accum_threshold = value.get<double>();
      else if (key == "depth_threshold") cfg.depth_threshold = value.get<double>();
      else if (key == "cloud_points") cfg.cloud_points = value.get<int>();
      else if (key == "cloud_accum_threshold") cfg.cloud_accum_threshold = value.get<double>();
      else if (key == "hist_samples") cfg.hist_samples = value.get<int64_t>();
      else if (key == "hist_bins") cfg.hist_bins = value.get<int>();
      else if (key == "profile_frame") cfg.profile_frame = value.get<int>();
      else if (key == "profile_px") cfg.profile_px = value.get<int>();
      else if (key == "profile_py") cfg.profile_py = value.get<int>();
      else if (key == "profile_samples") cfg.profile_samples = value.get<int>();
      else if (key == "initial_sigma") cfg.initial_sigma = value.get<double>();
      else if (key == "inject_floaters") cfg.inject_floaters = value.get<std::string>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  parse_fsp_mode(cfg.fsp_mode);
  parse_split(cfg.split);
  return cfg;
}

std::string RunConfig::to_json_text(const std::string& command) const {
  json j = {
      {"command", command},
      {"threads", thread_count()},
      {"seed", seed},
      {"resolution", resolution},
      {"steps", steps},
      {"rays_per_step", rays_per_step},
      {"samples_per_ray", samples_per_ray},
      {"lr", lr},
      {"cosine_decay", cosine_decay},
      {"lr_final_scale", lr_final_scale},
      {"stratified", stratified},
      {"l2_weight", l2_weight},
      {"t_near", t_near},
      {"t_far", t_far},
      {"divergence_factor", divergence_factor},
      {"divergence_patience", divergence_patience},
      {"lambda", lambda},
      {"fsp_mode", fsp_mode},
      {"fsp_points", fsp_points},
      {"fsp_oversample", fsp_oversample},
      {"iterations", iterations},
      {"cleanup_lr", cleanup_lr},
      {"split", split},
      {"accum_threshold", accum_threshold},
      {"depth_threshold", depth_threshold},
      {"cloud_points", cloud_points},
      {"cloud_accum_threshold", cloud_accum_threshold},
      {"hist_samples", hist_samples},
      {"hist_bins", hist_bins},
      {"profile_frame", profile_frame},
      {"profile_px", profile_px},
      {"profile_py", profile_py},
      {"profile_samples", profile_samples},
      {"initial_sigma", initial_sigma},
      {"inject_floaters", inject_floaters},
  };
  return j.dump(2) + "\n";
}

void cmd_make_scene(const std::string& scene_path, const std::string& cameras_path,
                    const std::string& out_dir, const RunConfig& cfg) {
  SyntheticScene scene = load_scene(scene_path);
  std::vector<Camera> cameras;
  std::vector<Split> splits;
  load_camera_rig(cameras_path, cameras, splits);

  std::vector<Camera> train_cams;
  for (std::size_t i = 0; i < cameras.size(); ++i)
    if (splits[i] == Split::Train) train_cams.push_back(cameras[i]);
  std::vector<int> visible = scene.visible_floaters(train_cams);
  if (!visible.empty())
    throw ValidationError("floater primitive " + std::to_string(visible.front()) +
                          " is visible from a training camera; floaters must only occupy space "
                          "no training ray reaches first");

  Dataset ds = render_dataset(scene, cameras, splits);
  ensure_dir(out_dir);
  save_dataset(ds, out_dir);
  save_scene(scene, (fs::path(out_dir) / "scene.json").string());

  json floaters = json::array();
  for (const Primitive& p : scene.prims) {
    if (!p.floater) continue;
    double radius = p.kind == Primitive::Kind::Sphere
                        ? p.radius
                        : 0.5 * std::min({p.size.x, p.size.y, p.size.z});
    floaters.push_back({{"center", {p.center.x, p.center.y, p.center.z}},
                        {"radius", radius},
                        {"density", p.density},
                        {"color", {p.albedo.x, p.albedo.y, p.albedo.z}}});
  }
  write_text((fs::path(out_dir) / "floaters.json").string(),
             json{{"floaters", floaters}}.dump(2) + "\n");
  echo_config(cfg, "make-scene", out_dir);
}

void cmd_train(const std::string& dataset_dir, const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::init_field(cfg.resolution, cfg.resolution,
                                                            cfg.resolution, ds.bounds,
                                                            cfg.initial_sigma);
  TrainConfig tcfg = train_config_from(cfg);
  std::vector<LossReport> log =
      cfg.l2_weight > 0 ? l2_regularized_train(field, ds, tcfg) : train(field, ds, tcfg);
  if (!cfg.inject_floaters.empty()) apply_floaters(field, cfg.inject_floaters);

  ensure_dir(out_dir);
  field.save_checkpoint((fs::path(out_dir) / "field.ckpt").string());
  write_loss_csv(log, (fs::path(out_dir) / "train_log.csv").string());
  echo_config(cfg, "train", out_dir);
}

void cmd_cleanup(const std::string& checkpoint, const std::string& dataset_dir,
                 const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::load_checkpoint(checkpoint);
  FspMode mode = parse_fsp_mode(cfg.fsp_mode);

  CleanupConfig ccfg;
  ccfg.iterations = cfg.iterations;
  ccfg.lambda = cfg.lambda;
  ccfg.points_per_step = cfg.fsp_points;
  ccfg.rays_per_step = cfg.rays_per_step;
  ccfg.samples_per_ray = cfg.samples_per_ray;
  ccfg.lr = cfg.cleanup_lr;
  ccfg.oversample = cfg.fsp_oversample;
  ccfg.seed = cfg.seed;
  ccfg.t_near = cfg.t_near;
  ccfg.t_far = cfg.t_far;

  std::vector<LossReport> log;
  switch (mode) {
    case FspMode::Uniform3d:
      log = cleanup(field, ds, ccfg);
      break;
    case FspMode::RaysOnly:
      log = cleanup_rays_only(field, ds, ccfg, false);
      break;
    case FspMode::RaysOnlyOversampled:
      log = cleanup_rays_only(field, ds, ccfg, true);
      break;
    case FspMode::None: {
      // plain fine-tune on the same schedule, as the do-nothing-extra arm
      TrainConfig t = train_config_from(cfg);
      t.steps = cfg.iterations;
      t.adam.lr = cfg.cleanup_lr;
      t.cosine_decay = false;
      log = train(field, ds, t);
      break;
    }
  }

  ensure_dir(out_dir);
  field.save_checkpoint((fs::path(out_dir) / "field.ckpt").string());
  write_loss_csv(log, (fs::path(out_dir) / "cleanup_log.csv").string());
  echo_config(cfg, "cleanup", out_dir);
}

void cmd_render(const std::string& checkpoint, const std::string& dataset_dir,
                const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::load_checkpoint(checkpoint);
  RenderConfig rcfg = render_config_from(cfg, ds);
  Split split = parse_split(cfg.split);

  ensure_dir((fs::path(out_dir) / "renders").string());
  int i = 0;
  for (const Frame& f : ds.frames) {
    if (f.split != split) continue;
    RenderedImage im = render_image(field, f.camera, rcfg);
    char name[64];
    std::snprintf(name, sizeof(name), "%s_%03d", split_name(split), i++);
    fs::path base = fs::path(out_dir) / "renders" / name;
    write_png(base.string() + ".png", im.color);
    write_pfm(base.string() + "_depth.pfm", im.depth);
    write_pfm(base.string() + "_accum.pfm", im.accum);
  }
  if (i == 0) throw ValidationError(std::string("dataset has no ") + cfg.split + " frames");
  echo_config(cfg, "render", out_dir);
}

void cmd_eval(const std::string& checkpoint, const std::string& dataset_dir,
              const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  SyntheticScene scene = load_scene_for(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::load_checkpoint(checkpoint);
  RenderConfig rcfg = render_config_from(cfg, ds);
  Split split = parse_split(cfg.split);
  std::vector<Camera> train_cams = split_cameras(ds, Split::Train);
  if (train_cams.empty()) throw ValidationError("dataset has no train frames");
  double depth_threshold =
      cfg.depth_threshold > 0 ? cfg.depth_threshold : 2.0 * ds.bounds.diagonal();

  // Reference cloud from oracle depths, capped at the cloud budget.
  std::vector<Vec3> gt_cloud;
  {
    std::vector<Vec3> all;
    for (const Frame& f : ds.frames) {
      if (f.split != Split::Train || f.depth.width == 0) continue;
      for (int py = 0; py < f.camera.height; ++py)
        for (int px = 0; px < f.camera.width; ++px) {
          float d = f.depth.at(px, py, 0);
          if (!std::isfinite(d)) continue;
          Ray r = f.camera.generate_ray(px, py);
          all.push_back(r.origin + r.dir * d);
        }
    }
    if (all.empty()) throw ValidationError("no train frame carries oracle depth");
    std::size_t stride = std::max<std::size_t>(1, all.size() / cfg.cloud_points);
    for (std::size_t i = 0; i < all.size(); i += stride) gt_cloud.push_back(all[i]);
  }

  CloudConfig ccfg;
  ccfg.points_target = cfg.cloud_points;
  ccfg.accum_threshold = cfg.cloud_accum_threshold;
  ccfg.seed = cfg.seed;
  PointCloudResult cloud = extract_point_cloud(field, train_cams, rcfg, ccfg);
  double chamfer_dist = chamfer(cloud.points, gt_cloud);

  json frame_rows = json::array();
  double sum_psnr_full = 0, sum_ssim_full = 0;
  double sum_psnr_gt = 0, sum_ssim_gt = 0, sum_psnr_pred = 0, sum_ssim_pred = 0;
  double sum_cov = 0, sum_dice = 0, sum_rmse = 0, sum_mae = 0;
  int n_frames = 0;
  std::string csv = "frame,psnr,ssim,psnr_gt_mask,ssim_gt_mask,psnr_predicted_mask,"
                    "ssim_predicted_mask,coverage_pct,dice,depth_rmse,depth_mae\n";

  for (std::size_t fi = 0; fi < ds.frames.size(); ++fi) {
    const Frame& f = ds.frames[fi];
    if (f.split != split) continue;
    RenderedImage im = render_image(field, f.camera, rcfg);

    BoolMask gt_mask(f.camera.width, f.camera.height);
    for (int py = 0; py < f.camera.height; ++py)
      for (int px = 0; px < f.camera.width; ++px) {
        bool hit = f.depth.width > 0 ? std::isfinite(f.depth.at(px, py, 0))
                                     : scene.trace(f.camera.generate_ray(px, py)).hit;
        gt_mask.at(px, py) = hit ? 1 : 0;
      }
    PredictedMask pred = predicted_mask(im.accum, cfg.accum_threshold);
    BoolMask visible = visible_region(scene, f.camera, train_cams, depth_threshold);

    double p_full = psnr(im.color, f.image);
    double s_full = ssim(im.color, f.image);
    double p_gt = psnr(im.color, f.image, &gt_mask);
    double s_gt = ssim(im.color, f.image, &gt_mask);
    double p_pred = psnr(im.color, f.image, &pred.mask);
    double s_pred = ssim(im.color, f.image, &pred.mask);
    double cov = coverage_percent(pred.mask, visible);
    double dc = dice(pred.mask, gt_mask);
    DepthErrors de = depth_errors(im.depth, f.depth, &gt_mask);

    sum_psnr_full += p_full;
    sum_ssim_full += s_full;
    sum_psnr_gt += p_gt;
    sum_ssim_gt += s_gt;
    sum_psnr_pred += p_pred;
    sum_ssim_pred += s_pred;
    sum_cov += cov;
    sum_dice += dc;
    sum_rmse += de.rmse;
    sum_mae += de.mae;
    ++n_frames;

    frame_rows.push_back({{"frame", fi},
                          {"full", {{"psnr", p_full}, {"ssim", s_full}}},
                          {"gt_mask", {{"psnr", p_gt}, {"ssim", s_gt}}},
                          {"predicted_mask", {{"psnr", p_pred}, {"ssim", s_pred}}},
                          {"coverage_pct", cov},
                          {"dice", dc},
                          {"depth_rmse", de.rmse},
                          {"depth_mae", de.mae}});
    char row[320];
    std::snprintf(row, sizeof(row), "%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f,%.6f,%.6g,%.6g\n", fi,
                  p_full, s_full, p_gt, s_gt, p_pred, s_pred, cov, dc, de.rmse, de.mae);
    csv += row;
  }
  if (n_frames == 0) throw ValidationError(std::string("dataset has no ") + cfg.split + " frames");

  json summary = {
      {"frames_evaluated", n_frames},
      {"full", {{"psnr", sum_psnr_full / n_frames}, {"ssim", sum_ssim_full / n_frames}}},
      {"gt_mask", {{"psnr", sum_psnr_gt / n_frames}, {"ssim", sum_ssim_gt / n_frames}}},
      {"predicted_mask",
       {{"psnr", sum_psnr_pred / n_frames}, {"ssim", sum_ssim_pred / n_frames}}},
      {"coverage_pct", sum_cov / n_frames},
      {"dice", sum_dice / n_frames},
      {"chamfer", chamfer_dist},
      {"depth_rmse", sum_rmse / n_frames},
      {"depth_mae", sum_mae / n_frames},
      {"accum_threshold", cfg.accum_threshold},
      {"depth_threshold", depth_threshold},
      {"cloud_points", cloud.points.size()},
      {"cloud_reached_target", cloud.reached_target},
  };

  ensure_dir(out_dir);
  write_text((fs::path(out_dir) / "eval.json").string(),
             json{{"summary", summary}, {"frames", frame_rows}}.dump(2) + "\n");
  write_text((fs::path(out_dir) / "eval_frames.csv").string(), csv);
  echo_config(cfg, "eval", out_dir);
}

void cmd_analyze(const std::string& checkpoint, const std::string& dataset_dir,
                 const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::load_checkpoint(checkpoint);
  RenderConfig rcfg = render_config_from(cfg, ds);
  ensure_dir(out_dir);

  DensityHistogram hist = density_histogram(field, cfg.hist_samples, cfg.hist_bins, cfg.seed);
  std::string hist_csv = "bin_lo,bin_hi,count,fraction\n";
  std::vector<double> heights;
  double middle = 0;
  for (int b = 0; b < cfg.hist_bins; ++b) {
    double lo = static_cast<double>(b) / cfg.hist_bins;
    double hi = static_cast<double>(b + 1) / cfg.hist_bins;
    double frac = static_cast<double>(hist.counts[b]) / hist.total;
    char row[128];
    std::snprintf(row, sizeof(row), "%.4f,%.4f,%lld,%.8f\n", lo, hi,
                  static_cast<long long>(hist.counts[b]), frac);
    hist_csv += row;
    heights.push_back(frac);
    if (lo >= 0.1 && hi <= 0.9) middle += frac;
  }
  write_text((fs::path(out_dir) / "histogram.csv").string(), hist_csv);
  write_bar_plot((fs::path(out_dir) / "histogram.png").string(), heights);

  if (cfg.profile_frame < 0 || cfg.profile_frame >= static_cast<int>(ds.frames.size()))
    throw ValidationError("profile_frame out of range");
  const Camera& cam = ds.frames[cfg.profile_frame].camera;
  int px = cfg.profile_px >= 0 ? cfg.profile_px : cam.width / 2;
  int py = cfg.profile_py >= 0 ? cfg.profile_py : cam.height / 2;
  if (px >= cam.width || py >= cam.height) throw ValidationError("profile pixel out of range");
  Ray ray = cam.generate_ray(px, py);
  auto profile = density_along_ray(field, ray, cfg.profile_samples, rcfg.t_near, rcfg.t_far);
  int peaks = count_peaks(profile, 0.5);

  std::string prof_csv = "t,softened_density\n";
  PlotSeries series;
  for (const auto& [t, v] : profile) {
    char row[96];
    std::snprintf(row, sizeof(row), "%.8f,%.8f\n", t, v);
    prof_csv += row;
    series.x.push_back(t);
    series.y.push_back(v);
  }
  write_text((fs::path(out_dir) / "profile.csv").string(), prof_csv);
  write_line_plot((fs::path(out_dir) / "profile.png").string(), {series});

  json analysis = {{"peaks", peaks},
                   {"profile_frame", cfg.profile_frame},
                   {"profile_px", px},
                   {"profile_py", py},
                   {"histogram_middle_mass", middle},
                   {"histogram_samples", hist.total}};
  write_text((fs::path(out_dir) / "analysis.json").string(), analysis.dump(2) + "\n");
  echo_config(cfg, "analyze", out_dir);
}

void cmd_export_cloud(const std::string& checkpoint, const std::string& dataset_dir,
                      const std::string& out_dir, const RunConfig& cfg) {
  Dataset ds = load_dataset(dataset_dir);
  VoxelRadianceField field = VoxelRadianceField::load_checkpoint(checkpoint);
  RenderConfig rcfg = render_config_from(cfg, ds);
  std::vector<Camera> cams = split_cameras(ds, Split::Train);
  if (cams.empty()) throw ValidationError("dataset has no train frames");

  CloudConfig ccfg;
  ccfg.points_target = cfg.cloud_points;
  ccfg.accum_threshold = cfg.cloud_accum_threshold;
  ccfg.seed = cfg.seed;
  PointCloudResult cloud = extract_point_cloud(field, cams, rcfg, ccfg);

  ensure_dir(out_dir);
  write_ply(cloud.points, (fs::path(out_dir) / "cloud.ply").string());
  json stats = {{"points", cloud.points.size()},
                {"rays_attempted", cloud.rays_attempted},
                {"reached_target", cloud.reached_target}};
  write_text((fs::path(out_dir) / "cloud_stats.json").string(), stats.dump(2) + "\n");
  echo_config(cfg, "export-cloud", out_dir);
}

}  // namespace voxrf
