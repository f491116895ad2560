#include "voxrf/metrics.hpp"

#include <cmath>
#include <fstream>

#include "voxrf/kdtree.hpp"
#include "voxrf/rng.hpp"

namespace voxrf {
namespace {

void require_same_shape(const Image& a, const Image& b, const char* who) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw ValidationError(std::string(who) + ": image shapes differ");
}

void require_mask_shape(const Image& a, const BoolMask* mask, const char* who) {
  if (mask && (mask->width != a.width || mask->height != a.height))
    throw ValidationError(std::string(who) + ": mask shape does not match the images");
}

}  // namespace

double psnr(const Image& a, const Image& b, const BoolMask* mask) {
  require_same_shape(a, b, "psnr");
  require_mask_shape(a, mask, "psnr");
  double se = 0.0;
  int64_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (mask && !mask->at(x, y)) continue;
      for (int c = 0; c < a.channels; ++c) {
        double d = static_cast<double>(a.at(x, y, c)) - b.at(x, y, c);
        se += d * d;
      }
      ++n;
    }
  if (n == 0) throw ValidationError("psnr: no pixels selected");
  double mse = se / (static_cast<double>(n) * a.channels);
  if (mse <= 0) return 99.0;
  return std::min(99.0, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b, const BoolMask* mask) {
  require_same_shape(a, b, "ssim");
  require_mask_shape(a, mask, "ssim");
  constexpr int kRadius = 5;  // 11x11 window
  constexpr double kSigma = 1.5;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double kernel[2 * kRadius + 1];
  for (int i = -kRadius; i <= kRadius; ++i)
    kernel[i + kRadius] = std::exp(-0.5 * i * i / (kSigma * kSigma));

  double total = 0.0;
  int64_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (mask && !mask->at(x, y)) continue;
      double per_pixel = 0.0;
      for (int c = 0; c < a.channels; ++c) {
        double wsum = 0, ma = 0, mb = 0, maa = 0, mbb = 0, mab = 0;
        for (int dy = -kRadius; dy <= kRadius; ++dy) {
          int yy = y + dy;
          if (yy < 0 || yy >= a.height) continue;
          for (int dx = -kRadius; dx <= kRadius; ++dx) {
            int xx = x + dx;
            if (xx < 0 || xx >= a.width) continue;
            double w = kernel[dy + kRadius] * kernel[dx + kRadius];
            double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
            wsum += w;
            ma += w * va;
            mb += w * vb;
            maa += w * va * va;
            mbb += w * vb * vb;
            mab += w * va * vb;
          }
        }
        ma /= wsum;
        mb /= wsum;
        double var_a = maa / wsum - ma * ma;
        double var_b = mbb / wsum - mb * mb;
        double cov = mab / wsum - ma * mb;
        per_pixel += ((2 * ma * mb + c1) * (2 * cov + c2)) /
                     ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
      }
      total += per_pixel / a.channels;
      ++n;
    }
  if (n == 0) throw ValidationError("ssim: no pixels selected");
  return total / static_cast<double>(n);
}

PredictedMask predicted_mask(const Image& accum, double threshold) {
  if (accum.channels != 1) throw ValidationError("predicted_mask expects a single-channel raster");
  if (!(threshold > 0 && threshold <= 1))
    throw ValidationError("predicted_mask threshold must be in (0, 1]");
  PredictedMask out;
  out.threshold = threshold;
  out.mask = BoolMask(accum.width, accum.height);
  for (int y = 0; y < accum.height; ++y)
    for (int x = 0; x < accum.width; ++x)
      out.mask.at(x, y) = accum.at(x, y, 0) >= threshold ? 1 : 0;
  return out;
}

double coverage_percent(const BoolMask& predicted, const BoolMask& visible) {
  if (predicted.width != visible.width || predicted.height != visible.height)
    throw ValidationError("coverage: mask shapes differ");
  int64_t vis = 0, both = 0;
  for (std::size_t i = 0; i < visible.v.size(); ++i) {
    if (!visible.v[i]) continue;
    ++vis;
    both += predicted.v[i] != 0;
  }
  if (vis == 0) throw ValidationError("coverage: the visible mask is empty");
  return 100.0 * static_cast<double>(both) / static_cast<double>(vis);
}

double dice(const BoolMask& a, const BoolMask& b) {
  if (a.width != b.width || a.height != b.height)
    throw ValidationError("dice: mask shapes differ");
  int64_t na = 0, nb = 0, inter = 0;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    na += a.v[i] != 0;
    nb += b.v[i] != 0;
    inter += (a.v[i] && b.v[i]) ? 1 : 0;
  }
  if (na + nb == 0) return 1.0;  // agreeing on emptiness is agreement
  return 2.0 * static_cast<double>(inter) / static_cast<double>(na + nb);
}

BoolMask visible_region(const SyntheticScene& scene, const Camera& eval_cam,
                        const std::vector<Camera>& train_cams, double depth_threshold) {
  if (train_cams.empty()) throw ValidationError("visible_region needs training cameras");
  if (!(depth_threshold > 0)) throw ValidationError("depth threshold must be positive");
  BoolMask out(eval_cam.width, eval_cam.height);
  for (int py = 0; py < eval_cam.height; ++py)
    for (int px = 0; px < eval_cam.width; ++px) {
      Ray r = eval_cam.generate_ray(px, py);
      OracleHit h = scene.trace(r);
      if (!h.hit || h.t > depth_threshold) continue;
      Vec3 X = r.origin + r.dir * h.t;
      for (const Camera& cam : train_cams) {
        double ppx, ppy;
        if (!cam.project(X, ppx, ppy)) continue;
        if (ppx < -0.5 || ppx >= cam.width - 0.5 || ppy < -0.5 || ppy >= cam.height - 0.5)
          continue;
        Vec3 to_x = X - cam.position;
        double dist = norm(to_x);
        if (dist < 1e-9) continue;
        OracleHit back = scene.trace({cam.position, to_x / dist});
        if (back.hit && back.t >= dist - 1e-6 * (1.0 + dist)) {
          out.at(px, py) = 1;
          break;
        }
      }
    }
  return out;
}

double chamfer_bruteforce(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw ValidationError("chamfer needs two non-empty clouds");
  auto directed = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) {
        Vec3 d = p - q;
        best = std::min(best, dot(d, d));
      }
      sum += std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  if (a.empty() || b.empty()) throw ValidationError("chamfer needs two non-empty clouds");
  KdTree ta(a), tb(b);
  double sum_ab = 0.0, sum_ba = 0.0;
  for (const Vec3& p : a) sum_ab += std::sqrt(tb.nearest_sq(p));
  for (const Vec3& p : b) sum_ba += std::sqrt(ta.nearest_sq(p));
  return 0.5 * (sum_ab / a.size() + sum_ba / b.size());
}

PointCloudResult extract_point_cloud(const VoxelRadianceField& field,
                                     const std::vector<Camera>& cameras, const RenderConfig& rcfg,
                                     const CloudConfig& cfg) {
  if (cameras.empty()) throw ValidationError("extract_point_cloud needs cameras");
  if (cfg.points_target <= 0) throw ValidationError("points_target must be positive");
  int64_t budget = cfg.max_attempts > 0 ? cfg.max_attempts : 50LL * cfg.points_target;
  Rng rng(cfg.seed, "cloud");
  PointCloudResult out;
  out.points.reserve(cfg.points_target);
  while (out.rays_attempted < budget &&
         static_cast<int>(out.points.size()) < cfg.points_target) {
    ++out.rays_attempted;
    const Camera& cam = cameras[rng.next_below(cameras.size())];
    int px = static_cast<int>(rng.next_below(cam.width));
    int py = static_cast<int>(rng.next_below(cam.height));
    Ray ray = cam.generate_ray(px, py);
    RayRenderResult r = render_ray(field, ray, rcfg);
    if (r.accum >= cfg.accum_threshold) out.points.push_back(ray.origin + ray.dir * r.depth);
  }
  if (out.points.empty())
    throw ValidationError("extract_point_cloud: no ray accumulated enough weight; field is empty");
  out.reached_target = static_cast<int>(out.points.size()) >= cfg.points_target;
  return out;
}

DepthErrors depth_errors(const Image& depth, const Image& reference, const BoolMask* mask) {
  if (depth.channels != 1 || reference.channels != 1)
    throw ValidationError("depth_errors expects single-channel maps");
  require_same_shape(depth, reference, "depth_errors");
  require_mask_shape(depth, mask, "depth_errors");
  double se = 0, ae = 0;
  int64_t n = 0;
  for (int y = 0; y < depth.height; ++y)
    for (int x = 0; x < depth.width; ++x) {
      if (mask && !mask->at(x, y)) continue;
      double a = depth.at(x, y, 0), b = reference.at(x, y, 0);
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      double d = a - b;
      se += d * d;
      ae += std::fabs(d);
      ++n;
    }
  if (n == 0) throw ValidationError("depth_errors: no pixel is finite in both maps");
  return {std::sqrt(se / n), ae / n, n};
}

DensityHistogram density_histogram(const VoxelRadianceField& field, int64_t n_samples, int bins,
                                   uint64_t seed) {
  if (n_samples <= 0 || bins <= 0)
    throw ValidationError("density_histogram needs positive sample and bin counts");
  DensityHistogram h;
  h.counts.assign(bins, 0);
  h.total = n_samples;
  Rng rng(seed, "histogram");
  const Aabb& b = field.bounds();
  for (int64_t i = 0; i < n_samples; ++i) {
    Vec3 p = rng.next_in_box(b.lo, b.hi);
    double soft = softened_density(field.query(p).sigma);
    int bin = std::min(bins - 1, static_cast<int>(soft * bins));
    ++h.counts[bin];
  }
  return h;
}

std::vector<std::pair<double, double>> density_along_ray(const VoxelRadianceField& field,
                                                         const Ray& ray, int k, double t_near,
                                                         double t_far) {
  if (k < 2) throw ValidationError("density_along_ray needs at least 2 positions");
  if (!(t_far > t_near)) throw ValidationError("need t_near < t_far");
  std::vector<std::pair<double, double>> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    double t = t_near + (t_far - t_near) * i / (k - 1);
    out.emplace_back(t, softened_density(field.query(ray.origin + ray.dir * t).sigma));
  }
  return out;
}

int count_peaks(const std::vector<std::pair<double, double>>& profile, double threshold) {
  int peaks = 0;
  bool in_peak = false;
  for (const auto& [t, v] : profile) {
    if (v > threshold) {
      if (!in_peak) ++peaks;
      in_peak = true;
    } else {
      in_peak = false;
    }
  }
  return peaks;
}

void write_ply(const std::vector<Vec3>& points, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty float x\nproperty float y\nproperty float z\nend_header\n";
  char buf[128];
  for (const Vec3& p : points) {
    std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g\n", p.x, p.y, p.z);
    out << buf;
  }
  if (!out) throw IoError("short write on " + path);
}

}  // namespace voxrf
