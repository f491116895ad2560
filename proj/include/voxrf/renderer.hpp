#pragma once

#include <array>
#include <vector>

#include "voxrf/camera.hpp"
#include "voxrf/field.hpp"
#include "voxrf/image.hpp"
#include "voxrf/rng.hpp"

namespace voxrf {

struct RenderConfig {
  int samples_per_ray = 192;
  double t_near = 0.05;
  double t_far = 7.0;
  bool stratified = false;             // jitter sample positions within their bins
  double stop_transmittance = 1e-7;    // stop marching once this little light remains
  Vec3 background{0, 0, 0};
};

// t_far defaults to twice the bounds diagonal so any orbiting camera sees the
// whole volume.
RenderConfig default_render_config(const Aabb& bounds, const Vec3& background);

// Sample positions along a ray segment. The segment is split into k equal
// bins of width delta; deterministic sampling takes bin midpoints, stratified
// sampling one uniform position per bin.
struct RaySamples {
  std::vector<double> t;
  std::vector<double> delta;
};

RaySamples sample_ray(double t_near, double t_far, int k, bool stratified, Rng* rng);

struct CompositeResult {
  Vec3 color;                 // includes the background behind the volume
  double accum = 0;           // total absorbed weight, in [0, 1]
  double depth = 0;           // expected depth; 0 when nothing was hit
  double transmittance = 1;   // light surviving the whole segment
  int used = 0;               // samples consumed before any early stop
};

// Front-to-back alpha compositing over per-sample densities and colors.
// alpha_i = 1 - exp(-sigma_i * delta_i), weight_i = T_i * alpha_i with
// T_i the product of (1 - alpha_j) for j < i. accum + transmittance == 1 up
// to roundoff. depth = sum(w_i t_i) / max(accum, 1e-8).
CompositeResult composite(const std::vector<double>& sigma, const std::vector<Vec3>& color,
                          const std::vector<double>& t, const std::vector<double>& delta,
                          const Vec3& background, double stop_transmittance = 0.0);

struct CompositeUpstream {
  Vec3 d_color;      // d loss / d output color, per channel
  double d_accum = 0;
  double d_depth = 0;
};

// Exact adjoint of composite (without early stopping). Writes per-sample
// gradients of the upstream-weighted outputs into d_sigma and d_color.
void composite_backward(const std::vector<double>& sigma, const std::vector<Vec3>& color,
                        const std::vector<double>& t, const std::vector<double>& delta,
                        const Vec3& background, const CompositeUpstream& upstream,
                        std::vector<double>& d_sigma, std::vector<Vec3>& d_color);

struct RayRenderResult {
  Vec3 color;
  double depth = 0;
  double accum = 0;
  double transmittance = 1;
};

// Samples the segment, queries the field, composites. Pass an rng only for
// stratified sampling.
RayRenderResult render_ray(const VoxelRadianceField& field, const Ray& ray,
                           const RenderConfig& cfg, Rng* rng = nullptr);

struct RenderedImage {
  Image color;  // 3 channels
  Image depth;  // 1 channel, expected depth
  Image accum;  // 1 channel
};

// Deterministic whole-frame render (bin midpoints, rows processed in
// parallel into disjoint memory).
RenderedImage render_image(const VoxelRadianceField& field, const Camera& camera,
                           const RenderConfig& cfg);

// Differs from render_ray by keeping every field tap so a backward pass can
// run without touching the field again. Reused across rays to avoid churn.
struct RayWorkspace {
  std::vector<VoxelRadianceField::SampleTap> taps;
  std::vector<double> t, delta, weight, trans_after;
  CompositeResult result;
};

// Per-ray sparse gradient, merged into a GradientBuffer in a fixed order by
// the caller so results do not depend on thread scheduling.
struct RayGradSink {
  std::vector<std::pair<uint32_t, double>> density;
  std::vector<std::pair<uint32_t, std::array<double, 3>>> color;

  void clear() {
    density.clear();
    color.clear();
  }
  void merge_into(GradientBuffer& g) const {
    for (const auto& [v, d] : density) g.d_density[v] += d;
    for (const auto& [v, c] : color) {
      double* dst = &g.d_color[static_cast<std::size_t>(v) * 3];
      dst[0] += c[0];
      dst[1] += c[1];
      dst[2] += c[2];
    }
  }
};

CompositeResult render_ray_cached(const VoxelRadianceField& field, const Ray& ray,
                                  const RaySamples& samples, const Vec3& background,
                                  double stop_transmittance, RayWorkspace& ws);

// Backward over the cached taps; appends parameter gradients to the sink.
void backward_from_cache(const RayWorkspace& ws, const Vec3& background,
                         const CompositeUpstream& upstream, RayGradSink& sink);

}  // namespace voxrf
