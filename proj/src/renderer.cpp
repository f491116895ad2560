#include "voxrf/renderer.hpp"

#include <cmath>

#include "voxrf/parallel.hpp"

namespace voxrf {
namespace {

constexpr double kAccumFloor = 1e-8;  // depth denominator clamp

}  // namespace

RenderConfig default_render_config(const Aabb& bounds, const Vec3& background) {
  RenderConfig cfg;
  cfg.t_far = 2.0 * bounds.diagonal();
  cfg.background = background;
  return cfg;
}

RaySamples sample_ray(double t_near, double t_far, int k, bool stratified, Rng* rng) {
  if (k < 1) throw ValidationError("sample count must be at least 1");
  if (!(t_far > t_near) || !(t_near >= 0))
    throw ValidationError("need 0 <= t_near < t_far");
  if (stratified && !rng) throw ValidationError("stratified sampling needs an rng");
  RaySamples s;
  s.t.resize(k);
  s.delta.assign(k, (t_far - t_near) / k);
  double step = s.delta[0];
  for (int i = 0; i < k; ++i) {
    double u = stratified ? rng->next_double() : 0.5;
    s.t[i] = t_near + (i + u) * step;
  }
  return s;
}

CompositeResult composite(const std::vector<double>& sigma, const std::vector<Vec3>& color,
                          const std::vector<double>& t, const std::vector<double>& delta,
                          const Vec3& background, double stop_transmittance) {
  std::size_t n = sigma.size();
  if (color.size() != n || t.size() != n || delta.size() != n)
    throw ValidationError("composite: per-sample arrays must have equal length");
  CompositeResult r;
  double T = 1.0, A = 0.0, S = 0.0;
  Vec3 C;
  std::size_t i = 0;
  for (; i < n; ++i) {
    if (stop_transmittance > 0 && T < stop_transmittance) break;
    double a = -std::expm1(-sigma[i] * delta[i]);
    double w = T * a;
    C += color[i] * w;
    A += w;
    S += w * t[i];
    T *= 1.0 - a;
  }
  r.color = C + background * T;
  r.accum = A;
  r.depth = S / std::max(A, kAccumFloor);
  r.transmittance = T;
  r.used = static_cast<int>(i);
  return r;
}

void composite_backward(const std::vector<double>& sigma, const std::vector<Vec3>& color,
                        const std::vector<double>& t, const std::vector<double>& delta,
                        const Vec3& background, const CompositeUpstream& upstream,
                        std::vector<double>& d_sigma, std::vector<Vec3>& d_color) {
  std::size_t n = sigma.size();
  if (color.size() != n || t.size() != n || delta.size() != n)
    throw ValidationError("composite_backward: per-sample arrays must have equal length");
  d_sigma.assign(n, 0.0);
  d_color.assign(n, Vec3{});

  std::vector<double> w(n), trans_after(n);
  double T = 1.0, A = 0.0, S = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double a = -std::expm1(-sigma[i] * delta[i]);
    w[i] = T * a;
    A += w[i];
    S += w[i] * t[i];
    T *= 1.0 - a;
    trans_after[i] = T;
  }

  double u_depth_scaled = upstream.d_depth / std::max(A, kAccumFloor);
  double u_accum = upstream.d_accum;
  if (A > kAccumFloor) u_accum -= upstream.d_depth * S / (A * A);

  double R = T * dot(background, upstream.d_color);
  for (std::size_t k = n; k-- > 0;) {
    double v = dot(color[k], upstream.d_color) + t[k] * u_depth_scaled + u_accum;
    d_sigma[k] = delta[k] * (trans_after[k] * v - R);
    d_color[k] = upstream.d_color * w[k];
    R += w[k] * v;
  }
}

RayRenderResult render_ray(const VoxelRadianceField& field, const Ray& ray,
                           const RenderConfig& cfg, Rng* rng) {
  RaySamples s = sample_ray(cfg.t_near, cfg.t_far, cfg.samples_per_ray, cfg.stratified, rng);
  RayWorkspace ws;
  CompositeResult r = render_ray_cached(field, ray, s, cfg.background, cfg.stop_transmittance, ws);
  return {r.color, r.depth, r.accum, r.transmittance};
}

CompositeResult render_ray_cached(const VoxelRadianceField& field, const Ray& ray,
                                  const RaySamples& samples, const Vec3& background,
                                  double stop_transmittance, RayWorkspace& ws) {
  std::size_t n = samples.t.size();
  ws.t = samples.t;
  ws.delta = samples.delta;
  ws.taps.resize(n);
  ws.weight.assign(n, 0.0);
  ws.trans_after.resize(n);

  double T = 1.0, A = 0.0, S = 0.0;
  Vec3 C;
  std::size_t i = 0;
  for (; i < n; ++i) {
    if (stop_transmittance > 0 && T < stop_transmittance) break;
    Vec3 p = ray.origin + ray.dir * ws.t[i];
    ws.taps[i] = field.tap(p);
    const auto& tap = ws.taps[i];
    if (tap.inside && tap.sigma > 0) {
      double a = -std::expm1(-tap.sigma * ws.delta[i]);
      double w = T * a;
      C += tap.color * w;
      A += w;
      S += w * ws.t[i];
      T *= 1.0 - a;
      ws.weight[i] = w;
    }
    ws.trans_after[i] = T;
  }

  CompositeResult r;
  r.color = C + background * T;
  r.accum = A;
  r.depth = S / std::max(A, kAccumFloor);
  r.transmittance = T;
  r.used = static_cast<int>(i);
  ws.result = r;
  return r;
}

void backward_from_cache(const RayWorkspace& ws, const Vec3& background,
                         const CompositeUpstream& upstream, RayGradSink& sink) {
  const CompositeResult& r = ws.result;
  double u_depth_scaled = upstream.d_depth / std::max(r.accum, kAccumFloor);
  double u_accum = upstream.d_accum;
  if (r.accum > kAccumFloor)
    u_accum -= upstream.d_depth * (r.depth * r.accum) / (r.accum * r.accum);

  double R = r.transmittance * dot(background, upstream.d_color);
  for (std::size_t k = static_cast<std::size_t>(r.used); k-- > 0;) {
    const auto& tap = ws.taps[k];
    if (!tap.inside) continue;  // no parameters out there, and weight was zero
    double v = dot(tap.color, upstream.d_color) + ws.t[k] * u_depth_scaled + u_accum;
    double d_sigma = ws.delta[k] * (ws.trans_after[k] * v - R);
    double w = ws.weight[k];
    R += w * v;

    double d_pre = d_sigma * tap.sp_deriv;
    for (int c = 0; c < 8; ++c)
      sink.density.emplace_back(tap.vidx[c], d_pre * tap.w[c]);
    if (w > 1e-14 && (upstream.d_color.x != 0 || upstream.d_color.y != 0 || upstream.d_color.z != 0)) {
      Vec3 d_col = upstream.d_color * w;
      double dr = d_col.x * tap.sig_deriv.x, dg = d_col.y * tap.sig_deriv.y,
             db = d_col.z * tap.sig_deriv.z;
      for (int c = 0; c < 8; ++c)
        sink.color.push_back({tap.vidx[c], {dr * tap.w[c], dg * tap.w[c], db * tap.w[c]}});
    }
  }
}

RenderedImage render_image(const VoxelRadianceField& field, const Camera& camera,
                           const RenderConfig& cfg) {
  camera.validate();
  if (cfg.stratified)
    throw ValidationError("render_image is deterministic; stratified sampling is per-ray only");
  RenderedImage out{Image(camera.width, camera.height, 3), Image(camera.width, camera.height, 1),
                    Image(camera.width, camera.height, 1)};
  parallel_for(static_cast<std::size_t>(camera.height), [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      int py = static_cast<int>(y);
      for (int px = 0; px < camera.width; ++px) {
        RayRenderResult r = render_ray(field, camera.generate_ray(px, py), cfg);
        for (int c = 0; c < 3; ++c) out.color.at(px, py, c) = static_cast<float>(r.color[c]);
        out.depth.at(px, py, 0) = static_cast<float>(r.depth);
        out.accum.at(px, py, 0) = static_cast<float>(r.accum);
      }
    }
  });
  return out;
}

}  // namespace voxrf
