#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "voxrf/common.hpp"

namespace voxrf {

struct FieldSample {
  double sigma = 0.0;  // activated density, >= 0
  Vec3 color;          // activated, each channel in (0, 1)
};

// Per-vertex gradient accumulator matching the field layout.
struct GradientBuffer {
  std::vector<double> d_density;
  std::vector<double> d_color;  // interleaved r,g,b per vertex

  void resize_for(std::size_t vertex_count) {
    d_density.assign(vertex_count, 0.0);
    d_color.assign(vertex_count * 3, 0.0);
  }
  void clear() {
    std::fill(d_density.begin(), d_density.end(), 0.0);
    std::fill(d_color.begin(), d_color.end(), 0.0);
  }
};

// Dense grid of raw parameters on the vertex lattice. Queries interpolate the
// raw values trilinearly first and activate after: sigma = softplus(raw),
// color = sigmoid(raw) per channel. Outside the bounds the field is exactly
// empty (zero density, zero gradient). A query exactly on a vertex returns
// that vertex's activated values.
class VoxelRadianceField {
 public:
  VoxelRadianceField(int nx, int ny, int nz, const Aabb& bounds);

  // Fresh field: activated density ~ initial_sigma everywhere, colors 0.5.
  static VoxelRadianceField init_field(int nx, int ny, int nz, const Aabb& bounds,
                                       double initial_sigma = 0.1);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int nz() const { return nz_; }
  const Aabb& bounds() const { return bounds_; }
  std::size_t vertex_count() const { return raw_density_.size(); }
  // Largest vertex spacing across the axes; the natural length unit.
  double vertex_spacing() const;

  std::vector<double>& raw_density() { return raw_density_; }
  std::vector<double>& raw_color() { return raw_color_; }
  const std::vector<double>& raw_density() const { return raw_density_; }
  const std::vector<double>& raw_color() const { return raw_color_; }

  // One interpolated density lookup with everything backward needs.
  struct DensityTap {
    bool inside = false;
    double sigma = 0.0;
    double sp_deriv = 0.0;  // d sigma / d pre-activation
    uint32_t vidx[8];
    double w[8];
  };

  // Density plus color, for ray rendering.
  struct SampleTap : DensityTap {
    Vec3 color;
    Vec3 sig_deriv;  // d color / d pre-activation, per channel
  };

  DensityTap tap_density(const Vec3& p) const {
    DensityTap t;
    if (!locate(p, t)) return t;
    double pre = 0.0;
    for (int c = 0; c < 8; ++c) pre += t.w[c] * raw_density_[t.vidx[c]];
    t.sigma = softplus(pre);
    t.sp_deriv = softplus_deriv(pre);
    return t;
  }

  SampleTap tap(const Vec3& p) const {
    SampleTap t;
    if (!locate(p, t)) return t;
    double pre_d = 0.0, pre_c[3] = {0, 0, 0};
    for (int c = 0; c < 8; ++c) {
      double w = t.w[c];
      uint32_t v = t.vidx[c];
      pre_d += w * raw_density_[v];
      const double* col = &raw_color_[static_cast<std::size_t>(v) * 3];
      pre_c[0] += w * col[0];
      pre_c[1] += w * col[1];
      pre_c[2] += w * col[2];
    }
    t.sigma = softplus(pre_d);
    t.sp_deriv = softplus_deriv(pre_d);
    for (int c = 0; c < 3; ++c) {
      double s = sigmoid(pre_c[c]);
      t.color[c] = s;
      t.sig_deriv[c] = s * (1.0 - s);
    }
    return t;
  }

  FieldSample query(const Vec3& p) const {
    SampleTap t = tap(p);
    return {t.sigma, t.color};
  }

  // Accumulates d(loss)/d(raw params) for upstream d_sigma, d_color at p.
  void query_backward(const Vec3& p, double d_sigma, const Vec3& d_color,
                      GradientBuffer& grads) const {
    SampleTap t = tap(p);
    if (!t.inside) return;
    for (int c = 0; c < 8; ++c) {
      double w = t.w[c];
      uint32_t v = t.vidx[c];
      grads.d_density[v] += d_sigma * t.sp_deriv * w;
      double* g = &grads.d_color[static_cast<std::size_t>(v) * 3];
      g[0] += d_color[0] * t.sig_deriv[0] * w;
      g[1] += d_color[1] * t.sig_deriv[1] * w;
      g[2] += d_color[2] * t.sig_deriv[2] * w;
    }
  }

  // Overwrites raw parameters inside the ball so the activated density is
  // `sigma` and the activated color is `color` at the affected vertices.
  void inject_floater(const Vec3& center, double radius, double sigma, const Vec3& color);

  void save_checkpoint(const std::string& path) const;
  static VoxelRadianceField load_checkpoint(const std::string& path);

 private:
  bool locate(const Vec3& p, DensityTap& t) const {
    // Inclusive on both faces; the upper face lands in the last cell with
    // fraction 1.
    if (p.x < bounds_.lo.x || p.x > bounds_.hi.x || p.y < bounds_.lo.y || p.y > bounds_.hi.y ||
        p.z < bounds_.lo.z || p.z > bounds_.hi.z)
      return false;
    double gx = (p.x - bounds_.lo.x) * inv_h_.x;
    double gy = (p.y - bounds_.lo.y) * inv_h_.y;
    double gz = (p.z - bounds_.lo.z) * inv_h_.z;
    int i = std::min(static_cast<int>(gx), nx_ - 2);
    int j = std::min(static_cast<int>(gy), ny_ - 2);
    int k = std::min(static_cast<int>(gz), nz_ - 2);
    double fx = gx - i, fy = gy - j, fz = gz - k;
    uint32_t base = static_cast<uint32_t>((static_cast<std::size_t>(k) * ny_ + j) * nx_ + i);
    uint32_t sy = static_cast<uint32_t>(nx_);
    uint32_t sz = static_cast<uint32_t>(nx_) * static_cast<uint32_t>(ny_);
    t.vidx[0] = base;
    t.vidx[1] = base + 1;
    t.vidx[2] = base + sy;
    t.vidx[3] = base + sy + 1;
    t.vidx[4] = base + sz;
    t.vidx[5] = base + sz + 1;
    t.vidx[6] = base + sz + sy;
    t.vidx[7] = base + sz + sy + 1;
    double ux = 1.0 - fx, uy = 1.0 - fy, uz = 1.0 - fz;
    t.w[0] = ux * uy * uz;
    t.w[1] = fx * uy * uz;
    t.w[2] = ux * fy * uz;
    t.w[3] = fx * fy * uz;
    t.w[4] = ux * uy * fz;
    t.w[5] = fx * uy * fz;
    t.w[6] = ux * fy * fz;
    t.w[7] = fx * fy * fz;
    t.inside = true;
    return true;
  }

  int nx_, ny_, nz_;
  Aabb bounds_;
  Vec3 inv_h_;  // vertices per unit length on each axis
  std::vector<double> raw_density_;
  std::vector<double> raw_color_;
};

}  // namespace voxrf
