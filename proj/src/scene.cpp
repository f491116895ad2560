#include "voxrf/scene.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace voxrf {
namespace {

constexpr double kHitEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

double intersect_sphere(const Ray& ray, const Vec3& center, double radius) {
  Vec3 oc = ray.origin - center;
  double b = dot(oc, ray.dir);
  double c = dot(oc, oc) - radius * radius;
  double disc = b * b - c;
  if (disc < 0) return kInf;
  double s = std::sqrt(disc);
  double t0 = -b - s, t1 = -b + s;
  if (t0 > kHitEps) return t0;
  if (t1 > kHitEps) return t1;
  return kInf;
}

double intersect_box(const Ray& ray, const Vec3& center, const Vec3& size) {
  Vec3 lo = center - size * 0.5, hi = center + size * 0.5;
  double tmin = -kInf, tmax = kInf;
  for (int a = 0; a < 3; ++a) {
    double o = ray.origin[a], d = ray.dir[a];
    if (d == 0.0) {
      if (o < lo[a] || o > hi[a]) return kInf;
      continue;
    }
    double t0 = (lo[a] - o) / d, t1 = (hi[a] - o) / d;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmin > tmax) return kInf;
  }
  if (tmin > kHitEps) return tmin;
  if (tmax > kHitEps) return tmax;
  return kInf;
}

void SyntheticScene::validate() const {
  bounds.validate();
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const Primitive& p = prims[i];
    Vec3 half = p.kind == Primitive::Kind::Sphere ? Vec3{p.radius, p.radius, p.radius}
                                                  : p.size * 0.5;
    if (p.kind == Primitive::Kind::Sphere && !(p.radius > 0))
      throw ValidationError("primitive " + std::to_string(i) + ": sphere radius must be positive");
    if (p.kind == Primitive::Kind::Box && !(p.size.x > 0 && p.size.y > 0 && p.size.z > 0))
      throw ValidationError("primitive " + std::to_string(i) + ": box size must be positive");
    for (int a = 0; a < 3; ++a) {
      if (p.center[a] - half[a] < bounds.lo[a] || p.center[a] + half[a] > bounds.hi[a])
        throw ValidationError("primitive " + std::to_string(i) + " extends outside the scene bounds");
      if (p.albedo[a] < 0 || p.albedo[a] > 1)
        throw ValidationError("primitive " + std::to_string(i) + ": albedo must be in [0,1]");
    }
  }
}

OracleHit SyntheticScene::trace(const Ray& ray, bool include_floaters) const {
  OracleHit best;
  best.color = background;
  for (std::size_t i = 0; i < prims.size(); ++i) {
    const Primitive& p = prims[i];
    if (p.floater && !include_floaters) continue;
    double t = p.kind == Primitive::Kind::Sphere ? intersect_sphere(ray, p.center, p.radius)
                                                 : intersect_box(ray, p.center, p.size);
    if (t < best.t) {
      best.hit = true;
      best.t = t;
      best.color = p.albedo;
      best.prim = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<int> SyntheticScene::visible_floaters(const std::vector<Camera>& cameras) const {
  std::set<int> seen;
  for (const Camera& cam : cameras) {
    for (int py = 0; py < cam.height; ++py)
      for (int px = 0; px < cam.width; ++px) {
        OracleHit h = trace(cam.generate_ray(px, py), true);
        if (h.hit && prims[h.prim].floater) seen.insert(h.prim);
      }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace voxrf
