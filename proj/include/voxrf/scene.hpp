#pragma once

#include <limits>
#include <vector>

#include "voxrf/camera.hpp"
#include "voxrf/common.hpp"

namespace voxrf {

struct Primitive {
  enum class Kind { Sphere, Box };
  Kind kind = Kind::Sphere;
  Vec3 center;
  double radius = 0;  // spheres
  Vec3 size;          // boxes, full edge lengths
  Vec3 albedo{0.5, 0.5, 0.5};
  bool floater = false;  // excluded from the reference geometry
  double density = 6.0;  // activated density a floater gets when injected
};

struct OracleHit {
  bool hit = false;
  double t = std::numeric_limits<double>::infinity();
  Vec3 color;  // albedo of the hit primitive, else background
  int prim = -1;
};

// Closest intersection with t > eps; returns infinity on miss. A ray starting
// inside hits at its exit. Slab comparisons are inclusive, so rays grazing a
// face or edge count as hits.
double intersect_sphere(const Ray& ray, const Vec3& center, double radius);
double intersect_box(const Ray& ray, const Vec3& center, const Vec3& size);

// Analytic reference scene. Primitives are Lambertian-free flat albedo; the
// first surface along a ray wins (ties go to the lower primitive index).
struct SyntheticScene {
  Aabb bounds{{-1, -1, -1}, {1, 1, 1}};
  Vec3 background{0, 0, 0};
  std::vector<Primitive> prims;

  void validate() const;

  // Floaters are skipped unless asked for: the oracle describes the scene as
  // it should look, floaters exist only to corrupt reconstructions.
  OracleHit trace(const Ray& ray, bool include_floaters = false) const;

  // Indices of floater primitives visible from any pixel of any camera.
  std::vector<int> visible_floaters(const std::vector<Camera>& cameras) const;
};

}  // namespace voxrf
