#pragma once

#include "voxrf/common.hpp"
#include "voxrf/rng.hpp"

namespace voxrf {

struct Ray {
  Vec3 origin;
  Vec3 dir;  // unit length
};

// Pinhole camera. The camera frame is right-handed and looks down its -z
// axis with image y growing downward. cx, cy are pixel-index coordinates of
// the principal point: the ray for integer pixel (px, py) passes through that
// pixel's center, so pixel (cx, cy) maps to the optical axis exactly.
struct Camera {
  int width = 0, height = 0;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  Mat3 rotation;  // camera-to-world, columns are the camera axes in world space
  Vec3 position;

  void validate() const;

  // px, py may carry sub-pixel offsets (jittered sampling).
  Ray generate_ray(double px, double py) const {
    Vec3 d_cam{(px - cx) / fx, -(py - cy) / fy, -1.0};
    return {position, normalized(rotation * d_cam)};
  }

  Ray generate_ray_jittered(int px, int py, Rng& rng) const {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double() - 0.5;
    return generate_ray(px + u, py + v);
  }

  // World point to continuous pixel coordinates. Returns false when the
  // point lies on or behind the image plane.
  bool project(const Vec3& p, double& px, double& py) const {
    Vec3 c = rotation.transposed() * (p - position);
    if (c.z >= -1e-12) return false;
    px = cx + fx * (c.x / -c.z);
    py = cy - fy * (c.y / -c.z);
    return true;
  }

  // Camera placed at `position` looking toward `target`, world `up` fixing roll.
  static Camera look_at(const Vec3& position, const Vec3& target, const Vec3& up, int width,
                        int height, double fov_y_deg);
};

}  // namespace voxrf
