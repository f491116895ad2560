#include "voxrf/camera.hpp"

#include <cmath>

namespace voxrf {

void Camera::validate() const {
  if (width <= 0 || height <= 0) throw ValidationError("camera resolution must be positive");
  if (!(fx > 0) || !(fy > 0)) throw ValidationError("focal lengths must be positive");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
    throw ValidationError("principal point must lie inside the image");

  const Mat3& r = rotation;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double d = dot(r.col[i], r.col[j]) - (i == j ? 1.0 : 0.0);
      if (std::fabs(d) > 1e-6) throw ValidationError("camera rotation is not orthonormal");
    }
  if (std::fabs(determinant(r) - 1.0) > 1e-6)
    throw ValidationError("camera rotation must be right-handed (det = +1)");
  for (int i = 0; i < 3; ++i)
    if (!std::isfinite(position[i])) throw ValidationError("camera position must be finite");
}

Camera Camera::look_at(const Vec3& position, const Vec3& target, const Vec3& up, int width,
                       int height, double fov_y_deg) {
  Vec3 forward = normalized(target - position);
  Vec3 right = cross(forward, up);
  if (norm(right) < 1e-9) throw ValidationError("look_at: view direction parallel to up");
  right = normalized(right);
  Vec3 cam_up = cross(right, forward);

  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.rotation.col[0] = right;
  cam.rotation.col[1] = cam_up;
  cam.rotation.col[2] = -forward;  // camera looks down -z
  cam.position = position;
  double f = (height / 2.0) / std::tan(fov_y_deg * M_PI / 180.0 / 2.0);
  cam.fx = cam.fy = f;
  cam.cx = (width - 1) / 2.0;
  cam.cy = (height - 1) / 2.0;
  cam.validate();
  return cam;
}

}  // namespace voxrf
