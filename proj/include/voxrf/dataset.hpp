#pragma once

#include <optional>
#include <string>
#include <vector>

#include "voxrf/camera.hpp"
#include "voxrf/image.hpp"
#include "voxrf/scene.hpp"

namespace voxrf {

enum class Split { Train, Eval };

inline const char* split_name(Split s) { return s == Split::Train ? "train" : "eval"; }

struct Frame {
  Camera camera;
  Split split = Split::Train;
  Image image;          // RGB in [0,1]
  Image depth;          // single channel, +inf where the oracle missed; may be empty
  std::string image_path, depth_path;  // relative to the manifest
};

struct Dataset {
  Aabb bounds{{-1, -1, -1}, {1, 1, 1}};
  Vec3 background{0, 0, 0};
  std::vector<Frame> frames;

  std::vector<int> split_indices(Split s) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < frames.size(); ++i)
      if (frames[i].split == s) out.push_back(static_cast<int>(i));
    return out;
  }
};

// Cameras on a circle around `look_at`, evenly spaced in azimuth.
std::vector<Camera> make_orbit_cameras(int count, double radius, double elevation_deg,
                                       double azimuth_offset_deg, const Vec3& look_at,
                                       const Vec3& up, int width, int height, double fov_y_deg);

// Renders ground-truth color and depth for every camera with the analytic
// oracle (floaters excluded).
Dataset render_dataset(const SyntheticScene& scene, const std::vector<Camera>& cameras,
                       const std::vector<Split>& splits);

// dataset.json manifest plus images/ (PNG) and depths/ (PFM) side by side.
void save_dataset(const Dataset& dataset, const std::string& dir);
Dataset load_dataset(const std::string& dir);

// Scene description JSON: bounds, background, primitive list.
SyntheticScene load_scene(const std::string& path);
void save_scene(const SyntheticScene& scene, const std::string& path);

// Camera rig JSON: image size, fov, and one or more orbit rings tagged with
// their split. Returns cameras and matching splits.
void load_camera_rig(const std::string& path, std::vector<Camera>& cameras,
                     std::vector<Split>& splits);

}  // namespace voxrf
