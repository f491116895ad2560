#include "voxrf/dataset.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

namespace voxrf {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ValidationError(std::string(what) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out) throw IoError("short write on " + path);
}

json camera_to_json(const Camera& cam) {
  json pose = json::array();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double v;
      if (r == 3)
        v = c == 3 ? 1.0 : 0.0;
      else if (c == 3)
        v = cam.position[r];
      else
        v = cam.rotation.col[c][r];
      pose.push_back(v);
    }
  return {{"width", cam.width},   {"height", cam.height}, {"fx", cam.fx},
          {"fy", cam.fy},         {"cx", cam.cx},         {"cy", cam.cy},
          {"camera_to_world", pose}};
}

Camera camera_from_json(const json& j, const std::string& ctx) {
  Camera cam;
  try {
    cam.width = j.at("width").get<int>();
    cam.height = j.at("height").get<int>();
    cam.fx = j.at("fx").get<double>();
    cam.fy = j.at("fy").get<double>();
    cam.cx = j.at("cx").get<double>();
    cam.cy = j.at("cy").get<double>();
    const json& pose = j.at("camera_to_world");
    if (!pose.is_array() || pose.size() != 16)
      throw ValidationError(ctx + ": camera_to_world must hold 16 numbers, row-major");
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) cam.rotation.col[c][r] = pose[r * 4 + c].get<double>();
      cam.position[r] = pose[r * 4 + 3].get<double>();
    }
    for (int c = 0; c < 4; ++c) {
      double expect = c == 3 ? 1.0 : 0.0;
      if (std::fabs(pose[12 + c].get<double>() - expect) > 1e-9)
        throw ValidationError(ctx + ": camera_to_world bottom row must be 0 0 0 1");
    }
  } catch (const json::exception& e) {
    throw ValidationError(ctx + ": " + e.what());
  }
  try {
    cam.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(ctx + ": " + e.what());
  }
  return cam;
}

}  // namespace

std::vector<Camera> make_orbit_cameras(int count, double radius, double elevation_deg,
                                       double azimuth_offset_deg, const Vec3& look_at,
                                       const Vec3& up, int width, int height, double fov_y_deg) {
  if (count <= 0) throw ValidationError("orbit camera count must be positive");
  if (!(radius > 0)) throw ValidationError("orbit radius must be positive");
  std::vector<Camera> cams;
  double el = elevation_deg * M_PI / 180.0;
  for (int i = 0; i < count; ++i) {
    double az = (azimuth_offset_deg + 360.0 * i / count) * M_PI / 180.0;
    Vec3 pos = look_at + radius * Vec3{std::cos(el) * std::sin(az), std::sin(el),
                                       std::cos(el) * std::cos(az)};
    cams.push_back(Camera::look_at(pos, look_at, up, width, height, fov_y_deg));
  }
  return cams;
}

Dataset render_dataset(const SyntheticScene& scene, const std::vector<Camera>& cameras,
                       const std::vector<Split>& splits) {
  if (cameras.size() != splits.size())
    throw ValidationError("render_dataset: one split per camera required");
  scene.validate();
  Dataset ds;
  ds.bounds = scene.bounds;
  ds.background = scene.background;
  int per_split[2] = {0, 0};
  for (std::size_t i = 0; i < cameras.size(); ++i) {
    Frame f;
    f.camera = cameras[i];
    f.camera.validate();
    f.split = splits[i];
    f.image = Image(f.camera.width, f.camera.height, 3);
    f.depth = Image(f.camera.width, f.camera.height, 1);
    for (int py = 0; py < f.camera.height; ++py)
      for (int px = 0; px < f.camera.width; ++px) {
        OracleHit h = scene.trace(f.camera.generate_ray(px, py));
        for (int c = 0; c < 3; ++c) f.image.at(px, py, c) = static_cast<float>(h.color[c]);
        f.depth.at(px, py, 0) = static_cast<float>(h.t);  // +inf on miss
      }
    int& n = per_split[f.split == Split::Train ? 0 : 1];
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03d", split_name(f.split), n++);
    f.image_path = std::string("images/") + buf + ".png";
    f.depth_path = std::string("depths/") + buf + ".pfm";
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

void save_dataset(const Dataset& dataset, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(fs::path(dir) / "images", ec);
  fs::create_directories(fs::path(dir) / "depths", ec);
  if (ec) throw IoError("cannot create dataset directories under " + dir);

  json frames = json::array();
  for (const Frame& f : dataset.frames) {
    if (f.image_path.empty()) throw ValidationError("frame has no image path");
    write_png((fs::path(dir) / f.image_path).string(), f.image);
    json jf = camera_to_json(f.camera);
    jf["split"] = split_name(f.split);
    jf["image"] = f.image_path;
    if (f.depth.width > 0) {
      write_pfm((fs::path(dir) / f.depth_path).string(), f.depth);
      jf["depth"] = f.depth_path;
    }
    frames.push_back(std::move(jf));
  }
  json root = {{"background", vec3_to_json(dataset.background)},
               {"bounds", {{"lo", vec3_to_json(dataset.bounds.lo)}, {"hi", vec3_to_json(dataset.bounds.hi)}}},
               {"frames", frames}};
  write_json_file(root, (fs::path(dir) / "dataset.json").string());
}

Dataset load_dataset(const std::string& dir) {
  fs::path root = dir;
  if (fs::is_regular_file(root)) root = root.parent_path();
  std::string manifest = (root / "dataset.json").string();
  json j = load_json_file(manifest);

  Dataset ds;
  try {
    ds.background = vec3_from_json(j.at("background"), "background");
    ds.bounds.lo = vec3_from_json(j.at("bounds").at("lo"), "bounds.lo");
    ds.bounds.hi = vec3_from_json(j.at("bounds").at("hi"), "bounds.hi");
    ds.bounds.validate();
    const json& frames = j.at("frames");
    if (!frames.is_array() || frames.empty())
      throw ValidationError("manifest must list at least one frame");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      std::string ctx = manifest + ": frame " + std::to_string(i);
      const json& jf = frames[i];
      Frame f;
      f.camera = camera_from_json(jf, ctx);
      std::string split = jf.at("split").get<std::string>();
      if (split == "train")
        f.split = Split::Train;
      else if (split == "eval")
        f.split = Split::Eval;
      else
        throw ValidationError(ctx + ": unknown split '" + split + "'");
      f.image_path = jf.at("image").get<std::string>();
      f.image = read_png((root / f.image_path).string());
      if (f.image.width != f.camera.width || f.image.height != f.camera.height)
        throw ValidationError(ctx + ": image size does not match the camera");
      if (jf.contains("depth")) {
        f.depth_path = jf.at("depth").get<std::string>();
        f.depth = read_pfm((root / f.depth_path).string());
        if (f.depth.width != f.camera.width || f.depth.height != f.camera.height ||
            f.depth.channels != 1)
          throw ValidationError(ctx + ": depth map size does not match the camera");
      }
      ds.frames.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    throw ValidationError(manifest + ": " + e.what());
  }
  return ds;
}

SyntheticScene load_scene(const std::string& path) {
  json j = load_json_file(path);
  SyntheticScene scene;
  try {
    scene.bounds.lo = vec3_from_json(j.at("bounds").at("lo"), "bounds.lo");
    scene.bounds.hi = vec3_from_json(j.at("bounds").at("hi"), "bounds.hi");
    if (j.contains("background")) scene.background = vec3_from_json(j["background"], "background");
    for (const json& jp : j.at("primitives")) {
      Primitive p;
      std::string kind = jp.at("kind").get<std::string>();
      if (kind == "sphere") {
        p.kind = Primitive::Kind::Sphere;
        p.radius = jp.at("radius").get<double>();
      } else if (kind == "box") {
        p.kind = Primitive::Kind::Box;
        p.size = vec3_from_json(jp.at("size"), "size");
      } else {
        throw ValidationError(path + ": unknown primitive kind '" + kind + "'");
      }
      p.center = vec3_from_json(jp.at("center"), "center");
      p.albedo = vec3_from_json(jp.at("albedo"), "albedo");
      p.floater = jp.value("floater", false);
      p.density = jp.value("density", 6.0);
      scene.prims.push_back(p);
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  scene.validate();
  return scene;
}

void save_scene(const SyntheticScene& scene, const std::string& path) {
  json prims = json::array();
  for (const Primitive& p : scene.prims) {
    json jp = {{"kind", p.kind == Primitive::Kind::Sphere ? "sphere" : "box"},
               {"center", vec3_to_json(p.center)},
               {"albedo", vec3_to_json(p.albedo)},
               {"floater", p.floater},
               {"density", p.density}};
    if (p.kind == Primitive::Kind::Sphere)
      jp["radius"] = p.radius;
    else
      jp["size"] = vec3_to_json(p.size);
    prims.push_back(std::move(jp));
  }
  json root = {{"bounds", {{"lo", vec3_to_json(scene.bounds.lo)}, {"hi", vec3_to_json(scene.bounds.hi)}}},
               {"background", vec3_to_json(scene.background)},
               {"primitives", prims}};
  write_json_file(root, path);
}

void load_camera_rig(const std::string& path, std::vector<Camera>& cameras,
                     std::vector<Split>& splits) {
  json j = load_json_file(path);
  cameras.clear();
  splits.clear();
  try {
    int width = j.at("width").get<int>();
    int height = j.at("height").get<int>();
    double fov = j.at("fov_deg").get<double>();
    Vec3 look_at = j.contains("look_at") ? vec3_from_json(j["look_at"], "look_at") : Vec3{0, 0, 0};
    Vec3 up = j.contains("up") ? vec3_from_json(j["up"], "up") : Vec3{0, 1, 0};
    for (const json& ring : j.at("rigs")) {
      std::string split = ring.at("split").get<std::string>();
      if (split != "train" && split != "eval")
        throw ValidationError(path + ": rig split must be 'train' or 'eval'");
      auto cams = make_orbit_cameras(ring.at("count").get<int>(), ring.at("radius").get<double>(),
                                     ring.at("elevation_deg").get<double>(),
                                     ring.value("azimuth_offset_deg", 0.0), look_at, up, width,
                                     height, fov);
      for (Camera& c : cams) {
        cameras.push_back(c);
        splits.push_back(split == "train" ? Split::Train : Split::Eval);
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (cameras.empty()) throw ValidationError(path + ": rig produced no cameras");
}

}  // namespace voxrf
