/* Exercises the shared library through the C surface only. */
#include <voxrf.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

static int failures = 0;

#define EXPECT(cond)                                                       \
  do {                                                                     \
    if (!(cond)) {                                                         \
      std::printf("FAIL %s:%d: %s\n", __FILE__, __LINE__, #cond);          \
      std::printf("     last_error: %s\n", voxrf_last_error());            \
      ++failures;                                                          \
    }                                                                      \
  } while (0)

static void write_file(const fs::path& p, const char* text) {
  std::ofstream out(p);
  out << text;
}

int main() {
  fs::path dir = fs::temp_directory_path() / "voxrf_capi_test";
  fs::remove_all(dir);
  fs::create_directories(dir);

  /* ---- argument and error-code basics ---- */
  EXPECT(std::strcmp(voxrf_last_error(), "") == 0 || voxrf_last_error() != nullptr);
  EXPECT(voxrf_field_create(4, 4, 4, nullptr, nullptr, 0.1, nullptr) == VOXRF_E_VALIDATION);
  EXPECT(std::strlen(voxrf_last_error()) > 0);

  double lo[3] = {-1, -1, -1}, hi[3] = {1, 1, 1};
  voxrf_field* field = nullptr;
  EXPECT(voxrf_field_create(1, 4, 4, lo, hi, 0.1, &field) == VOXRF_E_VALIDATION);
  EXPECT(field == nullptr);
  EXPECT(voxrf_field_create(8, 8, 8, lo, hi, 0.1, &field) == VOXRF_OK);
  EXPECT(field != nullptr);

  /* ---- queries ---- */
  int nx = 0, ny = 0, nz = 0;
  EXPECT(voxrf_field_resolution(field, &nx, &ny, &nz) == VOXRF_OK);
  EXPECT(nx == 8 && ny == 8 && nz == 8);
  double blo[3], bhi[3];
  EXPECT(voxrf_field_bounds(field, blo, bhi) == VOXRF_OK);
  EXPECT(blo[0] == -1 && bhi[2] == 1);

  double point[3] = {0.1, -0.2, 0.3};
  double sigma = -1, rgb[3];
  EXPECT(voxrf_field_query(field, point, &sigma, rgb) == VOXRF_OK);
  EXPECT(std::fabs(sigma - 0.1) < 1e-9);
  EXPECT(std::fabs(rgb[0] - 0.5) < 1e-9);
  double outside[3] = {5, 5, 5};
  EXPECT(voxrf_field_query(field, outside, &sigma, rgb) == VOXRF_OK);
  EXPECT(sigma == 0.0);

  /* ---- floater injection ---- */
  double center[3] = {0, 0, 0};
  double white[3] = {0.9, 0.9, 0.9};
  EXPECT(voxrf_field_inject_floater(field, center, 0.4, 6.0, white) == VOXRF_OK);
  EXPECT(voxrf_field_query(field, center, &sigma, rgb) == VOXRF_OK);
  EXPECT(std::fabs(sigma - 6.0) < 1e-6);
  EXPECT(voxrf_field_inject_floater(field, center, -1.0, 6.0, white) == VOXRF_E_VALIDATION);

  /* ---- checkpoint round trip through the C surface ---- */
  std::string ckpt = (dir / "field.ckpt").string();
  EXPECT(voxrf_field_save(field, ckpt.c_str()) == VOXRF_OK);
  voxrf_field* loaded = nullptr;
  EXPECT(voxrf_field_load(ckpt.c_str(), &loaded) == VOXRF_OK);
  double sigma2;
  EXPECT(voxrf_field_query(loaded, center, &sigma2, rgb) == VOXRF_OK);
  EXPECT(std::fabs(sigma2 - sigma) < 1e-6);
  voxrf_field_destroy(loaded);
  loaded = nullptr;
  EXPECT(voxrf_field_load((dir / "missing.ckpt").string().c_str(), &loaded) == VOXRF_E_IO);
  voxrf_field_destroy(field);

  /* ---- a small end-to-end flow over the command layer ---- */
  write_file(dir / "scene.json", R"({
    "bounds": {"lo": [-1, -1, -1], "hi": [1, 1, 1]},
    "background": [0, 0, 0],
    "primitives": [
      {"kind": "sphere", "center": [0, 0, 0], "radius": 0.45,
       "albedo": [0.85, 0.3, 0.2]}
    ]
  })");
  write_file(dir / "cameras.json", R"({
    "width": 12, "height": 12, "fov_deg": 45, "look_at": [0, 0, 0], "up": [0, 1, 0],
    "rigs": [
      {"split": "train", "count": 3, "radius": 2.2, "elevation_deg": 20},
      {"split": "eval", "count": 1, "radius": 2.2, "elevation_deg": -10}
    ]
  })");
  std::string ds_dir = (dir / "ds").string();
  EXPECT(voxrf_cmd_make_scene((dir / "scene.json").string().c_str(),
                              (dir / "cameras.json").string().c_str(), ds_dir.c_str(),
                              nullptr) == VOXRF_OK);
  EXPECT(fs::exists(dir / "ds" / "dataset.json"));
  EXPECT(fs::exists(dir / "ds" / "scene.json"));

  voxrf_dataset* ds = nullptr;
  EXPECT(voxrf_dataset_load(ds_dir.c_str(), &ds) == VOXRF_OK);
  int frames = 0;
  EXPECT(voxrf_dataset_frame_count(ds, &frames) == VOXRF_OK);
  EXPECT(frames == 4);
  EXPECT(voxrf_dataset_load((dir / "nowhere").string().c_str(), &ds) == VOXRF_E_IO);

  EXPECT(voxrf_dataset_load(ds_dir.c_str(), &ds) == VOXRF_OK);
  voxrf_field* trained = nullptr;
  EXPECT(voxrf_field_create(8, 8, 8, lo, hi, 0.1, &trained) == VOXRF_OK);
  EXPECT(voxrf_train(trained, ds,
                     "{\"steps\": 4, \"rays_per_step\": 32, \"samples_per_ray\": 16}") ==
         VOXRF_OK);
  EXPECT(voxrf_train(trained, ds, "{\"steps\": -3}") == VOXRF_E_VALIDATION);
  EXPECT(voxrf_train(trained, ds, "{\"bogus_key\": 1}") == VOXRF_E_VALIDATION);
  EXPECT(voxrf_train(trained, ds, "not json at all") == VOXRF_E_VALIDATION);

  /* render one frame into caller buffers */
  std::vector<float> color(12 * 12 * 3, -1.0f), depth(12 * 12, -1.0f), accum(12 * 12, -1.0f);
  EXPECT(voxrf_render_frame(trained, ds, 0, "{\"samples_per_ray\": 32}", color.data(),
                            depth.data(), accum.data()) == VOXRF_OK);
  bool any_color = false;
  for (float v : color) {
    EXPECT(v >= 0.0f && v <= 1.0f);
    any_color |= v > 0.0f;
    if (!(v >= 0.0f && v <= 1.0f)) break;
  }
  EXPECT(any_color);
  EXPECT(voxrf_render_frame(trained, ds, 99, nullptr, color.data(), nullptr, nullptr) ==
         VOXRF_E_VALIDATION);
  /* NULL outputs are allowed */
  EXPECT(voxrf_render_frame(trained, ds, 1, nullptr, nullptr, nullptr, accum.data()) == VOXRF_OK);

  EXPECT(voxrf_cleanup(trained, ds,
                       "{\"iterations\": 2, \"lambda\": 0.1, \"fsp_points\": 256, "
                       "\"rays_per_step\": 16, \"samples_per_ray\": 8}") == VOXRF_OK);
  EXPECT(voxrf_cleanup(trained, ds, "{\"fsp_mode\": \"nonsense\"}") == VOXRF_E_VALIDATION);

  voxrf_field_destroy(trained);
  voxrf_dataset_destroy(ds);

  /* null handles are validation errors, not crashes */
  EXPECT(voxrf_train(nullptr, nullptr, nullptr) == VOXRF_E_VALIDATION);
  EXPECT(voxrf_field_save(nullptr, "x") == VOXRF_E_VALIDATION);
  EXPECT(voxrf_dataset_frame_count(nullptr, &frames) == VOXRF_E_VALIDATION);

  fs::remove_all(dir);
  if (failures == 0) {
    std::printf("test_capi: all checks passed\n");
    return 0;
  }
  std::printf("test_capi: %d failing checks\n", failures);
  return 1;
}
