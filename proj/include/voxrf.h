/* C interface to the voxel radiance field library.
 *
 * Every function returns a voxrf_status; on failure voxrf_last_error() holds
 * a message for the calling thread. Handles are opaque and must be released
 * with their destroy function. config_json takes the same flat JSON object
 * the CLI accepts (pass NULL or "" for defaults).
 */
#ifndef VOXRF_H
#define VOXRF_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum voxrf_status {
  VOXRF_OK = 0,
  VOXRF_E_INTERNAL = 1,
  VOXRF_E_VALIDATION = 2,
  VOXRF_E_DIVERGENCE = 3,
  VOXRF_E_IO = 4
} voxrf_status;

typedef struct voxrf_field voxrf_field;
typedef struct voxrf_dataset voxrf_dataset;

/* Message from the most recent failing call on this thread. Never NULL. */
const char* voxrf_last_error(void);

/* ---- field lifecycle ---- */

voxrf_status voxrf_field_create(int nx, int ny, int nz, const double lo[3], const double hi[3],
                                double initial_sigma, voxrf_field** out);
voxrf_status voxrf_field_load(const char* path, voxrf_field** out);
voxrf_status voxrf_field_save(const voxrf_field* field, const char* path);
void voxrf_field_destroy(voxrf_field* field);

voxrf_status voxrf_field_resolution(const voxrf_field* field, int* nx, int* ny, int* nz);
voxrf_status voxrf_field_bounds(const voxrf_field* field, double lo[3], double hi[3]);

/* Activated density and color at a world point (zeros outside the bounds). */
voxrf_status voxrf_field_query(const voxrf_field* field, const double point[3], double* sigma,
                               double rgb[3]);

voxrf_status voxrf_field_inject_floater(voxrf_field* field, const double center[3], double radius,
                                        double sigma, const double rgb[3]);

/* ---- datasets ---- */

voxrf_status voxrf_dataset_load(const char* dir, voxrf_dataset** out);
void voxrf_dataset_destroy(voxrf_dataset* dataset);
voxrf_status voxrf_dataset_frame_count(const voxrf_dataset* dataset, int* count);

/* ---- optimization on handles ---- */

/* Photometric training per config (steps, rays_per_step, lr, ...). */
voxrf_status voxrf_train(voxrf_field* field, const voxrf_dataset* dataset,
                         const char* config_json);

/* Post-hoc free-space cleanup per config (iterations, lambda, fsp_mode, ...). */
voxrf_status voxrf_cleanup(voxrf_field* field, const voxrf_dataset* dataset,
                           const char* config_json);

/* Renders one dataset frame. Buffers are row-major, color is w*h*3 floats,
 * depth and accum w*h floats; pass NULL to skip an output. */
voxrf_status voxrf_render_frame(const voxrf_field* field, const voxrf_dataset* dataset,
                                int frame_index, const char* config_json, float* color,
                                float* depth, float* accum);

/* ---- whole commands (what the CLI calls) ---- */

voxrf_status voxrf_cmd_make_scene(const char* scene_json, const char* cameras_json,
                                  const char* out_dir, const char* config_json);
voxrf_status voxrf_cmd_train(const char* dataset_dir, const char* out_dir,
                             const char* config_json);
voxrf_status voxrf_cmd_cleanup(const char* checkpoint, const char* dataset_dir,
                               const char* out_dir, const char* config_json);
voxrf_status voxrf_cmd_render(const char* checkpoint, const char* dataset_dir, const char* out_dir,
                              const char* config_json);
voxrf_status voxrf_cmd_eval(const char* checkpoint, const char* dataset_dir, const char* out_dir,
                            const char* config_json);
voxrf_status voxrf_cmd_analyze(const char* checkpoint, const char* dataset_dir,
                               const char* out_dir, const char* config_json);
voxrf_status voxrf_cmd_export_cloud(const char* checkpoint, const char* dataset_dir,
                                    const char* out_dir, const char* config_json);

#ifdef __cplusplus
}
#endif

#endif /* VOXRF_H */
