/*
 * C API of the radelft shared library.
 *
 * All functions return rd_status; RD_OK is 0. On failure rd_last_error()
 * returns a thread-local message describing the most recent error on the
 * calling thread. Objects are opaque handles created and destroyed through
 * this interface; passing NULL where a handle is required yields
 * RD_ERR_INVALID_ARGUMENT.
 *
 * The RADELFT_THREADS environment variable caps internal parallelism.
 */

#ifndef RADELFT_C_API_H
#define RADELFT_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rd_status {
  RD_OK = 0,
  RD_ERR_INVALID_ARGUMENT = 1,
  RD_ERR_CONFIG = 2,
  RD_ERR_IO = 3,
  RD_ERR_FORMAT = 4,
  RD_ERR_SHAPE_MISMATCH = 5,
  RD_ERR_EMPTY_SET = 6,
  RD_ERR_UNSUPPORTED_GEOMETRY = 7,
  RD_ERR_NUMERIC = 8,
  RD_ERR_INTERNAL = 9
} rd_status;

/* Ablation switch bits accepted by rd_cmd_process / rd_cmd_train. */
enum {
  RD_ABL_NO_DOPPLER = 1u << 0,
  RD_ABL_QUANTILE = 1u << 1,
  RD_ABL_NO_TIME = 1u << 2,
  RD_ABL_NO_ELEVATION = 1u << 3
};

uint32_t rd_abi_version(void);
const char* rd_status_name(rd_status status);
const char* rd_last_error(void);

typedef struct rd_config_s rd_config;
typedef struct rd_scene_s rd_scene;
typedef struct rd_pointcloud_s rd_pointcloud;

/* ---- configuration ---- */

rd_status rd_config_default(rd_config** out);
rd_status rd_config_load(const char* path, rd_config** out);
rd_status rd_config_save(const rd_config* config, const char* path);
void rd_config_free(rd_config* config);

typedef struct rd_derived_s {
  double range_res_m;
  double r_max_m;
  double v_max_mps;
  double v_res_mps;
  double pri_s;
} rd_derived;

rd_status rd_config_derived(const rd_config* config, rd_derived* out);

/* ---- scenes ---- */

rd_status rd_scene_load(const char* path, rd_scene** out);
void rd_scene_free(rd_scene* scene);

/* ---- pipeline commands (mirrored by the CLI subcommands) ---- */

/* seed == 0 keeps the scene's own rng_seed. */
rd_status rd_cmd_simulate(const rd_config* config, const rd_scene* scene, const char* out_dir,
                          uint64_t seed);
rd_status rd_cmd_process(const rd_config* config, const char* sim_dir, const char* out_dir,
                         uint32_t ablations);
rd_status rd_cmd_detect_cfar(const rd_config* config, const char* cube_dir, const char* out_dir);
rd_status rd_cmd_train(const rd_config* config, const char* const* data_dirs, size_t n_dirs,
                       const char* checkpoint_path, uint64_t seed, uint32_t ablations);
/* threshold < 0 uses the checkpoint's probability threshold. */
rd_status rd_cmd_detect_nn(const rd_config* config, const char* checkpoint_path,
                           const char* cube_dir, const char* out_dir, double threshold);
rd_status rd_cmd_evaluate(const rd_config* config, const char* pred_dir, const char* gt_dir,
                          const char* out_dir);
/* input: occupancy .rdlc (grid_json may be NULL to use a sibling grid.json)
 * or a .ply/.csv cloud; format: "ply" or "csv". */
rd_status rd_cmd_export(const char* input_path, const char* grid_json_path, const char* format,
                        const char* output_path);

/* ---- point clouds and metrics ---- */

rd_status rd_pointcloud_load(const char* path, rd_pointcloud** out); /* .ply or .csv */
rd_status rd_pointcloud_save(const rd_pointcloud* cloud, const char* path);
rd_status rd_pointcloud_size(const rd_pointcloud* cloud, size_t* out);
void rd_pointcloud_free(rd_pointcloud* cloud);

rd_status rd_chamfer_distance(const rd_pointcloud* a, const rd_pointcloud* b, double* out_m);

#ifdef __cplusplus
}
#endif

#endif /* RADELFT_C_API_H */
