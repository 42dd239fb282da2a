#include "radelft/radelft.h"

#include <fstream>
#include <string>
#include <vector>

#include "radelft/commands.hpp"
#include "radelft/config.hpp"
#include "radelft/errors.hpp"
#include "radelft/eval.hpp"
#include "radelft/io.hpp"
#include "radelft/scene.hpp"

struct rd_config_s {
  radelft::ConfigBundle bundle;
};

struct rd_scene_s {
  radelft::Scene scene;
};

struct rd_pointcloud_s {
  radelft::PointCloud cloud;
};

namespace {

thread_local std::string g_last_error;

rd_status statusOf(radelft::ErrorCode code) {
  using radelft::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument: return RD_ERR_INVALID_ARGUMENT;
    case ErrorCode::Config: return RD_ERR_CONFIG;
    case ErrorCode::Io: return RD_ERR_IO;
    case ErrorCode::Format: return RD_ERR_FORMAT;
    case ErrorCode::ShapeMismatch: return RD_ERR_SHAPE_MISMATCH;
    case ErrorCode::EmptySet: return RD_ERR_EMPTY_SET;
    case ErrorCode::UnsupportedGeometry: return RD_ERR_UNSUPPORTED_GEOMETRY;
    case ErrorCode::Numeric: return RD_ERR_NUMERIC;
    case ErrorCode::Internal: return RD_ERR_INTERNAL;
  }
  return RD_ERR_INTERNAL;
}

template <typename Fn>
rd_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return RD_OK;
  } catch (const radelft::Error& e) {
    g_last_error = e.what();
    return statusOf(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return RD_ERR_INTERNAL;
  }
}

rd_status requireArgs(std::initializer_list<const void*> args) {
  for (const void* a : args)
    if (a == nullptr) {
      g_last_error = "null argument";
      return RD_ERR_INVALID_ARGUMENT;
    }
  return RD_OK;
}

radelft::nn::Ablations ablationsOf(uint32_t mask) {
  radelft::nn::Ablations a;
  a.no_doppler = mask & RD_ABL_NO_DOPPLER;
  a.quantile_prefilter = mask & RD_ABL_QUANTILE;
  a.no_time = mask & RD_ABL_NO_TIME;
  a.no_elevation = mask & RD_ABL_NO_ELEVATION;
  return a;
}

}  // namespace

extern "C" {

uint32_t rd_abi_version(void) { return 1; }

const char* rd_status_name(rd_status status) {
  switch (status) {
    case RD_OK: return "ok";
    case RD_ERR_INVALID_ARGUMENT: return "invalid argument";
    case RD_ERR_CONFIG: return "configuration error";
    case RD_ERR_IO: return "I/O error";
    case RD_ERR_FORMAT: return "format error";
    case RD_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case RD_ERR_EMPTY_SET: return "empty set";
    case RD_ERR_UNSUPPORTED_GEOMETRY: return "unsupported geometry";
    case RD_ERR_NUMERIC: return "numeric error";
    case RD_ERR_INTERNAL: return "internal error";
  }
  return "unknown";
}

const char* rd_last_error(void) { return g_last_error.c_str(); }

rd_status rd_config_default(rd_config** out) {
  if (rd_status s = requireArgs({out}); s != RD_OK) return s;
  return guarded([&] { *out = new rd_config_s{radelft::ConfigBundle::deskDefault()}; });
}

rd_status rd_config_load(const char* path, rd_config** out) {
  if (rd_status s = requireArgs({path, out}); s != RD_OK) return s;
  return guarded([&] { *out = new rd_config_s{radelft::ConfigBundle::fromJsonFile(path)}; });
}

rd_status rd_config_save(const rd_config* config, const char* path) {
  if (rd_status s = requireArgs({config, path}); s != RD_OK) return s;
  return guarded([&] {
    std::ofstream out(path);
    if (!out) radelft::throwError(radelft::ErrorCode::Io, std::string("cannot open ") + path);
    out << config->bundle.toJsonText() << '\n';
  });
}

void rd_config_free(rd_config* config) { delete config; }

rd_status rd_config_derived(const rd_config* config, rd_derived* out) {
  if (rd_status s = requireArgs({config, out}); s != RD_OK) return s;
  return guarded([&] {
    const auto d = radelft::derivedQuantities(config->bundle.waveform);
    out->range_res_m = d.range_res_m;
    out->r_max_m = d.r_max_m;
    out->v_max_mps = d.v_max_mps;
    out->v_res_mps = d.v_res_mps;
    out->pri_s = d.pri_s;
  });
}

rd_status rd_scene_load(const char* path, rd_scene** out) {
  if (rd_status s = requireArgs({path, out}); s != RD_OK) return s;
  return guarded([&] { *out = new rd_scene_s{radelft::Scene::fromJsonFile(path)}; });
}

void rd_scene_free(rd_scene* scene) { delete scene; }

rd_status rd_cmd_simulate(const rd_config* config, const rd_scene* scene, const char* out_dir,
                          uint64_t seed) {
  if (rd_status s = requireArgs({config, scene, out_dir}); s != RD_OK) return s;
  return guarded(
      [&] { radelft::cmd::simulate(config->bundle, scene->scene, out_dir, seed); });
}

rd_status rd_cmd_process(const rd_config* config, const char* sim_dir, const char* out_dir,
                         uint32_t ablations) {
  if (rd_status s = requireArgs({config, sim_dir, out_dir}); s != RD_OK) return s;
  return guarded(
      [&] { radelft::cmd::process(config->bundle, sim_dir, out_dir, ablationsOf(ablations)); });
}

rd_status rd_cmd_detect_cfar(const rd_config* config, const char* cube_dir, const char* out_dir) {
  if (rd_status s = requireArgs({config, cube_dir, out_dir}); s != RD_OK) return s;
  return guarded([&] { radelft::cmd::detectCfar(config->bundle, cube_dir, out_dir); });
}

rd_status rd_cmd_train(const rd_config* config, const char* const* data_dirs, size_t n_dirs,
                       const char* checkpoint_path, uint64_t seed, uint32_t ablations) {
  if (rd_status s = requireArgs({config, data_dirs, checkpoint_path}); s != RD_OK) return s;
  return guarded([&] {
    std::vector<std::string> dirs;
    for (size_t i = 0; i < n_dirs; ++i) {
      if (!data_dirs[i])
        radelft::throwError(radelft::ErrorCode::InvalidArgument, "null data directory");
      dirs.emplace_back(data_dirs[i]);
    }
    radelft::cmd::train(config->bundle, dirs, checkpoint_path, seed, ablationsOf(ablations));
  });
}

rd_status rd_cmd_detect_nn(const rd_config* config, const char* checkpoint_path,
                           const char* cube_dir, const char* out_dir, double threshold) {
  if (rd_status s = requireArgs({config, checkpoint_path, cube_dir, out_dir}); s != RD_OK)
    return s;
  return guarded([&] {
    radelft::cmd::detectNn(config->bundle, checkpoint_path, cube_dir, out_dir, threshold);
  });
}

rd_status rd_cmd_evaluate(const rd_config* config, const char* pred_dir, const char* gt_dir,
                          const char* out_dir) {
  if (rd_status s = requireArgs({config, pred_dir, gt_dir, out_dir}); s != RD_OK) return s;
  return guarded([&] { radelft::cmd::evaluate(config->bundle, pred_dir, gt_dir, out_dir); });
}

rd_status rd_cmd_export(const char* input_path, const char* grid_json_path, const char* format,
                        const char* output_path) {
  if (rd_status s = requireArgs({input_path, format, output_path}); s != RD_OK) return s;
  return guarded([&] {
    radelft::cmd::exportFile(input_path, grid_json_path ? grid_json_path : "", format,
                             output_path);
  });
}

rd_status rd_pointcloud_load(const char* path, rd_pointcloud** out) {
  if (rd_status s = requireArgs({path, out}); s != RD_OK) return s;
  return guarded([&] {
    const std::string p(path);
    radelft::PointCloud pc;
    if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".ply") == 0)
      pc = radelft::io::readPly(p);
    else if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0)
      pc = radelft::io::readCsv(p);
    else
      radelft::throwError(radelft::ErrorCode::InvalidArgument,
                          "point cloud path must end in .ply or .csv");
    *out = new rd_pointcloud_s{std::move(pc)};
  });
}

rd_status rd_pointcloud_save(const rd_pointcloud* cloud, const char* path) {
  if (rd_status s = requireArgs({cloud, path}); s != RD_OK) return s;
  return guarded([&] {
    const std::string p(path);
    if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".ply") == 0)
      radelft::io::writePly(p, cloud->cloud);
    else if (p.size() >= 4 && p.compare(p.size() - 4, 4, ".csv") == 0)
      radelft::io::writeCsv(p, cloud->cloud);
    else
      radelft::throwError(radelft::ErrorCode::InvalidArgument,
                          "point cloud path must end in .ply or .csv");
  });
}

rd_status rd_pointcloud_size(const rd_pointcloud* cloud, size_t* out) {
  if (rd_status s = requireArgs({cloud, out}); s != RD_OK) return s;
  *out = cloud->cloud.size();
  return RD_OK;
}

void rd_pointcloud_free(rd_pointcloud* cloud) { delete cloud; }

rd_status rd_chamfer_distance(const rd_pointcloud* a, const rd_pointcloud* b, double* out_m) {
  if (rd_status s = requireArgs({a, b, out_m}); s != RD_OK) return s;
  return guarded([&] { *out_m = radelft::metrics::chamferAccel(a->cloud, b->cloud); });
}

}  // extern "C"
