// Command-line front end; all functionality lives behind the C API of the
// radelft shared library.

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

#include "radelft/radelft.h"

namespace {

struct ConfigHandle {
  rd_config* ptr = nullptr;
  ~ConfigHandle() { rd_config_free(ptr); }
};

struct SceneHandle {
  rd_scene* ptr = nullptr;
  ~SceneHandle() { rd_scene_free(ptr); }
};

int fail(const char* what, rd_status status) {
  std::fprintf(stderr, "radelft: %s: %s: %s\n", what, rd_status_name(status), rd_last_error());
  return 1;
}

int loadConfig(const std::string& path, ConfigHandle& cfg) {
  const rd_status s =
      path.empty() ? rd_config_default(&cfg.ptr) : rd_config_load(path.c_str(), &cfg.ptr);
  if (s != RD_OK) return fail("config", s);
  return 0;
}

uint32_t ablationMask(const std::vector<std::string>& names, std::string& bad) {
  uint32_t mask = 0;
  for (const auto& n : names) {
    if (n == "no_doppler")
      mask |= RD_ABL_NO_DOPPLER;
    else if (n == "quantile")
      mask |= RD_ABL_QUANTILE;
    else if (n == "no_time")
      mask |= RD_ABL_NO_TIME;
    else if (n == "no_elevation")
      mask |= RD_ABL_NO_ELEVATION;
    else
      bad = n;
  }
  return mask;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic FMCW TDMA-MIMO radar pipeline: simulation, cube processing, CFAR and "
               "neural detection, evaluation"};
  app.require_subcommand(1);

  std::string config_path, scene_path, in_dir, out_dir, pred_dir, gt_dir;
  std::string checkpoint, grid_json, format = "ply", input_path, output_path;
  std::vector<std::string> data_dirs, ablations;
  std::uint64_t seed = 0;
  double threshold = -1.0;

  auto* sim = app.add_subcommand("simulate", "Synthesize ADC frames and ground-truth clouds");
  sim->add_option("--scene", scene_path, "Scene JSON")->required();
  sim->add_option("--config", config_path, "Config JSON (default: desk-scale)");
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--seed", seed, "Override the scene rng_seed (0 keeps it)");

  auto* proc = app.add_subcommand("process", "ADC frames -> radar cubes");
  proc->add_option("--config", config_path, "Config JSON");
  proc->add_option("--in", in_dir, "Simulation directory")->required();
  proc->add_option("--out", out_dir, "Output directory")->required();
  proc->add_option("--ablation", ablations, "no_elevation");

  auto* cf = app.add_subcommand("detect-cfar", "Cascade OS-CFAR baseline detector");
  cf->add_option("--config", config_path, "Config JSON");
  cf->add_option("--in", in_dir, "Cube directory")->required();
  cf->add_option("--out", out_dir, "Output directory")->required();

  auto* tr = app.add_subcommand("train", "Train the neural detector");
  tr->add_option("--config", config_path, "Config JSON");
  tr->add_option("--data", data_dirs, "Processed scene directories")->required();
  tr->add_option("--out", checkpoint, "Checkpoint path")->required();
  tr->add_option("--seed", seed, "Override the detector seed (0 keeps it)");
  tr->add_option("--ablation", ablations, "no_doppler, quantile, no_time, no_elevation");

  auto* nn = app.add_subcommand("detect-nn", "Neural detector inference");
  nn->add_option("--config", config_path, "Config JSON");
  nn->add_option("--checkpoint", checkpoint, "Model checkpoint")->required();
  nn->add_option("--in", in_dir, "Cube directory")->required();
  nn->add_option("--out", out_dir, "Output directory")->required();
  nn->add_option("--threshold", threshold, "Probability threshold (default: checkpoint value)");

  auto* ev = app.add_subcommand("evaluate", "Pd/Pfa/Chamfer metrics + BEV images");
  ev->add_option("--config", config_path, "Config JSON");
  ev->add_option("--pred", pred_dir, "Detection directory")->required();
  ev->add_option("--gt", gt_dir, "Ground-truth directory")->required();
  ev->add_option("--out", out_dir, "Output directory")->required();

  auto* ex = app.add_subcommand("export", "Convert occupancy/cloud files to PLY or CSV");
  ex->add_option("--in", input_path, "Input (.rdlc occupancy, .ply or .csv)")->required();
  ex->add_option("--grid", grid_json, "Grid sidecar for occupancy input");
  ex->add_option("--format", format, "ply or csv")->required();
  ex->add_option("--out", output_path, "Output file")->required();

  CLI11_PARSE(app, argc, argv);

  std::string bad;
  const uint32_t mask = ablationMask(ablations, bad);
  if (!bad.empty()) {
    std::fprintf(stderr, "radelft: unknown ablation '%s'\n", bad.c_str());
    return 1;
  }

  if (sim->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    SceneHandle scene;
    if (rd_status s = rd_scene_load(scene_path.c_str(), &scene.ptr); s != RD_OK)
      return fail("scene", s);
    if (rd_status s = rd_cmd_simulate(cfg.ptr, scene.ptr, out_dir.c_str(), seed); s != RD_OK)
      return fail("simulate", s);
    return 0;
  }
  if (proc->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    if (rd_status s = rd_cmd_process(cfg.ptr, in_dir.c_str(), out_dir.c_str(), mask); s != RD_OK)
      return fail("process", s);
    return 0;
  }
  if (cf->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    if (rd_status s = rd_cmd_detect_cfar(cfg.ptr, in_dir.c_str(), out_dir.c_str()); s != RD_OK)
      return fail("detect-cfar", s);
    return 0;
  }
  if (tr->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    std::vector<const char*> dirs;
    for (const auto& d : data_dirs) dirs.push_back(d.c_str());
    if (rd_status s = rd_cmd_train(cfg.ptr, dirs.data(), dirs.size(), checkpoint.c_str(), seed,
                                   mask);
        s != RD_OK)
      return fail("train", s);
    return 0;
  }
  if (nn->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    if (rd_status s = rd_cmd_detect_nn(cfg.ptr, checkpoint.c_str(), in_dir.c_str(),
                                       out_dir.c_str(), threshold);
        s != RD_OK)
      return fail("detect-nn", s);
    return 0;
  }
  if (ev->parsed()) {
    ConfigHandle cfg;
    if (int rc = loadConfig(config_path, cfg)) return rc;
    if (rd_status s = rd_cmd_evaluate(cfg.ptr, pred_dir.c_str(), gt_dir.c_str(), out_dir.c_str());
        s != RD_OK)
      return fail("evaluate", s);
    return 0;
  }
  if (ex->parsed()) {
    if (rd_status s = rd_cmd_export(input_path.c_str(),
                                    grid_json.empty() ? nullptr : grid_json.c_str(),
                                    format.c_str(), output_path.c_str());
        s != RD_OK)
      return fail("export", s);
    return 0;
  }
  return 1;
}
