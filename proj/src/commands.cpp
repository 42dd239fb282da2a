#include "radelft/commands.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>

#include "radelft/errors.hpp"
#include "radelft/eval.hpp"
#include "radelft/grid.hpp"
#include "radelft/groundtruth.hpp"
#include "radelft/io.hpp"
#include "radelft/parallel.hpp"
#include "radelft/pipeline.hpp"
#include "radelft/simulate.hpp"

namespace radelft {
namespace cmd {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string frameName(const char* prefix, int index, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%06d.%s", prefix, index, ext);
  return buf;
}

void ensureDir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throwError(ErrorCode::Io, "cannot create directory " + dir + ": " + ec.message());
}

void writeConfigEcho(const ConfigBundle& cfg, const std::string& dir) {
  std::ofstream out(fs::path(dir) / "config.json");
  out << cfg.toJsonText() << '\n';
  if (!out) throwError(ErrorCode::Io, "write failed: " + dir + "/config.json");
}

io::Manifest loadManifestChecked(const ConfigBundle& cfg, const std::string& dir) {
  const io::Manifest m = io::Manifest::load((fs::path(dir) / "manifest.json").string());
  m.checkPairing(cfg.sim.max_pair_skew_s);
  if (m.frames.empty()) throwError(ErrorCode::Format, "manifest has no frames: " + dir);
  return m;
}

RadarCube loadCube(const std::string& dir, const io::FrameEntry& f, const PolarGrid& grid) {
  if (f.cube_power.empty() || f.cube_elev.empty())
    throwError(ErrorCode::Format, "manifest frame " + std::to_string(f.index) + " has no cube");
  RadarCube cube;
  cube.power = io::readTensor<double>((fs::path(dir) / f.cube_power).string());
  cube.elev_argmax = io::readTensor<std::int32_t>((fs::path(dir) / f.cube_elev).string());
  cube.grid = grid;
  cube.timestamp_s = f.t_radar_s;
  if (cube.power.rank() != 3 || cube.power.dim(0) != grid.numRange() ||
      cube.power.dim(1) != grid.numDoppler() || cube.power.dim(2) != grid.numAzimuth())
    throwError(ErrorCode::ShapeMismatch, "cube shape disagrees with grid sidecar");
  return cube;
}

gt::GroundRemovalParams groundParams() { return gt::GroundRemovalParams{}; }

}  // namespace

void simulate(const ConfigBundle& cfg, const Scene& scene_in, const std::string& out_dir,
              std::uint64_t seed) {
  Scene scene = scene_in;
  if (seed != 0) scene.rng_seed = seed;
  scene.validate();
  ensureDir(out_dir);

  const DerivedQuantities der = derivedQuantities(cfg.waveform);
  const int n_frames = scene.frameCount();
  if (n_frames < 1) throwError(ErrorCode::Config, "simulate: scene produces no frames");

  io::Manifest manifest;
  manifest.frames.resize(n_frames);
  // Frames are pure given (scene, index); synthesize them in parallel but
  // let each worker own its frame's files.
  std::vector<std::string> errors(n_frames);
  parallelFor(static_cast<std::size_t>(n_frames), [&](std::size_t i) {
    const int f = static_cast<int>(i);
    try {
      const AdcFrame frame = sim::synthesizeAdc(scene, cfg.waveform, cfg.array,
                                                cfg.sim.noise_power, f);
      const PointCloud cloud = sim::sampleGroundTruth(scene, f, der.r_max_m);
      io::FrameEntry& e = manifest.frames[i];
      e.index = f;
      e.t_radar_s = frame.timestamp_s;
      e.t_lidar_s = frame.timestamp_s;  // simulation pairs exactly
      e.adc = frameName("adc", f, "rdlc");
      e.gt_cloud = frameName("gt", f, "ply");
      io::writeTensor((fs::path(out_dir) / e.adc).string(), frame.data);
      io::writePly((fs::path(out_dir) / e.gt_cloud).string(), cloud);
    } catch (const std::exception& ex) {
      errors[i] = ex.what();
    }
  });
  for (const auto& err : errors)
    if (!err.empty()) throwError(ErrorCode::Internal, "simulate: " + err);

  manifest.save((fs::path(out_dir) / "manifest.json").string());
  std::ofstream scene_echo(fs::path(out_dir) / "scene.json");
  scene_echo << scene.toJsonText() << '\n';
  writeConfigEcho(cfg, out_dir);
}

void process(const ConfigBundle& cfg, const std::string& sim_dir, const std::string& out_dir,
             const nn::Ablations& ablations) {
  const io::Manifest in_manifest = loadManifestChecked(cfg, sim_dir);
  ensureDir(out_dir);

  const PolarGrid grid = cfg.makeGrid(ablations.no_elevation);
  pipe::PipelineOptions opt = cfg.pipeline;
  opt.no_elevation = ablations.no_elevation;

  io::Manifest manifest = in_manifest;
  const int n_chirps_total = cfg.waveform.n_chirps * cfg.waveform.n_tx;
  for (std::size_t i = 0; i < manifest.frames.size(); ++i) {
    io::FrameEntry& e = manifest.frames[i];
    if (e.adc.empty())
      throwError(ErrorCode::Format, "manifest frame " + std::to_string(e.index) + " has no ADC");
    AdcFrame frame;
    frame.data = io::readTensor<Cplx>((fs::path(sim_dir) / e.adc).string());
    frame.timestamp_s = e.t_radar_s;
    frame.tx_of_chirp.resize(n_chirps_total);
    for (int c = 0; c < n_chirps_total; ++c) frame.tx_of_chirp[c] = c % cfg.waveform.n_tx;

    const RadarCube cube = pipe::processFrame(frame, cfg.waveform, cfg.array, grid, opt);
    e.cube_power = frameName("cube_pw", e.index, "rdlc");
    e.cube_elev = frameName("cube_el", e.index, "rdlc");
    io::writeTensor((fs::path(out_dir) / e.cube_power).string(), cube.power);
    io::writeTensor((fs::path(out_dir) / e.cube_elev).string(), cube.elev_argmax);
    e.adc.clear();  // cubes stand alone

    // Ground truth travels with the cubes so later stages need one directory.
    if (!e.gt_cloud.empty()) {
      fs::copy_file(fs::path(sim_dir) / e.gt_cloud, fs::path(out_dir) / e.gt_cloud,
                    fs::copy_options::overwrite_existing);
    }
  }
  manifest.save((fs::path(out_dir) / "manifest.json").string());
  io::writeGridJson((fs::path(out_dir) / "grid.json").string(),
                    opt.no_elevation ? PolarGrid::fromSteps(grid.rangeStep(),
                                                            static_cast<int>(grid.numRange()),
                                                            grid.dopplerStep(),
                                                            static_cast<int>(grid.numDoppler()),
                                                            static_cast<int>(grid.azFftSize()), 1,
                                                            grid.az_fov_deg, grid.el_fov_deg)
                                     : grid);
  writeConfigEcho(cfg, out_dir);
}

void detectCfar(const ConfigBundle& cfg, const std::string& cube_dir,
                const std::string& out_dir) {
  const io::Manifest in_manifest = loadManifestChecked(cfg, cube_dir);
  const PolarGrid grid = io::readGridJson((fs::path(cube_dir) / "grid.json").string());
  ensureDir(out_dir);

  cfar::CfarConfig c2;
  c2.n_train = cfg.cfar.n_train;
  c2.n_guard = cfg.cfar.n_guard;
  c2.rank_fraction = cfg.cfar.rank_fraction;
  c2.target_pfa = cfg.cfar.pfa_2d;
  cfar::CfarConfig c1 = c2;
  c1.target_pfa = cfg.cfar.pfa_1d;

  io::Manifest manifest = in_manifest;
  for (auto& e : manifest.frames) {
    const RadarCube cube = loadCube(cube_dir, e, grid);
    const OccupancyGrid occ = cfar::cascadeDetectDefault(cube, c2, c1);
    e.occupancy = frameName("occ", e.index, "rdlc");
    e.cloud = frameName("pc", e.index, "ply");
    io::writeTensor((fs::path(out_dir) / e.occupancy).string(), occ.occ);
    io::writePly((fs::path(out_dir) / e.cloud).string(), gridToPointCloud(occ, &cube));
    if (!e.gt_cloud.empty())
      fs::copy_file(fs::path(cube_dir) / e.gt_cloud, fs::path(out_dir) / e.gt_cloud,
                    fs::copy_options::overwrite_existing);
  }
  manifest.save((fs::path(out_dir) / "manifest.json").string());
  io::writeGridJson((fs::path(out_dir) / "grid.json").string(), grid);
  writeConfigEcho(cfg, out_dir);
}

namespace {

// Supervision samples of one processed scene directory.
struct SceneData {
  std::vector<RadarCube> cubes;
  std::vector<OccupancyGrid> truth;
};

SceneData loadSceneData(const ConfigBundle& cfg, const std::string& dir, const PolarGrid& grid) {
  const io::Manifest manifest = loadManifestChecked(cfg, dir);
  SceneData data;
  const double r_crop = grid.range_edges.back();
  for (const auto& e : manifest.frames) {
    data.cubes.push_back(loadCube(dir, e, grid));
    if (e.gt_cloud.empty())
      throwError(ErrorCode::Format, "train: frame " + std::to_string(e.index) + " has no ground truth");
    const PointCloud cloud = io::readPly((fs::path(dir) / e.gt_cloud).string());
    data.truth.push_back(gt::buildSupervision(cloud, grid, r_crop, groundParams()));
  }
  return data;
}

Tensor<std::uint8_t> stackTargets(const std::vector<OccupancyGrid>& grids, std::size_t first,
                                  std::size_t count) {
  const std::size_t R = grids[first].occ.dim(0), A = grids[first].occ.dim(1),
                    E = grids[first].occ.dim(2);
  Tensor<std::uint8_t> target({count, R, A, E});
  for (std::size_t t = 0; t < count; ++t)
    std::copy(grids[first + t].occ.begin(), grids[first + t].occ.end(),
              target.data() + t * R * A * E);
  return target;
}

}  // namespace

void train(const ConfigBundle& cfg, const std::vector<std::string>& data_dirs,
           const std::string& checkpoint_path, std::uint64_t seed,
           const nn::Ablations& ablations) {
  if (data_dirs.empty()) throwError(ErrorCode::InvalidArgument, "train: no data directories");

  nn::DetectorConfig dcfg = cfg.detector;
  dcfg.ablations.no_doppler |= ablations.no_doppler;
  dcfg.ablations.quantile_prefilter |= ablations.quantile_prefilter;
  dcfg.ablations.no_time |= ablations.no_time;
  dcfg.ablations.no_elevation |= ablations.no_elevation;
  if (seed != 0) dcfg.seed = seed;

  const PolarGrid grid = io::readGridJson((fs::path(data_dirs[0]) / "grid.json").string());
  dcfg.elevation_bins = static_cast<int>(grid.numElevation());
  dcfg.validate();

  std::vector<nn::TrainSample> samples;
  const std::size_t T = static_cast<std::size_t>(dcfg.frames);
  for (std::size_t s = 0; s < data_dirs.size(); ++s) {
    const PolarGrid dgrid = io::readGridJson((fs::path(data_dirs[s]) / "grid.json").string());
    if (!dgrid.sameGrid(grid))
      throwError(ErrorCode::ShapeMismatch, "train: grids differ between data directories");
    const SceneData data = loadSceneData(cfg, data_dirs[s], grid);
    if (data.cubes.size() < T)
      throwError(ErrorCode::InvalidArgument, "train: scene shorter than the frame window");
    for (std::size_t start = 0; start + T <= data.cubes.size(); ++start) {
      std::vector<const RadarCube*> window;
      for (std::size_t t = 0; t < T; ++t) window.push_back(&data.cubes[start + t]);
      nn::TrainSample sample;
      sample.input = nn::buildInput(window, dcfg);
      sample.target = stackTargets(data.truth, start, T);
      sample.scene_id = static_cast<int>(s);
      samples.push_back(std::move(sample));
    }
  }

  const nn::TrainResult result = nn::trainDetector(samples, dcfg, dcfg.seed);
  for (std::size_t e = 0; e < result.train_loss.size(); ++e)
    std::printf("epoch %zu train_loss %.6g val_loss %.6g\n", e, result.train_loss[e],
                result.val_loss[e]);
  nn::DetectorModel model = result.model;
  io::saveCheckpoint(checkpoint_path, model);
}

void detectNn(const ConfigBundle& cfg, const std::string& checkpoint_path,
              const std::string& cube_dir, const std::string& out_dir, double threshold) {
  nn::DetectorModel model = io::loadCheckpoint(checkpoint_path);
  const double thr = threshold >= 0.0 ? threshold : model.cfg.prob_threshold;

  const io::Manifest in_manifest = loadManifestChecked(cfg, cube_dir);
  const PolarGrid grid = io::readGridJson((fs::path(cube_dir) / "grid.json").string());
  ensureDir(out_dir);

  const std::size_t T = static_cast<std::size_t>(model.cfg.frames);
  const std::size_t n = in_manifest.frames.size();
  if (n < T) throwError(ErrorCode::InvalidArgument, "detect-nn: fewer frames than the window");

  std::vector<RadarCube> cubes;
  cubes.reserve(n);
  for (const auto& e : in_manifest.frames) cubes.push_back(loadCube(cube_dir, e, grid));

  // Non-overlapping windows; the last window re-anchors to cover the tail.
  // Each frame keeps its first prediction.
  std::vector<std::optional<OccupancyGrid>> preds(n);
  for (std::size_t start = 0; start < n;) {
    const std::size_t s = std::min(start, n - T);
    std::vector<const RadarCube*> window;
    for (std::size_t t = 0; t < T; ++t) window.push_back(&cubes[s + t]);
    auto grids = nn::predictOccupancy(model, window, thr);
    for (std::size_t t = 0; t < T; ++t)
      if (!preds[s + t]) preds[s + t] = std::move(grids[t]);
    start = s + T;
  }

  io::Manifest manifest = in_manifest;
  for (std::size_t i = 0; i < n; ++i) {
    io::FrameEntry& e = manifest.frames[i];
    e.occupancy = frameName("occ", e.index, "rdlc");
    e.cloud = frameName("pc", e.index, "ply");
    io::writeTensor((fs::path(out_dir) / e.occupancy).string(), preds[i]->occ);
    io::writePly((fs::path(out_dir) / e.cloud).string(), gridToPointCloud(*preds[i], &cubes[i]));
    if (!e.gt_cloud.empty())
      fs::copy_file(fs::path(cube_dir) / e.gt_cloud, fs::path(out_dir) / e.gt_cloud,
                    fs::copy_options::overwrite_existing);
  }
  manifest.save((fs::path(out_dir) / "manifest.json").string());
  io::writeGridJson((fs::path(out_dir) / "grid.json").string(), grid);
  writeConfigEcho(cfg, out_dir);
}

void evaluate(const ConfigBundle& cfg, const std::string& pred_dir, const std::string& gt_dir,
              const std::string& out_dir) {
  const io::Manifest pred_manifest = loadManifestChecked(cfg, pred_dir);
  const io::Manifest gt_manifest = loadManifestChecked(cfg, gt_dir);
  const PolarGrid grid = io::readGridJson((fs::path(pred_dir) / "grid.json").string());
  ensureDir(out_dir);

  std::map<int, const io::FrameEntry*> gt_by_index;
  for (const auto& e : gt_manifest.frames) gt_by_index[e.index] = &e;

  const double r_crop = grid.range_edges.back();
  json frames_json = json::array();
  double pd_sum = 0.0, pfa_sum = 0.0, cd_sum = 0.0;
  std::size_t pd_n = 0, cd_n = 0;

  for (const auto& e : pred_manifest.frames) {
    if (e.occupancy.empty())
      throwError(ErrorCode::Format, "evaluate: frame " + std::to_string(e.index) + " has no occupancy");
    const auto it = gt_by_index.find(e.index);
    if (it == gt_by_index.end())
      throwError(ErrorCode::Format, "evaluate: ground truth missing for frame " +
                                        std::to_string(e.index));
    const io::FrameEntry& g = *it->second;
    if (g.gt_cloud.empty())
      throwError(ErrorCode::Format, "evaluate: frame " + std::to_string(e.index) + " has no gt cloud");
    if (std::abs(e.t_radar_s - g.t_lidar_s) > cfg.sim.max_pair_skew_s)
      throwError(ErrorCode::Format, "evaluate: radar/lidar pairing skew exceeds limit at frame " +
                                        std::to_string(e.index));

    OccupancyGrid pred{io::readTensor<std::uint8_t>((fs::path(pred_dir) / e.occupancy).string()),
                       grid};
    const PointCloud raw_gt = io::readPly((fs::path(gt_dir) / g.gt_cloud).string());
    const PointCloud gt_cloud = gt::supervisionCloud(raw_gt, grid, r_crop, groundParams());
    const OccupancyGrid gt_grid = gt::voxelize(gt_cloud, grid);

    const metrics::PdPfa counts = metrics::pdPfa(pred, gt_grid);
    const PointCloud pred_cloud = gridToPointCloud(pred);

    json jf;
    jf["index"] = e.index;
    jf["pd"] = counts.pd ? json(*counts.pd) : json(nullptr);
    jf["pfa"] = counts.pfa;
    jf["tp"] = counts.tp;
    jf["fp"] = counts.fp;
    jf["fn"] = counts.fn;
    jf["tn"] = counts.tn;
    if (pred_cloud.size() > 0 && gt_cloud.size() > 0) {
      const double cd = metrics::chamferAccel(pred_cloud, gt_cloud);
      jf["chamfer_m"] = cd;
      cd_sum += cd;
      ++cd_n;
    } else {
      jf["chamfer_m"] = nullptr;
    }
    if (counts.pd) {
      pd_sum += *counts.pd;
      ++pd_n;
    }
    pfa_sum += counts.pfa;
    frames_json.push_back(jf);

    io::writeBevPgm((fs::path(out_dir) / frameName("bev_pred", e.index, "pgm")).string(), pred);
    io::writeBevPgm((fs::path(out_dir) / frameName("bev_gt", e.index, "pgm")).string(), gt_grid);
  }

  json report;
  report["frames"] = frames_json;
  report["aggregate"] = {
      {"pd", pd_n ? json(pd_sum / pd_n) : json(nullptr)},
      {"pfa", pfa_sum / static_cast<double>(pred_manifest.frames.size())},
      {"chamfer_m", cd_n ? json(cd_sum / cd_n) : json(nullptr)},
      {"frames", pred_manifest.frames.size()}};
  report["provenance"] = {{"pred", fs::path(pred_dir).filename().string()},
                          {"gt", fs::path(gt_dir).filename().string()}};
  report["config"] = json::parse(cfg.toJsonText());
  std::ofstream out(fs::path(out_dir) / "metrics.json");
  out << report.dump(2) << '\n';
  if (!out) throwError(ErrorCode::Io, "write failed: " + out_dir + "/metrics.json");
}

void exportFile(const std::string& input_path, const std::string& grid_json_path,
                const std::string& format, const std::string& output_path) {
  if (format != "ply" && format != "csv")
    throwError(ErrorCode::InvalidArgument, "export: format must be ply or csv");

  PointCloud cloud;
  const fs::path in(input_path);
  const std::string ext = in.extension().string();
  if (ext == ".rdlc") {
    std::string grid_path = grid_json_path;
    if (grid_path.empty()) grid_path = (in.parent_path() / "grid.json").string();
    const PolarGrid grid = io::readGridJson(grid_path);
    OccupancyGrid occ{io::readTensor<std::uint8_t>(input_path), grid};
    cloud = gridToPointCloud(occ);
  } else if (ext == ".ply") {
    cloud = io::readPly(input_path);
  } else if (ext == ".csv") {
    cloud = io::readCsv(input_path);
  } else {
    throwError(ErrorCode::InvalidArgument, "export: unsupported input " + input_path);
  }
  if (format == "ply")
    io::writePly(output_path, cloud);
  else
    io::writeCsv(output_path, cloud);
}

}  // namespace cmd
}  // namespace radelft
