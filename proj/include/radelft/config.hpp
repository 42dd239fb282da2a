#ifndef RADELFT_CONFIG_HPP
#define RADELFT_CONFIG_HPP

#include <string>

#include "radelft/cfar.hpp"
#include "radelft/neural.hpp"
#include "radelft/pipeline.hpp"
#include "radelft/types.hpp"

namespace radelft {

struct GridConfig {
  int range_fft_factor = 2;
  int n_range = 128;
  int az_fft = 69;  // FoV crop keeps 64 azimuth bins
  int el_fft = 48;  // FoV crop keeps 16 elevation bins
  double az_fov_deg = 70.0;
  double el_fov_deg = 20.0;
};

struct SimConfig {
  double noise_power = 1.0;
  double max_pair_skew_s = 0.05;  // radar/lidar pairing tolerance
};

struct CfarSettings {
  int n_train = 16;
  int n_guard = 0;
  double rank_fraction = 0.75;
  double pfa_2d = 1e-4;
  double pfa_1d = 1e-4;
};

// Everything the CLI commands need, loadable from a single JSON file with
// sections {waveform, array, grid, sim, pipeline, cfar, detector}.
struct ConfigBundle {
  WaveformConfig waveform;
  std::string array_preset = "desk";  // desk | radelft | mini | custom
  ArrayGeometry array;
  GridConfig grid;
  SimConfig sim;
  pipe::PipelineOptions pipeline;
  CfarSettings cfar;
  nn::DetectorConfig detector;

  // Desk-scale defaults: the full processing chain in seconds.
  static ConfigBundle deskDefault();
  // Full-scale parameters (500 x 128 x 240 x 44 cube).
  static ConfigBundle fullScale();

  static ConfigBundle fromJsonFile(const std::string& path);
  static ConfigBundle fromJsonText(const std::string& text);
  std::string toJsonText() const;

  // Consistency checks + detector.elevation_bins sync with the grid.
  void finalize();

  PolarGrid makeGrid(bool no_elevation = false) const;
};

// Detector config <-> JSON (also embedded in model checkpoints).
std::string detectorConfigToJson(const nn::DetectorConfig& cfg);
nn::DetectorConfig detectorConfigFromJson(const std::string& text);

}  // namespace radelft

#endif
