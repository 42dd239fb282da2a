#include "radelft/config.hpp"

#include <json.hpp>

#include <fstream>

#include "radelft/errors.hpp"

namespace radelft {

using nlohmann::json;

ConfigBundle ConfigBundle::deskDefault() {
  ConfigBundle c;
  c.waveform = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 64, 32, 12e6, 5, 8);
  c.array_preset = "desk";
  c.array = ArrayGeometry::deskScale();
  c.finalize();
  return c;
}

ConfigBundle ConfigBundle::fullScale() {
  ConfigBundle c;
  c.waveform = WaveformConfig::make(76e9, 35e12, 28e-6, 5e-6, 256, 128, 12e6, 12, 16);
  c.array_preset = "radelft";
  c.array = ArrayGeometry::radelft();
  c.grid = GridConfig{2, 500, 256, 128, 70.0, 20.0};
  c.detector.enc_channels = 64;
  c.finalize();
  return c;
}

void ConfigBundle::finalize() {
  waveform.validate();
  if (array.numTx() != waveform.n_tx || array.numRx() != waveform.n_rx)
    throwError(ErrorCode::Config, "config: array element counts disagree with waveform n_tx/n_rx");
  const PolarGrid g = makeGrid(detector.ablations.no_elevation);
  detector.elevation_bins = static_cast<int>(g.numElevation());
  detector.validate();
}

PolarGrid ConfigBundle::makeGrid(bool no_elevation) const {
  return PolarGrid::make(waveform, grid.range_fft_factor, grid.n_range, grid.az_fft,
                         no_elevation ? 1 : grid.el_fft, grid.az_fov_deg, grid.el_fov_deg);
}

namespace {

ArrayGeometry arrayFromPreset(const std::string& preset) {
  if (preset == "desk") return ArrayGeometry::deskScale();
  if (preset == "radelft") return ArrayGeometry::radelft();
  if (preset == "mini") return ArrayGeometry::mini();
  throwError(ErrorCode::Config, "config: unknown array preset '" + preset + "'");
}

json ablationsToJson(const nn::Ablations& a) {
  return json{{"no_doppler", a.no_doppler},
              {"quantile_prefilter", a.quantile_prefilter},
              {"no_time", a.no_time},
              {"no_elevation", a.no_elevation}};
}

nn::Ablations ablationsFromJson(const json& j) {
  nn::Ablations a;
  a.no_doppler = j.value("no_doppler", false);
  a.quantile_prefilter = j.value("quantile_prefilter", false);
  a.no_time = j.value("no_time", false);
  a.no_elevation = j.value("no_elevation", false);
  return a;
}

json detectorToJson(const nn::DetectorConfig& d) {
  return json{{"frames", d.frames},
              {"enc_channels", d.enc_channels},
              {"backbone_channels", d.backbone_channels},
              {"elevation_bins", d.elevation_bins},
              {"kernel_rad", d.kernel_rad},
              {"kernel_az", d.kernel_az},
              {"kernel_dop", d.kernel_dop},
              {"stride_dop", d.stride_dop},
              {"alpha", d.alpha},
              {"gamma", d.gamma},
              {"learning_rate", d.learning_rate},
              {"batch_size", d.batch_size},
              {"epochs", d.epochs},
              {"prob_threshold", d.prob_threshold},
              {"activation", nn::activationName(d.activation)},
              {"seed", d.seed},
              {"ablations", ablationsToJson(d.ablations)}};
}

nn::DetectorConfig detectorFromJson(const json& j, const nn::DetectorConfig& base) {
  nn::DetectorConfig d = base;
  d.frames = j.value("frames", d.frames);
  d.enc_channels = j.value("enc_channels", d.enc_channels);
  d.backbone_channels = j.value("backbone_channels", d.backbone_channels);
  d.elevation_bins = j.value("elevation_bins", d.elevation_bins);
  d.kernel_rad = j.value("kernel_rad", d.kernel_rad);
  d.kernel_az = j.value("kernel_az", d.kernel_az);
  d.kernel_dop = j.value("kernel_dop", d.kernel_dop);
  d.stride_dop = j.value("stride_dop", d.stride_dop);
  d.alpha = j.value("alpha", d.alpha);
  d.gamma = j.value("gamma", d.gamma);
  d.learning_rate = j.value("learning_rate", d.learning_rate);
  d.batch_size = j.value("batch_size", d.batch_size);
  d.epochs = j.value("epochs", d.epochs);
  d.prob_threshold = j.value("prob_threshold", d.prob_threshold);
  if (j.contains("activation")) d.activation = nn::activationFromName(j.at("activation"));
  d.seed = j.value("seed", d.seed);
  if (j.contains("ablations")) d.ablations = ablationsFromJson(j.at("ablations"));
  return d;
}

}  // namespace

ConfigBundle ConfigBundle::fromJsonText(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throwError(ErrorCode::Format, std::string("config: invalid JSON: ") + e.what());
  }
  ConfigBundle c = deskDefault();

  if (j.contains("waveform")) {
    const auto& w = j.at("waveform");
    c.waveform = WaveformConfig::make(
        w.value("f_start_hz", c.waveform.f_start_hz),
        w.value("slope_hz_per_s", c.waveform.slope_hz_per_s),
        w.value("chirp_len_s", c.waveform.chirp_len_s), w.value("idle_s", c.waveform.idle_s),
        w.value("n_adc", c.waveform.n_adc), w.value("n_chirps", c.waveform.n_chirps),
        w.value("f_s_hz", c.waveform.f_s_hz), w.value("n_tx", c.waveform.n_tx),
        w.value("n_rx", c.waveform.n_rx));
  }
  if (j.contains("array")) {
    const auto& a = j.at("array");
    if (a.contains("preset")) {
      c.array_preset = a.at("preset").get<std::string>();
      c.array = arrayFromPreset(c.array_preset);
    } else if (a.contains("tx") && a.contains("rx")) {
      c.array_preset = "custom";
      std::vector<std::pair<double, double>> tx, rx;
      for (const auto& e : a.at("tx")) tx.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
      for (const auto& e : a.at("rx")) rx.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
      c.array = ArrayGeometry::fromElements(std::move(tx), std::move(rx));
    } else {
      throwError(ErrorCode::Config, "config: array needs a preset or tx/rx element lists");
    }
  }
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    c.grid.range_fft_factor = g.value("range_fft_factor", c.grid.range_fft_factor);
    c.grid.n_range = g.value("n_range", c.grid.n_range);
    c.grid.az_fft = g.value("az_fft", c.grid.az_fft);
    c.grid.el_fft = g.value("el_fft", c.grid.el_fft);
    c.grid.az_fov_deg = g.value("az_fov_deg", c.grid.az_fov_deg);
    c.grid.el_fov_deg = g.value("el_fov_deg", c.grid.el_fov_deg);
  }
  if (j.contains("sim")) {
    const auto& s = j.at("sim");
    c.sim.noise_power = s.value("noise_power", c.sim.noise_power);
    c.sim.max_pair_skew_s = s.value("max_pair_skew_s", c.sim.max_pair_skew_s);
  }
  if (j.contains("pipeline")) {
    const auto& p = j.at("pipeline");
    c.pipeline.unfold_gate_db = p.value("unfold_gate_db", c.pipeline.unfold_gate_db);
    c.pipeline.unfold_coherence_min =
        p.value("unfold_coherence_min", c.pipeline.unfold_coherence_min);
    c.pipeline.max_fold_hypotheses =
        p.value("max_fold_hypotheses", c.pipeline.max_fold_hypotheses);
  }
  if (j.contains("cfar")) {
    const auto& f = j.at("cfar");
    c.cfar.n_train = f.value("n_train", c.cfar.n_train);
    c.cfar.n_guard = f.value("n_guard", c.cfar.n_guard);
    c.cfar.rank_fraction = f.value("rank_fraction", c.cfar.rank_fraction);
    c.cfar.pfa_2d = f.value("pfa_2d", c.cfar.pfa_2d);
    c.cfar.pfa_1d = f.value("pfa_1d", c.cfar.pfa_1d);
  }
  if (j.contains("detector")) c.detector = detectorFromJson(j.at("detector"), c.detector);
  c.finalize();
  return c;
}

ConfigBundle ConfigBundle::fromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throwError(ErrorCode::Io, "config: cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return fromJsonText(text);
}

std::string ConfigBundle::toJsonText() const {
  json j;
  j["waveform"] = {{"f_start_hz", waveform.f_start_hz},
                   {"slope_hz_per_s", waveform.slope_hz_per_s},
                   {"chirp_len_s", waveform.chirp_len_s},
                   {"idle_s", waveform.idle_s},
                   {"n_adc", waveform.n_adc},
                   {"n_chirps", waveform.n_chirps},
                   {"f_s_hz", waveform.f_s_hz},
                   {"n_tx", waveform.n_tx},
                   {"n_rx", waveform.n_rx}};
  if (array_preset == "custom") {
    json tx = json::array(), rx = json::array();
    for (const auto& p : array.tx_pos) tx.push_back({p.first, p.second});
    for (const auto& p : array.rx_pos) rx.push_back({p.first, p.second});
    j["array"] = {{"tx", tx}, {"rx", rx}};
  } else {
    j["array"] = {{"preset", array_preset}};
  }
  j["grid"] = {{"range_fft_factor", grid.range_fft_factor}, {"n_range", grid.n_range},
               {"az_fft", grid.az_fft},                     {"el_fft", grid.el_fft},
               {"az_fov_deg", grid.az_fov_deg},             {"el_fov_deg", grid.el_fov_deg}};
  j["sim"] = {{"noise_power", sim.noise_power}, {"max_pair_skew_s", sim.max_pair_skew_s}};
  j["pipeline"] = {{"unfold_gate_db", pipeline.unfold_gate_db},
                   {"unfold_coherence_min", pipeline.unfold_coherence_min},
                   {"max_fold_hypotheses", pipeline.max_fold_hypotheses}};
  j["cfar"] = {{"n_train", cfar.n_train},
               {"n_guard", cfar.n_guard},
               {"rank_fraction", cfar.rank_fraction},
               {"pfa_2d", cfar.pfa_2d},
               {"pfa_1d", cfar.pfa_1d}};
  j["detector"] = detectorToJson(detector);
  return j.dump(2);
}

std::string detectorConfigToJson(const nn::DetectorConfig& cfg) {
  return detectorToJson(cfg).dump();
}

nn::DetectorConfig detectorConfigFromJson(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throwError(ErrorCode::Format, std::string("detector config: invalid JSON: ") + e.what());
  }
  return detectorFromJson(j, nn::DetectorConfig{});
}

}  // namespace radelft
