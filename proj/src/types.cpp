#include "radelft/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "radelft/errors.hpp"

namespace radelft {

WaveformConfig WaveformConfig::make(double f_start_hz, double slope_hz_per_s, double chirp_len_s,
                                    double idle_s, int n_adc, int n_chirps, double f_s_hz,
                                    int n_tx, int n_rx) {
  WaveformConfig cfg;
  cfg.f_start_hz = f_start_hz;
  cfg.slope_hz_per_s = slope_hz_per_s;
  cfg.chirp_len_s = chirp_len_s;
  cfg.idle_s = idle_s;
  cfg.n_adc = n_adc;
  cfg.n_chirps = n_chirps;
  cfg.f_s_hz = f_s_hz;
  cfg.n_tx = n_tx;
  cfg.n_rx = n_rx;
  cfg.bandwidth_eff_hz = slope_hz_per_s * n_adc / f_s_hz;
  cfg.validate();
  return cfg;
}

void WaveformConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throwError(ErrorCode::Config, std::string("waveform: ") + name + " must be positive");
  };
  positive(f_start_hz, "f_start_hz");
  positive(slope_hz_per_s, "slope_hz_per_s");
  positive(chirp_len_s, "chirp_len_s");
  positive(f_s_hz, "f_s_hz");
  positive(bandwidth_eff_hz, "bandwidth_eff_hz");
  if (idle_s < 0.0) throwError(ErrorCode::Config, "waveform: idle_s must be non-negative");
  if (n_adc < 1 || n_chirps < 1 || n_tx < 1 || n_rx < 1)
    throwError(ErrorCode::Config, "waveform: counts must be at least 1");
  const double expected = slope_hz_per_s * n_adc / f_s_hz;
  if (std::abs(bandwidth_eff_hz - expected) > 1e-6 * expected)
    throwError(ErrorCode::Config, "waveform: bandwidth_eff_hz inconsistent with slope * n_adc / f_s");
  if (!(pri() > 0.0)) throwError(ErrorCode::Config, "waveform: PRI must be positive");
}

DerivedQuantities derivedQuantities(const WaveformConfig& cfg) {
  cfg.validate();
  DerivedQuantities d;
  d.pri_s = cfg.pri();
  d.range_res_m = kSpeedOfLight / (2.0 * cfg.bandwidth_eff_hz);
  d.r_max_m = cfg.f_s_hz * kSpeedOfLight / (2.0 * cfg.slope_hz_per_s);
  d.v_max_mps = kSpeedOfLight / (4.0 * cfg.fc() * d.pri_s);
  d.v_res_mps = cfg.lambda() / (2.0 * cfg.n_chirps * d.pri_s);
  return d;
}

ArrayGeometry ArrayGeometry::fromElements(std::vector<std::pair<double, double>> tx,
                                          std::vector<std::pair<double, double>> rx) {
  if (tx.empty() || rx.empty())
    throwError(ErrorCode::Config, "array: needs at least one Tx and one Rx");
  ArrayGeometry g;
  g.tx_pos = std::move(tx);
  g.rx_pos = std::move(rx);
  g.virtual_pos.reserve(g.tx_pos.size() * g.rx_pos.size());
  for (int t = 0; t < g.numTx(); ++t)
    for (int r = 0; r < g.numRx(); ++r)
      g.virtual_pos.push_back(VirtualElement{g.tx_pos[t].first + g.rx_pos[r].first,
                                             g.tx_pos[t].second + g.rx_pos[r].second, t, r});

  // Overlaps: identical virtual position, distinct Tx. Positions are keyed on
  // a fixed subdivision so fractional element coordinates still compare exactly.
  std::map<std::pair<long long, long long>, std::vector<int>> by_pos;
  for (int i = 0; i < g.numVirtual(); ++i) {
    const auto& v = g.virtual_pos[i];
    by_pos[{std::llround(v.x * 4096.0), std::llround(v.z * 4096.0)}].push_back(i);
  }
  for (const auto& [key, idx] : by_pos) {
    (void)key;
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b)
        if (g.virtual_pos[idx[a]].tx != g.virtual_pos[idx[b]].tx)
          g.overlapped_pairs.emplace_back(idx[a], idx[b]);
  }
  return g;
}

ArrayGeometry ArrayGeometry::radelft() {
  // Nine azimuth transmitters on a step-4 lattice plus three elevated ones;
  // four receiver quads. Virtual x covers 0..85 densely at z = 0 and the
  // 46..49 / 50..53 receiver quads give Delta-tx = 1 overlaps.
  std::vector<std::pair<double, double>> tx = {
      {0, 0}, {4, 0}, {8, 0}, {12, 0}, {16, 0}, {20, 0}, {24, 0}, {28, 0}, {32, 0},
      {9, 1}, {10, 4}, {11, 6}};
  std::vector<std::pair<double, double>> rx;
  for (int x : {0, 1, 2, 3, 11, 12, 13, 14, 46, 47, 48, 49, 50, 51, 52, 53})
    rx.push_back({static_cast<double>(x), 0.0});
  return fromElements(std::move(tx), std::move(rx));
}

ArrayGeometry ArrayGeometry::deskScale() {
  std::vector<std::pair<double, double>> tx = {{0, 0}, {6, 0}, {12, 0}, {2, 1}, {4, 2}};
  std::vector<std::pair<double, double>> rx;
  for (int x = 0; x < 8; ++x) rx.push_back({static_cast<double>(x), 0.0});
  return fromElements(std::move(tx), std::move(rx));
}

ArrayGeometry ArrayGeometry::mini() {
  std::vector<std::pair<double, double>> tx = {{0, 0}, {3, 0}, {1, 1}};
  std::vector<std::pair<double, double>> rx = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  return fromElements(std::move(tx), std::move(rx));
}

namespace {

// Signed DFT bin range kept inside the field of view. Azimuth rounds down so
// every kept bin stays inside the aperture; elevation rounds to nearest,
// which reproduces the 44-bin output of the full-scale 128-point transform.
int azHalfBins(int fft, double fov_deg) {
  return static_cast<int>(std::floor(fft * std::sin(fov_deg * M_PI / 180.0) / 2.0));
}
int elHalfBins(int fft, double fov_deg) {
  return static_cast<int>(std::llround(fft * std::sin(fov_deg * M_PI / 180.0) / 2.0));
}

}  // namespace

PolarGrid PolarGrid::fromSteps(double range_step_m, int n_range, double v_res_mps, int n_doppler,
                               int az_fft, int el_fft, double az_fov_deg, double el_fov_deg) {
  if (!(range_step_m > 0.0) || n_range < 1 || n_doppler < 1 || az_fft < 1 || el_fft < 1)
    throwError(ErrorCode::Config, "grid: invalid step parameters");
  PolarGrid g;
  g.az_fov_deg = az_fov_deg;
  g.el_fov_deg = el_fov_deg;
  g.range_step_m = range_step_m;
  g.v_res_mps = v_res_mps;

  g.range_edges.resize(n_range + 1);
  for (int r = 0; r <= n_range; ++r) g.range_edges[r] = (r - 0.5) * range_step_m;

  g.doppler_centers.resize(n_doppler);
  for (int k = 0; k < n_doppler; ++k) g.doppler_centers[k] = (k - n_doppler / 2) * v_res_mps;

  const int ka = azHalfBins(az_fft, az_fov_deg);
  if (ka < 1) throwError(ErrorCode::Config, "grid: az_fft too small for the azimuth FoV");
  const double dua = 2.0 / az_fft;
  for (int k = -ka; k < ka; ++k) g.az_sin_centers.push_back(dua * k);

  if (el_fft == 1) {
    g.el_sin_centers.push_back(0.0);
  } else {
    const int ke = std::max(1, elHalfBins(el_fft, el_fov_deg));
    const double due = 2.0 / el_fft;
    for (int k = -ke; k < ke; ++k) g.el_sin_centers.push_back(due * k);
  }
  return g;
}

PolarGrid PolarGrid::make(const WaveformConfig& cfg, int range_fft_factor, int n_range,
                          int az_fft, int el_fft, double az_fov_deg, double el_fov_deg) {
  cfg.validate();
  if (range_fft_factor < 1) throwError(ErrorCode::Config, "grid: range_fft_factor must be >= 1");
  const int range_fft = cfg.n_adc * range_fft_factor;
  if (n_range < 1 || n_range > range_fft)
    throwError(ErrorCode::Config, "grid: n_range must be in [1, n_adc * range_fft_factor]");

  const DerivedQuantities d = derivedQuantities(cfg);
  return fromSteps(d.r_max_m / range_fft, n_range, d.v_res_mps, cfg.n_chirps, az_fft, el_fft,
                   az_fov_deg, el_fov_deg);
}

std::size_t PolarGrid::azFftSize() const {
  return static_cast<std::size_t>(std::llround(2.0 / azSinStep()));
}

std::size_t PolarGrid::elFftSize() const {
  if (el_sin_centers.size() < 2) return 1;
  return static_cast<std::size_t>(std::llround(2.0 / elSinStep()));
}

bool PolarGrid::sameGrid(const PolarGrid& other) const {
  return range_edges == other.range_edges && doppler_centers == other.doppler_centers &&
         az_sin_centers == other.az_sin_centers && el_sin_centers == other.el_sin_centers;
}

}  // namespace radelft
