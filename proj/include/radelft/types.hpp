#ifndef RADELFT_TYPES_HPP
#define RADELFT_TYPES_HPP

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "radelft/tensor.hpp"

namespace radelft {

inline constexpr double kSpeedOfLight = 299792458.0;

// FMCW chirp sequence parameters of a TDMA MIMO frame.
//
// Coordinate convention used throughout the project: y is boresight,
// x points right, z points up. Antenna positions are in half-wavelength
// units in the (x, z) plane.
struct WaveformConfig {
  double f_start_hz = 0.0;        // chirp start frequency
  double bandwidth_eff_hz = 0.0;  // slope * n_adc / f_s (sampled sweep)
  double slope_hz_per_s = 0.0;
  double chirp_len_s = 0.0;
  double idle_s = 0.0;
  int n_adc = 0;     // fast-time samples per chirp
  int n_chirps = 0;  // slow-time samples per Tx per frame
  double f_s_hz = 0.0;
  int n_tx = 0;
  int n_rx = 0;

  double chirpStep() const { return chirp_len_s + idle_s; }  // Tx-to-Tx firing interval
  double pri() const { return n_tx * chirpStep(); }
  double fc() const { return f_start_hz + bandwidth_eff_hz / 2.0; }
  double lambda() const { return kSpeedOfLight / fc(); }

  // Fills bandwidth_eff from the sampled sweep and validates positivity.
  static WaveformConfig make(double f_start_hz, double slope_hz_per_s, double chirp_len_s,
                             double idle_s, int n_adc, int n_chirps, double f_s_hz, int n_tx,
                             int n_rx);
  void validate() const;
};

struct DerivedQuantities {
  double range_res_m = 0.0;
  double r_max_m = 0.0;
  double v_max_mps = 0.0;
  double v_res_mps = 0.0;
  double pri_s = 0.0;
};

DerivedQuantities derivedQuantities(const WaveformConfig& cfg);

// One Tx-Rx combination of the MIMO array, acting as an antenna at the sum
// of the element positions.
struct VirtualElement {
  double x = 0.0;  // half-wavelength units
  double z = 0.0;
  int tx = 0;  // firing-order index
  int rx = 0;
};

struct ArrayGeometry {
  std::vector<std::pair<double, double>> tx_pos;  // (x, z), half-wavelength units
  std::vector<std::pair<double, double>> rx_pos;
  std::vector<VirtualElement> virtual_pos;               // size n_tx * n_rx
  std::vector<std::pair<int, int>> overlapped_pairs;     // virtual indices, same position, tx differs

  int numTx() const { return static_cast<int>(tx_pos.size()); }
  int numRx() const { return static_cast<int>(rx_pos.size()); }
  int numVirtual() const { return static_cast<int>(virtual_pos.size()); }
  int channelIndex(int tx, int rx) const { return tx * numRx() + rx; }

  static ArrayGeometry fromElements(std::vector<std::pair<double, double>> tx,
                                    std::vector<std::pair<double, double>> rx);

  // 12 Tx x 16 Rx cascade layout: 86-element dense azimuth ULA with a sparse
  // 7-row elevation aperture and overlapped virtual elements.
  static ArrayGeometry radelft();

  // 5 Tx x 8 Rx layout for fast tests: 20-element dense azimuth row,
  // Delta-tx = 1 overlaps, small elevation aperture.
  static ArrayGeometry deskScale();

  // 3 Tx x 4 Rx layout used by the miniature end-to-end fixtures.
  static ArrayGeometry mini();
};

// Non-uniform spherical grid the radar cube lives on. Azimuth/elevation bins
// are uniform in the direction sines (DFT bins), so the angular width grows
// toward the edge of the field of view.
struct PolarGrid {
  std::vector<double> range_edges;      // size R+1, uniform width
  std::vector<double> doppler_centers;  // size D, uniform, zero-centered
  std::vector<double> az_sin_centers;   // size A
  std::vector<double> el_sin_centers;   // size E
  double az_fov_deg = 70.0;
  double el_fov_deg = 20.0;
  double range_step_m = 0.0;  // exact construction steps (bit-stable round trips)
  double v_res_mps = 0.0;

  std::size_t numRange() const { return range_edges.empty() ? 0 : range_edges.size() - 1; }
  std::size_t numDoppler() const { return doppler_centers.size(); }
  std::size_t numAzimuth() const { return az_sin_centers.size(); }
  std::size_t numElevation() const { return el_sin_centers.size(); }

  double rangeStep() const { return range_step_m; }
  double rangeCenter(std::size_t r) const { return 0.5 * (range_edges[r] + range_edges[r + 1]); }
  double dopplerStep() const { return v_res_mps; }
  double azSinStep() const {
    return az_sin_centers.size() > 1 ? az_sin_centers[1] - az_sin_centers[0] : 2.0;
  }
  double elSinStep() const {
    return el_sin_centers.size() > 1 ? el_sin_centers[1] - el_sin_centers[0] : 2.0;
  }

  // DFT sizes that generated the sine grids.
  std::size_t azFftSize() const;
  std::size_t elFftSize() const;

  bool sameGrid(const PolarGrid& other) const;

  // range_fft_factor: fast-time zero-padding factor; n_range bins are kept.
  // az_fft/el_fft: angle transform sizes; the FoV crop keeps the bins whose
  // direction sine falls inside the aperture (all of them for el_fft == 1).
  static PolarGrid make(const WaveformConfig& cfg, int range_fft_factor, int n_range, int az_fft,
                        int el_fft, double az_fov_deg, double el_fov_deg);

  // Direct construction from bin steps (bit-exact sidecar round trips).
  static PolarGrid fromSteps(double range_step_m, int n_range, double v_res_mps, int n_doppler,
                             int az_fft, int el_fft, double az_fov_deg, double el_fov_deg);
};

// Complex baseband samples of one coherent processing interval, already
// de-interleaved into per-Tx slow time: [n_fast x n_chirps x n_vchan].
struct AdcFrame {
  Tensor<Cplx> data;
  double timestamp_s = 0.0;
  std::vector<int> tx_of_chirp;  // raw chirp index -> firing Tx index

  std::size_t numFast() const { return data.dim(0); }
  std::size_t numSlow() const { return data.dim(1); }
  std::size_t numChannels() const { return data.dim(2); }
};

// Power + argmax-elevation representation on the polar grid:
// power[r][d][a] (linear), elev_argmax[r][d][a] in [0, E).
struct RadarCube {
  Tensor<double> power;
  Tensor<std::int32_t> elev_argmax;
  PolarGrid grid;
  double timestamp_s = 0.0;
};

// Binary detection cube occ[r][a][e] on the same grid.
struct OccupancyGrid {
  Tensor<std::uint8_t> occ;
  PolarGrid grid;

  static OccupancyGrid zeros(const PolarGrid& g) {
    return OccupancyGrid{Tensor<std::uint8_t>({g.numRange(), g.numAzimuth(), g.numElevation()}),
                         g};
  }
  std::size_t countOccupied() const {
    std::size_t n = 0;
    for (auto v : occ) n += v != 0;
    return n;
  }
};

// Cartesian points with optional per-point Doppler (m/s) and power (dB)
// features; featureCount() is 3, 4 or 5.
struct PointCloud {
  std::vector<double> x, y, z;
  std::vector<double> doppler;  // empty or size N
  std::vector<double> power_db;

  std::size_t size() const { return x.size(); }
  int featureCount() const {
    return 3 + (doppler.empty() ? 0 : 1) + (power_db.empty() ? 0 : 1);
  }
  void append(double px, double py, double pz) {
    x.push_back(px);
    y.push_back(py);
    z.push_back(pz);
  }
};

}  // namespace radelft

#endif
