#include "radelft/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "radelft/errors.hpp"
#include "radelft/fft.hpp"
#include "radelft/parallel.hpp"

namespace radelft {
namespace pipe {

Tensor<Cplx> rangeDopplerMap(const AdcFrame& frame, const WaveformConfig& cfg,
                             const PolarGrid& grid) {
  const std::size_t n_fast = frame.numFast();
  const std::size_t n_slow = frame.numSlow();
  const std::size_t n_ch = frame.numChannels();
  if (n_fast != static_cast<std::size_t>(cfg.n_adc) ||
      n_slow != static_cast<std::size_t>(cfg.n_chirps))
    throwError(ErrorCode::ShapeMismatch, "rangeDopplerMap: frame shape does not match waveform");
  if (grid.numDoppler() != n_slow)
    throwError(ErrorCode::ShapeMismatch, "rangeDopplerMap: grid Doppler count != n_chirps");

  const std::size_t n_range = grid.numRange();
  const DerivedQuantities der = derivedQuantities(cfg);
  const std::size_t range_fft =
      static_cast<std::size_t>(std::llround(der.r_max_m / grid.rangeStep()));
  if (range_fft < n_fast || n_range > range_fft)
    throwError(ErrorCode::ShapeMismatch, "rangeDopplerMap: grid range axis inconsistent");

  const auto w_fast = hammingWindow(n_fast);
  const auto w_slow = hammingWindow(n_slow);

  Tensor<Cplx> out({n_range, n_slow, n_ch});

  // Fast-time transform per (slow, channel), then slow-time transform per
  // (range, channel) with an fftshift putting zero Doppler at bin D/2.
  parallelFor(n_ch, [&](std::size_t ch) {
    std::vector<Cplx> fast(n_fast);
    std::vector<Cplx> range_bins(n_range);
    Tensor<Cplx> stage({n_range, n_slow});
    for (std::size_t s = 0; s < n_slow; ++s) {
      for (std::size_t n = 0; n < n_fast; ++n) fast[n] = frame.data(n, s, ch) * w_fast[n];
      fftPadded(fast.data(), n_fast, range_bins.data(), range_fft, n_range);
      for (std::size_t r = 0; r < n_range; ++r) stage(r, s) = range_bins[r] * w_slow[s];
    }
    std::vector<Cplx> slow(n_slow);
    for (std::size_t r = 0; r < n_range; ++r) {
      fft(&stage(r, 0), slow.data(), n_slow);
      for (std::size_t k = 0; k < n_slow; ++k) {
        // FFT bin k (signed k' = k or k - D) maps to Doppler index k' + D/2.
        const std::size_t d = (k + n_slow / 2) % n_slow;
        out(r, d, ch) = slow[k];
      }
    }
  });
  return out;
}

double tdmaPhaseStep(const WaveformConfig& cfg, double v) {
  return 4.0 * M_PI * v * cfg.chirpStep() / cfg.lambda();
}

UnfoldResult estimateUnfoldedVelocity(const Tensor<Cplx>& rd, const WaveformConfig& cfg,
                                      const ArrayGeometry& geom, const PolarGrid& grid,
                                      std::size_t r_bin, std::size_t d_bin,
                                      const PipelineOptions& opt) {
  if (geom.overlapped_pairs.empty())
    throwError(ErrorCode::UnsupportedGeometry,
               "estimateUnfoldedVelocity: geometry has no overlapped virtual antennas");

  const DerivedQuantities der = derivedQuantities(cfg);
  const double v_bin = grid.doppler_centers[d_bin];
  const double dt = cfg.chirpStep();
  const double lambda = cfg.lambda();

  const int n_hyp = std::min(opt.max_fold_hypotheses, cfg.n_tx);
  const int q_lo = -(n_hyp / 2);
  const int q_hi = q_lo + n_hyp - 1;

  // Measured pair phasors, amplitude-weighted.
  struct Pair {
    Cplx phasor;
    double weight;
    int dk;
  };
  std::vector<Pair> pairs;
  pairs.reserve(geom.overlapped_pairs.size());
  for (const auto& [i, j] : geom.overlapped_pairs) {
    const Cplx zi = rd(r_bin, d_bin, static_cast<std::size_t>(i));
    const Cplx zj = rd(r_bin, d_bin, static_cast<std::size_t>(j));
    const Cplx prod = zj * std::conj(zi);
    const double w = std::abs(prod);
    if (w > 0.0)
      pairs.push_back({prod / w, w, geom.virtual_pos[j].tx - geom.virtual_pos[i].tx});
  }
  if (pairs.empty()) return UnfoldResult{v_bin, 0, 0.0, UnfoldStatus::Ambiguous};

  double weight_sum = 0.0;
  for (const auto& p : pairs) weight_sum += p.weight;

  // Cosine alignment between measured and predicted pair phases. A plain
  // magnitude would be blind to a common rotation when every pair shares the
  // same Delta-tx, so the real part is what discriminates the folds.
  int best_q = 0;
  double best_score = -2.0;
  for (int q = q_lo; q <= q_hi; ++q) {
    const double v_q = v_bin + 2.0 * der.v_max_mps * q;
    double score = 0.0;
    for (const auto& p : pairs) {
      const double predicted = 4.0 * M_PI * v_q * p.dk * dt / lambda;
      score += p.weight * (p.phasor * std::polar(1.0, -predicted)).real();
    }
    score /= weight_sum;
    if (score > best_score + 1e-12) {  // ties keep the lowest fold index
      best_score = score;
      best_q = q;
    }
  }

  UnfoldResult res;
  res.coherence = best_score;
  if (best_score < opt.unfold_coherence_min) {
    res.v_unfolded = v_bin;
    res.fold_index = 0;
    res.status = UnfoldStatus::Ambiguous;
    return res;
  }

  // Sub-bin refinement: the residual pair phase is a fine velocity reading,
  // (4 pi / lambda) (v - v_q) dk dt, well inside +-pi near the right fold.
  const double v_q = v_bin + 2.0 * der.v_max_mps * best_q;
  double dv_acc = 0.0;
  for (const auto& p : pairs) {
    const double predicted = 4.0 * M_PI * v_q * p.dk * dt / lambda;
    const double residual = std::arg(p.phasor * std::polar(1.0, -predicted));
    dv_acc += p.weight * residual * lambda / (4.0 * M_PI * p.dk * dt);
  }
  res.fold_index = best_q;
  res.v_unfolded = v_q + dv_acc / weight_sum;
  res.status = UnfoldStatus::Ok;
  return res;
}

void compensateTdmaPhaseCell(Tensor<Cplx>& rd, const WaveformConfig& cfg,
                             const ArrayGeometry& geom, std::size_t r_bin, std::size_t d_bin,
                             double v) {
  if (!std::isfinite(v)) throwError(ErrorCode::InvalidArgument, "compensateTdmaPhase: v not finite");
  const double step = tdmaPhaseStep(cfg, v);
  for (std::size_t ch = 0; ch < rd.dim(2); ++ch) {
    const int k = geom.virtual_pos[ch].tx;
    rd(r_bin, d_bin, ch) *= std::polar(1.0, -step * k);
  }
}

void compensateTdmaPhase(Tensor<Cplx>& rd, const WaveformConfig& cfg, const ArrayGeometry& geom,
                         double v) {
  for (std::size_t r = 0; r < rd.dim(0); ++r)
    for (std::size_t d = 0; d < rd.dim(1); ++d) compensateTdmaPhaseCell(rd, cfg, geom, r, d, v);
}

namespace {

struct ApertureLayout {
  int nx = 0, nz = 0;           // dense grid extents (half-wavelength units)
  std::vector<int> cell_of_ch;  // channel -> nx*z + x, or -1 when dropped
  std::vector<double> window;   // spatial Hamming per dense cell
  std::vector<int> count;       // channels landing on each dense cell
};

ApertureLayout apertureLayout(const ArrayGeometry& geom, bool no_elevation) {
  ApertureLayout lay;
  double max_x = 0.0, max_z = 0.0;
  for (const auto& v : geom.virtual_pos) {
    max_x = std::max(max_x, v.x);
    max_z = std::max(max_z, v.z);
  }
  lay.nx = static_cast<int>(std::llround(max_x)) + 1;
  lay.nz = no_elevation ? 1 : static_cast<int>(std::llround(max_z)) + 1;
  // Hamming along the dense azimuth aperture only. The elevation aperture is
  // a handful of sparse rows; a window there would crush the dense z = 0 row
  // (which carries most of the energy) without controlling any sidelobe.
  const auto wx = hammingWindow(lay.nx);
  lay.window.resize(static_cast<std::size_t>(lay.nx) * lay.nz);
  for (int z = 0; z < lay.nz; ++z)
    for (int x = 0; x < lay.nx; ++x)
      lay.window[static_cast<std::size_t>(z) * lay.nx + x] = wx[x];
  lay.count.assign(static_cast<std::size_t>(lay.nx) * lay.nz, 0);
  lay.cell_of_ch.assign(geom.virtual_pos.size(), -1);
  for (std::size_t ch = 0; ch < geom.virtual_pos.size(); ++ch) {
    const auto& v = geom.virtual_pos[ch];
    const int x = static_cast<int>(std::llround(v.x));
    const int z = static_cast<int>(std::llround(v.z));
    if (no_elevation && z != 0) continue;
    const int cell = z * lay.nx + x;
    lay.cell_of_ch[ch] = cell;
    lay.count[cell]++;
  }
  return lay;
}

// Signed bin index of a grid center u on an N-point DFT.
inline std::size_t fftBinOf(double u, std::size_t n_fft) {
  const long long k = std::llround(u * static_cast<double>(n_fft) / 2.0);
  return static_cast<std::size_t>((k % static_cast<long long>(n_fft) +
                                   static_cast<long long>(n_fft)) %
                                  static_cast<long long>(n_fft));
}

void angleSpectrumCell(const Tensor<Cplx>& rd, const ApertureLayout& lay, const PolarGrid& grid,
                       std::size_t r_bin, std::size_t d_bin, bool no_elevation,
                       Tensor<Cplx>& aperture, Tensor<double>& out) {
  const std::size_t na_fft = grid.azFftSize();
  const std::size_t ne_fft = no_elevation ? 1 : grid.elFftSize();
  const std::size_t n_az = grid.numAzimuth();
  const std::size_t n_el = no_elevation ? 1 : grid.numElevation();

  // aperture is [nz x na_fft] scratch: x-padded rows, overlaps averaged.
  aperture.fill(Cplx{});
  for (std::size_t ch = 0; ch < lay.cell_of_ch.size(); ++ch) {
    const int cell = lay.cell_of_ch[ch];
    if (cell < 0) continue;
    const int z = cell / lay.nx;
    const int x = cell % lay.nx;
    aperture(z, x) += rd(r_bin, d_bin, ch) * (lay.window[cell] / lay.count[cell]);
  }

  // Azimuth transform per z row, then elevation transform per kept az bin.
  std::vector<Cplx> row(na_fft);
  for (int z = 0; z < lay.nz; ++z) {
    fft(&aperture(z, 0), row.data(), na_fft);
    std::copy(row.begin(), row.end(), &aperture(z, 0));
  }
  std::vector<Cplx> col(ne_fft, Cplx{});
  std::vector<Cplx> col_out(ne_fft);
  for (std::size_t a = 0; a < n_az; ++a) {
    const std::size_t abin = fftBinOf(grid.az_sin_centers[a], na_fft);
    if (ne_fft == 1) {
      out(a, 0) = std::norm(aperture(0, abin));
      continue;
    }
    std::fill(col.begin(), col.end(), Cplx{});
    for (int z = 0; z < lay.nz; ++z) col[z] = aperture(z, abin);
    fft(col.data(), col_out.data(), ne_fft);
    for (std::size_t e = 0; e < n_el; ++e)
      out(a, e) = std::norm(col_out[fftBinOf(grid.el_sin_centers[e], ne_fft)]);
  }
}

}  // namespace

Tensor<double> angleSpectrum(const Tensor<Cplx>& rd, const ArrayGeometry& geom,
                             const PolarGrid& grid, std::size_t r_bin, std::size_t d_bin,
                             bool no_elevation) {
  const ApertureLayout lay = apertureLayout(geom, no_elevation);
  const std::size_t n_el = no_elevation ? 1 : grid.numElevation();
  Tensor<Cplx> aperture({static_cast<std::size_t>(lay.nz), grid.azFftSize()});
  Tensor<double> out({grid.numAzimuth(), n_el});
  angleSpectrumCell(rd, lay, grid, r_bin, d_bin, no_elevation, aperture, out);
  return out;
}

RadarCube doaEstimate(const Tensor<Cplx>& rd, const ArrayGeometry& geom, const PolarGrid& grid,
                      bool no_elevation, double timestamp_s) {
  const std::size_t n_r = rd.dim(0), n_d = rd.dim(1);
  if (n_r != grid.numRange() || n_d != grid.numDoppler())
    throwError(ErrorCode::ShapeMismatch, "doaEstimate: map shape does not match grid");
  const std::size_t n_az = grid.numAzimuth();
  const std::size_t n_el = no_elevation ? 1 : grid.numElevation();

  const ApertureLayout lay = apertureLayout(geom, no_elevation);

  RadarCube cube;
  cube.grid = grid;
  if (no_elevation) {
    cube.grid.el_sin_centers = {0.0};
  }
  cube.timestamp_s = timestamp_s;
  cube.power = Tensor<double>({n_r, n_d, n_az});
  cube.elev_argmax = Tensor<std::int32_t>({n_r, n_d, n_az});

  parallelFor(n_r * n_d, [&](std::size_t cell) {
    const std::size_t r = cell / n_d;
    const std::size_t d = cell % n_d;
    Tensor<Cplx> aperture({static_cast<std::size_t>(lay.nz), grid.azFftSize()});
    Tensor<double> spec({n_az, n_el});
    angleSpectrumCell(rd, lay, grid, r, d, no_elevation, aperture, spec);
    for (std::size_t a = 0; a < n_az; ++a) {
      double best = spec(a, 0);
      std::size_t best_e = 0;
      for (std::size_t e = 1; e < n_el; ++e)
        if (spec(a, e) > best) {  // lowest index wins ties
          best = spec(a, e);
          best_e = e;
        }
      cube.power(r, d, a) = best;
      cube.elev_argmax(r, d, a) = static_cast<std::int32_t>(best_e);
    }
  });
  return cube;
}

RadarCube processFrame(const AdcFrame& frame, const WaveformConfig& cfg,
                       const ArrayGeometry& geom, const PolarGrid& grid,
                       const PipelineOptions& opt) {
  Tensor<Cplx> rd = rangeDopplerMap(frame, cfg, grid);
  const std::size_t n_r = rd.dim(0), n_d = rd.dim(1), n_ch = rd.dim(2);

  if (cfg.n_tx > 1) {
    // Incoherent channel power per cell; the noise-floor gate bounds the
    // unfolding cost and keeps fold estimates off noise cells.
    Tensor<double> cell_power({n_r, n_d});
    double mean = 0.0;
    for (std::size_t r = 0; r < n_r; ++r)
      for (std::size_t d = 0; d < n_d; ++d) {
        double p = 0.0;
        for (std::size_t ch = 0; ch < n_ch; ++ch) p += std::norm(rd(r, d, ch));
        cell_power(r, d) = p;
        mean += p;
      }
    mean /= static_cast<double>(n_r * n_d);
    const double gate = mean * std::pow(10.0, opt.unfold_gate_db / 10.0);

    const bool can_unfold = !geom.overlapped_pairs.empty();
    parallelFor(n_r, [&](std::size_t r) {
      for (std::size_t d = 0; d < n_d; ++d) {
        double v = grid.doppler_centers[d];
        if (can_unfold && cell_power(r, d) > gate) {
          const UnfoldResult u = estimateUnfoldedVelocity(rd, cfg, geom, grid, r, d, opt);
          v = u.v_unfolded;
        }
        compensateTdmaPhaseCell(rd, cfg, geom, r, d, v);
      }
    });
  }
  return doaEstimate(rd, geom, grid, opt.no_elevation, frame.timestamp_s);
}

}  // namespace pipe
}  // namespace radelft
