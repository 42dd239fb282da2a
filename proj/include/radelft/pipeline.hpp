#ifndef RADELFT_PIPELINE_HPP
#define RADELFT_PIPELINE_HPP

#include "radelft/types.hpp"

namespace radelft {
namespace pipe {

struct PipelineOptions {
  double unfold_gate_db = 6.0;        // cells below mean + gate are not unfolded
  double unfold_coherence_min = 0.6;  // below this the cell is ambiguous, fold 0
  int max_fold_hypotheses = 7;        // clamped to n_tx (TDMA timing limit)
  bool no_elevation = false;          // drop z != 0 channels, E = 1 output
};

// Hamming window + DFT in fast time (zero-padded by the grid's range factor,
// R bins kept) and per-Tx slow time (zero-Doppler centered). Output is
// [R x D x n_vchan].
Tensor<Cplx> rangeDopplerMap(const AdcFrame& frame, const WaveformConfig& cfg,
                             const PolarGrid& grid);

enum class UnfoldStatus { Ok, Ambiguous };

struct UnfoldResult {
  double v_unfolded = 0.0;
  int fold_index = 0;
  double coherence = 0.0;
  UnfoldStatus status = UnfoldStatus::Ok;
};

// Velocity ambiguity resolution from the overlapped virtual antennas. The
// measured phase difference of an overlapped pair contains only the TDMA
// motion term (the array term cancels), so each fold hypothesis
// v_q = v_bin + 2 v_max q predicts the pair phases exactly; the hypothesis
// maximizing amplitude-weighted phase coherence across all pairs wins.
// The hypothesis count is bounded by max_fold_hypotheses (7 at full scale)
// and by n_tx, beyond which hypotheses are indistinguishable.
UnfoldResult estimateUnfoldedVelocity(const Tensor<Cplx>& rd, const WaveformConfig& cfg,
                                      const ArrayGeometry& geom, const PolarGrid& grid,
                                      std::size_t r_bin, std::size_t d_bin,
                                      const PipelineOptions& opt = {});

// Phase step of the TDMA migration term per Tx slot: 4 pi v dt / lambda.
double tdmaPhaseStep(const WaveformConfig& cfg, double v);

// Multiplies the channel fed by Tx slot k with exp(-j k * tdmaPhaseStep(v))
// for one (r, d) cell, in place.
void compensateTdmaPhaseCell(Tensor<Cplx>& rd, const WaveformConfig& cfg,
                             const ArrayGeometry& geom, std::size_t r_bin, std::size_t d_bin,
                             double v);

// Whole-tensor variant with a single velocity (tests and fixtures).
void compensateTdmaPhase(Tensor<Cplx>& rd, const WaveformConfig& cfg, const ArrayGeometry& geom,
                         double v);

// Angle power spectrum of one (r, d) cell: scatter the channel vector into
// the dense virtual aperture, Hamming in both spatial dims, zero-padded 2D
// DFT, FoV crop; returns power [A x E].
Tensor<double> angleSpectrum(const Tensor<Cplx>& rd, const ArrayGeometry& geom,
                             const PolarGrid& grid, std::size_t r_bin, std::size_t d_bin,
                             bool no_elevation = false);

// Full direction-of-arrival stage: per (r, d) angle spectra, power maxed
// over elevation with the argmax bin recorded (lowest index on ties).
RadarCube doaEstimate(const Tensor<Cplx>& rd, const ArrayGeometry& geom, const PolarGrid& grid,
                      bool no_elevation = false, double timestamp_s = 0.0);

// rangeDopplerMap -> gated per-cell unfolding -> TDMA compensation ->
// doaEstimate.
RadarCube processFrame(const AdcFrame& frame, const WaveformConfig& cfg,
                       const ArrayGeometry& geom, const PolarGrid& grid,
                       const PipelineOptions& opt = {});

}  // namespace pipe
}  // namespace radelft

#endif
