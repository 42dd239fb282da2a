#ifndef RADELFT_CFAR_HPP
#define RADELFT_CFAR_HPP

#include <cstdint>
#include <vector>

#include "radelft/types.hpp"

namespace radelft {
namespace cfar {

enum class CfarKind { CA, OS };

struct CfarConfig {
  CfarKind kind = CfarKind::OS;
  std::vector<std::size_t> dims;   // tensor axes forming the sliding window
  int n_train = 16;                // training cells per side per axis
  int n_guard = 0;                 // guard cells per side per axis
  double rank_fraction = 0.75;     // OS only; k = round(rank_fraction * N)
  double target_pfa = 1e-4;
  std::vector<bool> wrap;          // per dims entry; empty = truncate everywhere

  void validate(std::size_t tensor_rank) const;
};

// Cell-averaging threshold factor: alpha = N (Pfa^(-1/N) - 1).
double caThresholdFactor(int n_train_cells, double pfa);

// Ordered-statistic threshold factor, solved by bisection from
// Pfa = prod_{i=0}^{k-1} (N - i) / (N - i + alpha) to 1e-10 residual.
double osThresholdFactor(int n_train_cells, int rank, double pfa);

// Sliding-window detectors over the axes in cfg.dims. Cells on truncating
// edges use the reduced training count with a recomputed threshold factor;
// wrapped axes are treated as periodic.
Tensor<std::uint8_t> caCfar(const Tensor<double>& power, const CfarConfig& cfg);
Tensor<std::uint8_t> osCfar(const Tensor<double>& power, const CfarConfig& cfg);

// The reference cascade: 2D OS CFAR in range-azimuth per Doppler slice,
// AND-combined with a 1D OS CFAR along Doppler (periodic axis), survivors
// placed at (r, a, elev_argmax[r, d, a]) with an OR across Doppler.
OccupancyGrid cascadeDetect(const RadarCube& cube, const CfarConfig& cfg2d,
                            const CfarConfig& cfg1d);

// Cascade with the configs' dims/wrap filled for the cube layout.
OccupancyGrid cascadeDetectDefault(const RadarCube& cube, const CfarConfig& base2d,
                                   const CfarConfig& base1d);

}  // namespace cfar
}  // namespace radelft

#endif
