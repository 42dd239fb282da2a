#ifndef RADELFT_SIMULATE_HPP
#define RADELFT_SIMULATE_HPP

#include "radelft/scene.hpp"
#include "radelft/types.hpp"

namespace radelft {
namespace sim {

// Dechirped FMCW beat-tone signal model with TDMA interleaving. For each
// reflector, chirp c (fired by Tx t(c) at absolute time tau_c) and receiver,
// fast-time sample n accumulates
//   amp * exp(j 2 pi f_b n / f_s + j phi_dopp(tau_c) + j phi_array)
// with f_b = 2 R(tau_c) slope / c, phi_dopp = 4 pi R(tau_c) / lambda and
// phi_array = pi (u x_v + w z_v), (u, w) the direction sines of the
// reflector and (x_v, z_v) the virtual element position in half-wavelength
// units. Range is held constant within a chirp (stop-and-go). Complex white
// Gaussian noise of the given power is added, and chirps are de-interleaved
// into per-Tx slow time. Reflectors beyond r_max are an error; range
// aliasing is not modeled.
AdcFrame synthesizeAdc(const Scene& scene, const WaveformConfig& cfg, const ArrayGeometry& geom,
                       double noise_power, int frame_index);

// Deterministic pseudo-lidar cloud for one frame: seeded surface samples of
// every extended target, one point per point scatterer, plus ground-plane
// points at z = -sensor_height so the ground-removal stage has work to do.
// r_max bounds the ground patch when scene.ground_range_m is 0.
PointCloud sampleGroundTruth(const Scene& scene, int frame_index, double r_max);

// Same cloud with per-point origin labels (tests use them to check ground
// removal): 0 = ground, 1 = target surface, 2 = point scatterer.
PointCloud sampleGroundTruthLabeled(const Scene& scene, int frame_index, double r_max,
                                    std::vector<int>* labels);

}  // namespace sim
}  // namespace radelft

#endif
