#ifndef RADELFT_NEURAL_HPP
#define RADELFT_NEURAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "radelft/nn_ops.hpp"
#include "radelft/rng.hpp"
#include "radelft/types.hpp"

namespace radelft {
namespace nn {

struct Ablations {
  bool no_doppler = false;
  bool quantile_prefilter = false;
  bool no_time = false;
  bool no_elevation = false;
};

struct DetectorConfig {
  int frames = 3;              // T
  int enc_channels = 16;       // Doppler encoder output channels (64 at full scale)
  int backbone_channels = 16;  // base width of the 2-D encoder-decoder
  int elevation_bins = 16;     // E, matches the grid
  int kernel_rad = 3, kernel_az = 3, kernel_dop = 3;
  int stride_dop = 2;          // Doppler stride of the encoder convolutions
  double alpha = 0.75;  // focal weighting for occupied voxels
  double gamma = 2.0;   // focusing factor
  double learning_rate = 1e-3;
  int batch_size = 2;
  int epochs = 10;
  double prob_threshold = 0.5;
  Activation activation = Activation::LeakyReLU;
  Ablations ablations;
  std::uint64_t seed = 1;

  void validate() const;
};

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

// The three-stage detector: DopplerEncoder (two strided 3-D convolutions and
// a full-axis max pool folding Doppler into channels), a 2-D convolutional
// encoder-decoder with skip connections emitting E elevation logits per
// (r, a), and a six-layer 3-D temporal coherence head applied across the T
// stacked frames with a residual connection. The per-frame trunk weights are
// shared across frames.
template <typename T>
struct DetectorModelT {
  DetectorConfig cfg;
  Conv3d<T> enc1, enc2;
  Conv3d<T> b0, d1, d2, mid, u1, u2, head;
  std::vector<Conv3d<T>> temporal;

  std::vector<ParamRef<T>> params();
  void zeroGrad();
  std::size_t paramCount();

  static DetectorModelT init(const DetectorConfig& cfg, std::uint64_t seed);
};

using DetectorModel = DetectorModelT<float>;

template <typename T>
struct FrameCache {
  Tensor<T> xt, e1_pre, e1, e2_pre, e2, pooled;
  Tensor<std::int32_t> pool_arg;
  std::size_t pool_depth = 0;
  Tensor<T> b0_pre, b0o, d1_pre, d1o, d2_pre, d2o, mid_pre, mido;
  Tensor<T> u1_up, u1_pre, u1o, u2_up, u2_pre, u2o;
};

template <typename T>
struct ModelCache {
  std::vector<FrameCache<T>> frames;
  Tensor<T> pre_logits;                  // [T][E][R][A]
  Tensor<T> temporal_in;                 // [E][T][R][A]
  std::vector<Tensor<T>> temporal_pre;   // per layer
  std::vector<Tensor<T>> temporal_post;  // per layer (post-activation)
};

// Doppler encoder: [2][R][A][D] -> [C][R][A][1] (two strided convolutions,
// then a max pool over the whole remaining Doppler axis).
template <typename T>
Tensor<T> encoderForward(const DetectorModelT<T>& m, const Tensor<T>& xt,
                         FrameCache<T>* cache = nullptr);

// Backbone: [C][R][A][1] -> elevation logits [E][R][A][1].
template <typename T>
Tensor<T> backboneForward(const DetectorModelT<T>& m, const Tensor<T>& pooled,
                          FrameCache<T>* cache = nullptr);

// Temporal coherence head over stacked per-frame logits [T][E][R][A];
// identity under the no_time ablation.
template <typename T>
Tensor<T> temporalForward(const DetectorModelT<T>& m, const Tensor<T>& pre_logits,
                          ModelCache<T>* cache = nullptr);

// input is [T][2][R][A][D]; returns logits [T][E][R][A].
template <typename T>
Tensor<T> modelForward(const DetectorModelT<T>& m, const Tensor<T>& input, ModelCache<T>& cache);

// Backpropagates d(loss)/d(logits), accumulating parameter gradients.
template <typename T>
void modelBackward(DetectorModelT<T>& m, const Tensor<T>& input, const ModelCache<T>& cache,
                   const Tensor<T>& g_logits);

// Focal loss, mean over voxels: -alpha_t (1 - p_t)^gamma log(p_t) with
// p = sigmoid(logit) and the log clamped at 1e-12. logits are [T][E][R][A],
// targets [T][R][A][E].
template <typename T>
double focalLoss(const Tensor<T>& logits, const Tensor<std::uint8_t>& target, double alpha,
                 double gamma, Tensor<T>* grad = nullptr);

// Scalar form used by tests and oracles.
double focalLossTerm(double p, int y, double alpha, double gamma);

// Standardized network input: channel 0 is per-frame standardized dB power,
// channel 1 the elevation argmax bin scaled to [0, 1]. Ablations:
// quantile_prefilter floors power cells at or below the per-frame 0.9
// quantile; no_doppler replaces the Doppler axis by its mean (D -> 1).
Tensor<float> buildInput(const std::vector<const RadarCube*>& cubes, const DetectorConfig& cfg);

struct TrainSample {
  Tensor<float> input;           // [T][2][R][A][D]
  Tensor<std::uint8_t> target;   // [T][R][A][E]
  int scene_id = 0;
};

struct TrainResult {
  DetectorModel model;
  std::vector<double> train_loss;  // per-epoch means
  std::vector<double> val_loss;
};

// Adam on the focal loss with a deterministic 90/10 split by scene (every
// tenth scene in sorted id order validates). Aborts with a diagnostic on a
// non-finite loss.
TrainResult trainDetector(const std::vector<TrainSample>& samples, const DetectorConfig& cfg,
                          std::uint64_t seed);

// Per-frame occupancy probabilities, [T][R][A][E].
Tensor<float> predictProbabilities(DetectorModel& model,
                                   const std::vector<const RadarCube*>& cubes);

// sigmoid(logits) > threshold per voxel.
std::vector<OccupancyGrid> predictOccupancy(DetectorModel& model,
                                            const std::vector<const RadarCube*>& cubes,
                                            double threshold);

// Central finite differences against the analytic gradient over every
// parameter; returns max |a - n| / max(|a|, |n|, 1e-8).
double gradientCheck(DetectorModelT<double>& model, const Tensor<double>& input,
                     const Tensor<std::uint8_t>& target, double eps);

}  // namespace nn
}  // namespace radelft

#include "radelft/neural_impl.hpp"

#endif
