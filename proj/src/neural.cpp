#include "radelft/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "radelft/errors.hpp"

namespace radelft {
namespace nn {

Activation activationFromName(const std::string& name) {
  if (name == "none") return Activation::None;
  if (name == "relu") return Activation::ReLU;
  if (name == "leaky_relu") return Activation::LeakyReLU;
  if (name == "tanh") return Activation::Tanh;
  if (name == "softplus") return Activation::Softplus;
  throwError(ErrorCode::Config, "detector: unknown activation '" + name + "'");
}

std::string activationName(Activation a) {
  switch (a) {
    case Activation::None: return "none";
    case Activation::ReLU: return "relu";
    case Activation::LeakyReLU: return "leaky_relu";
    case Activation::Tanh: return "tanh";
    case Activation::Softplus: return "softplus";
  }
  return "none";
}

void DetectorConfig::validate() const {
  if (frames < 1) throwError(ErrorCode::Config, "detector: frames must be >= 1");
  if (enc_channels < 2 || enc_channels % 2 != 0)
    throwError(ErrorCode::Config, "detector: enc_channels must be even and >= 2");
  if (backbone_channels < 1) throwError(ErrorCode::Config, "detector: backbone_channels >= 1");
  if (elevation_bins < 1) throwError(ErrorCode::Config, "detector: elevation_bins >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throwError(ErrorCode::Config, "detector: alpha in [0,1]");
  if (gamma < 0.0) throwError(ErrorCode::Config, "detector: gamma >= 0");
  if (!(prob_threshold > 0.0 && prob_threshold < 1.0) && prob_threshold != 0.0 &&
      prob_threshold != 1.0)
    throwError(ErrorCode::Config, "detector: prob_threshold in [0,1]");
  if (batch_size < 1 || epochs < 0) throwError(ErrorCode::Config, "detector: bad batch/epochs");
  if (kernel_rad < 1 || kernel_az < 1 || kernel_dop < 1 || stride_dop < 1)
    throwError(ErrorCode::Config, "detector: kernel sizes and strides must be >= 1");
}

double focalLossTerm(double p, int y, double alpha, double gamma) {
  const double pt = y ? p : 1.0 - p;
  const double at = y ? alpha : 1.0 - alpha;
  return -at * std::pow(1.0 - pt, gamma) * std::log(std::max(pt, 1e-12));
}

Tensor<float> buildInput(const std::vector<const RadarCube*>& cubes, const DetectorConfig& cfg) {
  if (cubes.size() != static_cast<std::size_t>(cfg.frames))
    throwError(ErrorCode::ShapeMismatch, "buildInput: need exactly T cubes");
  for (const auto* c : cubes)
    if (!c->grid.sameGrid(cubes[0]->grid))
      throwError(ErrorCode::ShapeMismatch, "buildInput: cubes on different grids");

  const std::size_t R = cubes[0]->power.dim(0);
  const std::size_t D = cubes[0]->power.dim(1);
  const std::size_t A = cubes[0]->power.dim(2);
  const std::size_t E = cubes[0]->grid.numElevation();
  const std::size_t D_out = cfg.ablations.no_doppler ? 1 : D;
  constexpr double kFloor = 1e-12;

  Tensor<float> input({cubes.size(), 2, R, A, D_out});
  for (std::size_t t = 0; t < cubes.size(); ++t) {
    const RadarCube& cube = *cubes[t];

    Tensor<double> p({R, A, D});
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t d = 0; d < D; ++d)
        for (std::size_t a = 0; a < A; ++a) p(r, a, d) = cube.power(r, d, a);

    if (cfg.ablations.quantile_prefilter) {
      std::vector<double> sorted(p.begin(), p.end());
      const std::size_t rank =
          static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(sorted.size()))) - 1;
      std::nth_element(sorted.begin(), sorted.begin() + rank, sorted.end());
      const double q = sorted[rank];
      for (auto& v : p)
        if (v <= q) v = kFloor;  // only cells above the 0.9 quantile survive
    }

    // Power channel: optional Doppler collapse, then dB and per-frame
    // standardization (zero-variance frames become all zeros).
    std::vector<double> db(R * A * D_out);
    std::size_t idx = 0;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t a = 0; a < A; ++a) {
        if (cfg.ablations.no_doppler) {
          double mean = 0.0;
          for (std::size_t d = 0; d < D; ++d) mean += p(r, a, d);
          mean /= static_cast<double>(D);
          db[idx++] = 10.0 * std::log10(std::max(mean, kFloor));
        } else {
          for (std::size_t d = 0; d < D; ++d)
            db[idx++] = 10.0 * std::log10(std::max(p(r, a, d), kFloor));
        }
      }
    double mean = 0.0;
    for (double v : db) mean += v;
    mean /= static_cast<double>(db.size());
    double var = 0.0;
    for (double v : db) var += (v - mean) * (v - mean);
    const double sd = std::sqrt(var / static_cast<double>(db.size()));

    idx = 0;
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t a = 0; a < A; ++a)
        for (std::size_t d = 0; d < D_out; ++d) {
          input(t, 0, r, a, d) = sd > 1e-12 ? static_cast<float>((db[idx] - mean) / sd) : 0.0f;
          ++idx;
        }

    const double e_scale = 1.0 / static_cast<double>(std::max<std::size_t>(E - 1, 1));
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t a = 0; a < A; ++a) {
        if (cfg.ablations.no_doppler) {
          double m = 0.0;
          for (std::size_t d = 0; d < D; ++d) m += cube.elev_argmax(r, d, a) * e_scale;
          input(t, 1, r, a, 0) = static_cast<float>(m / static_cast<double>(D));
        } else {
          for (std::size_t d = 0; d < D; ++d)
            input(t, 1, r, a, d) = static_cast<float>(cube.elev_argmax(r, d, a) * e_scale);
        }
      }
  }
  return input;
}

namespace {

class Adam {
public:
  Adam(std::vector<ParamRef<float>> params, double lr) : params_(std::move(params)), lr_(lr) {
    for (const auto& p : params_) {
      m_.emplace_back(p.value->shape());
      v_.emplace_back(p.value->shape());
    }
  }

  void step() {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Tensor<float>& w = *params_[i].value;
      const Tensor<float>& g = *params_[i].grad;
      Tensor<float>& m = m_[i];
      Tensor<float>& v = v_[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        const double gj = g[j];
        const double mj = kBeta1 * m[j] + (1.0 - kBeta1) * gj;
        const double vj = kBeta2 * v[j] + (1.0 - kBeta2) * gj * gj;
        m[j] = static_cast<float>(mj);
        v[j] = static_cast<float>(vj);
        w[j] = static_cast<float>(w[j] - lr_ * (mj / c1) / (std::sqrt(vj / c2) + kEps));
      }
    }
  }

private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;
  std::vector<ParamRef<float>> params_;
  std::vector<Tensor<float>> m_, v_;
  double lr_;
  int t_ = 0;
};

}  // namespace

TrainResult trainDetector(const std::vector<TrainSample>& samples, const DetectorConfig& cfg,
                          std::uint64_t seed) {
  cfg.validate();
  if (samples.empty()) throwError(ErrorCode::InvalidArgument, "trainDetector: no samples");
  for (const auto& s : samples)
    if (!s.input.sameShape(samples[0].input) || !s.target.sameShape(samples[0].target))
      throwError(ErrorCode::ShapeMismatch, "trainDetector: inconsistent sample shapes");

  // 90/10 split by scene: every tenth scene (sorted ids) validates.
  std::set<int> scene_ids;
  for (const auto& s : samples) scene_ids.insert(s.scene_id);
  std::set<int> val_scenes;
  std::size_t pos = 0;
  for (int id : scene_ids) {
    if (pos % 10 == 9) val_scenes.insert(id);
    ++pos;
  }
  std::vector<std::size_t> train_idx, val_idx;
  for (std::size_t i = 0; i < samples.size(); ++i)
    (val_scenes.count(samples[i].scene_id) ? val_idx : train_idx).push_back(i);
  if (train_idx.empty()) throwError(ErrorCode::InvalidArgument, "trainDetector: empty train split");

  TrainResult res;
  res.model = DetectorModel::init(cfg, seed);
  Adam opt(res.model.params(), cfg.learning_rate);

  ModelCache<float> cache;
  Tensor<float> grad;
  long long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order = train_idx;
    std::mt19937_64 rng = makeRng(mixSeed(seed, 0xE70C, epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_loss = 0.0;
    std::size_t done = 0;
    while (done < order.size()) {
      const std::size_t batch = std::min<std::size_t>(cfg.batch_size, order.size() - done);
      res.model.zeroGrad();
      for (std::size_t b = 0; b < batch; ++b) {
        const TrainSample& s = samples[order[done + b]];
        Tensor<float> logits = modelForward(res.model, s.input, cache);
        const double loss = focalLoss(logits, s.target, cfg.alpha, cfg.gamma, &grad);
        if (!std::isfinite(loss))
          throwError(ErrorCode::Numeric, "trainDetector: non-finite loss at step " +
                                             std::to_string(step) + " (loss=" +
                                             std::to_string(loss) + ")");
        const float scale = 1.0f / static_cast<float>(batch);
        for (auto& g : grad) g *= scale;
        modelBackward(res.model, s.input, cache, grad);
        epoch_loss += loss;
        ++step;
      }
      opt.step();
      done += batch;
    }
    res.train_loss.push_back(epoch_loss / static_cast<double>(order.size()));

    if (val_idx.empty()) {
      res.val_loss.push_back(res.train_loss.back());
    } else {
      double val = 0.0;
      for (std::size_t i : val_idx) {
        Tensor<float> logits = modelForward(res.model, samples[i].input, cache);
        val += focalLoss(logits, samples[i].target, cfg.alpha, cfg.gamma);
      }
      res.val_loss.push_back(val / static_cast<double>(val_idx.size()));
    }
  }
  return res;
}

Tensor<float> predictProbabilities(DetectorModel& model,
                                   const std::vector<const RadarCube*>& cubes) {
  const Tensor<float> input = buildInput(cubes, model.cfg);
  ModelCache<float> cache;
  const Tensor<float> logits = modelForward(model, input, cache);
  const std::size_t Tn = logits.dim(0), E = logits.dim(1), R = logits.dim(2), A = logits.dim(3);
  Tensor<float> probs({Tn, R, A, E});
  for (std::size_t t = 0; t < Tn; ++t)
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a)
          probs(t, r, a, e) = detail::stableSigmoid(logits(t, e, r, a));
  return probs;
}

std::vector<OccupancyGrid> predictOccupancy(DetectorModel& model,
                                            const std::vector<const RadarCube*>& cubes,
                                            double threshold) {
  const Tensor<float> probs = predictProbabilities(model, cubes);
  const std::size_t Tn = probs.dim(0);
  std::vector<OccupancyGrid> out;
  out.reserve(Tn);
  for (std::size_t t = 0; t < Tn; ++t) {
    OccupancyGrid g = OccupancyGrid::zeros(cubes[t]->grid);
    if (g.occ.dim(0) != probs.dim(1) || g.occ.dim(1) != probs.dim(2) ||
        g.occ.dim(2) != probs.dim(3))
      throwError(ErrorCode::ShapeMismatch, "predictOccupancy: grid does not match model output");
    for (std::size_t i = 0; i < g.occ.size(); ++i)
      g.occ[i] = probs[t * g.occ.size() + i] > threshold ? 1 : 0;
    out.push_back(std::move(g));
  }
  return out;
}

double gradientCheck(DetectorModelT<double>& model, const Tensor<double>& input,
                     const Tensor<std::uint8_t>& target, double eps) {
  ModelCache<double> cache;
  Tensor<double> grad;
  model.zeroGrad();
  {
    const Tensor<double> logits = modelForward(model, input, cache);
    focalLoss(logits, target, model.cfg.alpha, model.cfg.gamma, &grad);
    modelBackward(model, input, cache, grad);
  }
  std::vector<Tensor<double>> analytic;
  for (auto& p : model.params()) analytic.push_back(*p.grad);

  auto lossOnly = [&]() {
    const Tensor<double> logits = modelForward(model, input, cache);
    return focalLoss(logits, target, model.cfg.alpha, model.cfg.gamma);
  };

  double max_rel = 0.0;
  auto params = model.params();
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<double>& w = *params[pi].value;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double saved = w[j];
      w[j] = saved + eps;
      const double lp = lossOnly();
      w[j] = saved - eps;
      const double lm = lossOnly();
      w[j] = saved;
      const double numeric = (lp - lm) / (2.0 * eps);
      const double a = analytic[pi][j];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace nn
}  // namespace radelft
