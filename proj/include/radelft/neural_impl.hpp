#ifndef RADELFT_NEURAL_IMPL_HPP
#define RADELFT_NEURAL_IMPL_HPP

// Template definitions for neural.hpp; include that header instead.

#include <algorithm>
#include <cmath>

#include "radelft/errors.hpp"

namespace radelft {
namespace nn {

namespace detail {

template <typename T>
void glorotInit(Tensor<T>& w, std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> uni(-limit, limit);
  for (auto& v : w) v = static_cast<T>(uni(rng));
}

template <typename T>
void initConv(Conv3d<T>& c, std::mt19937_64& rng, bool zero = false) {
  if (zero) {
    c.w.fill(T(0));
  } else {
    const std::size_t k = static_cast<std::size_t>(c.kx) * c.ky * c.kz;
    glorotInit(c.w, c.ci * k, c.co * k, rng);
  }
  c.b.fill(T(0));
}

template <typename T>
inline T stableSigmoid(T z) {
  if (z >= T(0)) return T(1) / (T(1) + T(std::exp(-static_cast<double>(z))));
  const double e = std::exp(static_cast<double>(z));
  return static_cast<T>(e / (1.0 + e));
}

template <typename T>
Tensor<T> addTensors(const Tensor<T>& a, const Tensor<T>& b) {
  Tensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

// [T][E][R][A] <-> [E][T][R][A]
template <typename T>
Tensor<T> toTemporalLayout(const Tensor<T>& x) {
  const std::size_t Tn = x.dim(0), E = x.dim(1), R = x.dim(2), A = x.dim(3);
  Tensor<T> out({E, Tn, R, A});
  for (std::size_t t = 0; t < Tn; ++t)
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a) out(e, t, r, a) = x(t, e, r, a);
  return out;
}

template <typename T>
Tensor<T> fromTemporalLayout(const Tensor<T>& x) {
  const std::size_t E = x.dim(0), Tn = x.dim(1), R = x.dim(2), A = x.dim(3);
  Tensor<T> out({Tn, E, R, A});
  for (std::size_t e = 0; e < E; ++e)
    for (std::size_t t = 0; t < Tn; ++t)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a) out(t, e, r, a) = x(e, t, r, a);
  return out;
}

}  // namespace detail

template <typename T>
DetectorModelT<T> DetectorModelT<T>::init(const DetectorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DetectorModelT<T> m;
  m.cfg = cfg;
  const int C = cfg.enc_channels;
  const int B = cfg.backbone_channels;
  const int E = cfg.elevation_bins;
  const int kr = cfg.kernel_rad, ka = cfg.kernel_az, kd = cfg.kernel_dop;

  m.enc1 = Conv3d<T>::make(2, C / 2, kr, ka, kd, 1, 1, cfg.stride_dop, kr / 2, ka / 2, kd / 2);
  m.enc2 = Conv3d<T>::make(C / 2, C, kr, ka, kd, 1, 1, cfg.stride_dop, kr / 2, ka / 2, kd / 2);
  m.b0 = Conv3d<T>::make(C, B, 3, 3, 1, 1, 1, 1, 1, 1, 0);
  m.d1 = Conv3d<T>::make(B, 2 * B, 3, 3, 1, 2, 2, 1, 1, 1, 0);
  m.d2 = Conv3d<T>::make(2 * B, 4 * B, 3, 3, 1, 2, 2, 1, 1, 1, 0);
  m.mid = Conv3d<T>::make(4 * B, 4 * B, 3, 3, 1, 1, 1, 1, 1, 1, 0);
  m.u1 = Conv3d<T>::make(4 * B, 2 * B, 3, 3, 1, 1, 1, 1, 1, 1, 0);
  m.u2 = Conv3d<T>::make(2 * B, B, 3, 3, 1, 1, 1, 1, 1, 1, 0);
  m.head = Conv3d<T>::make(B, E, 1, 1, 1, 1, 1, 1, 0, 0, 0);
  if (!cfg.ablations.no_time)
    for (int i = 0; i < 6; ++i)
      m.temporal.push_back(Conv3d<T>::make(E, E, 3, 3, 3, 1, 1, 1, 1, 1, 1));

  std::mt19937_64 rng = makeRng(mixSeed(seed, 0xA11));
  detail::initConv(m.enc1, rng);
  detail::initConv(m.enc2, rng);
  detail::initConv(m.b0, rng);
  detail::initConv(m.d1, rng);
  detail::initConv(m.d2, rng);
  detail::initConv(m.mid, rng);
  detail::initConv(m.u1, rng);
  detail::initConv(m.u2, rng);
  detail::initConv(m.head, rng, /*zero=*/true);
  for (std::size_t i = 0; i < m.temporal.size(); ++i)
    detail::initConv(m.temporal[i], rng, /*zero=*/i + 1 == m.temporal.size());
  return m;
}

template <typename T>
std::vector<ParamRef<T>> DetectorModelT<T>::params() {
  std::vector<ParamRef<T>> out;
  auto add = [&](const std::string& name, Conv3d<T>& c) {
    out.push_back({name + ".w", &c.w, &c.gw});
    out.push_back({name + ".b", &c.b, &c.gb});
  };
  add("enc1", enc1);
  add("enc2", enc2);
  add("b0", b0);
  add("d1", d1);
  add("d2", d2);
  add("mid", mid);
  add("u1", u1);
  add("u2", u2);
  add("head", head);
  for (std::size_t i = 0; i < temporal.size(); ++i) add("temporal" + std::to_string(i), temporal[i]);
  return out;
}

template <typename T>
void DetectorModelT<T>::zeroGrad() {
  for (auto& p : params()) p.grad->fill(T(0));
}

template <typename T>
std::size_t DetectorModelT<T>::paramCount() {
  std::size_t n = 0;
  for (auto& p : params()) n += p.value->size();
  return n;
}

template <typename T>
Tensor<T> encoderForward(const DetectorModelT<T>& m, const Tensor<T>& xt, FrameCache<T>* cache) {
  if (xt.rank() != 4 || xt.dim(0) != 2)
    throwError(ErrorCode::ShapeMismatch, "encoderForward: input must be [2][R][A][D]");
  const Activation act = m.cfg.activation;
  FrameCache<T> local;
  FrameCache<T>& f = cache ? *cache : local;
  f.e1_pre = m.enc1.forward(xt);
  f.e1 = activationForward(act, f.e1_pre);
  f.e2_pre = m.enc2.forward(f.e1);
  f.e2 = activationForward(act, f.e2_pre);
  f.pool_depth = f.e2.dim(3);
  f.pooled = maxPoolZForward(f.e2, f.pool_arg);
  return f.pooled;
}

template <typename T>
Tensor<T> backboneForward(const DetectorModelT<T>& m, const Tensor<T>& pooled,
                          FrameCache<T>* cache) {
  const Activation act = m.cfg.activation;
  FrameCache<T> local;
  FrameCache<T>& f = cache ? *cache : local;
  f.b0_pre = m.b0.forward(pooled);
  f.b0o = activationForward(act, f.b0_pre);
  f.d1_pre = m.d1.forward(f.b0o);
  f.d1o = activationForward(act, f.d1_pre);
  f.d2_pre = m.d2.forward(f.d1o);
  f.d2o = activationForward(act, f.d2_pre);
  f.mid_pre = m.mid.forward(f.d2o);
  f.mido = activationForward(act, f.mid_pre);

  f.u1_up = upsample2Forward(f.mido, f.d1o.dim(1), f.d1o.dim(2));
  f.u1_pre = m.u1.forward(f.u1_up);
  f.u1o = detail::addTensors(activationForward(act, f.u1_pre), f.d1o);
  f.u2_up = upsample2Forward(f.u1o, f.b0o.dim(1), f.b0o.dim(2));
  f.u2_pre = m.u2.forward(f.u2_up);
  f.u2o = detail::addTensors(activationForward(act, f.u2_pre), f.b0o);
  return m.head.forward(f.u2o);  // [E][R][A][1]
}

template <typename T>
Tensor<T> temporalForward(const DetectorModelT<T>& m, const Tensor<T>& pre_logits,
                          ModelCache<T>* cache) {
  if (m.cfg.ablations.no_time || m.temporal.empty()) return pre_logits;
  const Activation act = m.cfg.activation;
  ModelCache<T> local;
  ModelCache<T>& c = cache ? *cache : local;
  c.temporal_in = detail::toTemporalLayout(pre_logits);
  c.temporal_pre.clear();
  c.temporal_post.clear();
  Tensor<T> h = c.temporal_in;
  for (std::size_t i = 0; i < m.temporal.size(); ++i) {
    Tensor<T> pre = m.temporal[i].forward(h);
    c.temporal_pre.push_back(pre);
    h = i + 1 < m.temporal.size() ? activationForward(act, pre) : pre;
    c.temporal_post.push_back(h);
  }
  return detail::addTensors(pre_logits, detail::fromTemporalLayout(h));
}

template <typename T>
Tensor<T> modelForward(const DetectorModelT<T>& m, const Tensor<T>& input, ModelCache<T>& cache) {
  const std::size_t Tn = input.dim(0);
  if (input.rank() != 5 || input.dim(1) != 2 ||
      Tn != static_cast<std::size_t>(m.cfg.frames))
    throwError(ErrorCode::ShapeMismatch, "modelForward: input must be [T][2][R][A][D]");
  const std::size_t R = input.dim(2), A = input.dim(3), D = input.dim(4);
  const std::size_t E = static_cast<std::size_t>(m.cfg.elevation_bins);

  cache.frames.assign(Tn, FrameCache<T>{});
  cache.pre_logits = Tensor<T>({Tn, E, R, A});

  for (std::size_t t = 0; t < Tn; ++t) {
    FrameCache<T>& f = cache.frames[t];
    f.xt = Tensor<T>({2, R, A, D});
    std::copy(&input(t, 0, 0, 0, 0), &input(t, 0, 0, 0, 0) + 2 * R * A * D, f.xt.data());
    const Tensor<T> pooled = encoderForward(m, f.xt, &f);
    const Tensor<T> logits_t = backboneForward(m, pooled, &f);
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a) cache.pre_logits(t, e, r, a) = logits_t(e, r, a, 0);
  }
  return temporalForward(m, cache.pre_logits, &cache);
}

template <typename T>
void modelBackward(DetectorModelT<T>& m, const Tensor<T>& input, const ModelCache<T>& cache,
                   const Tensor<T>& g_logits) {
  (void)input;
  const std::size_t Tn = g_logits.dim(0), E = g_logits.dim(1), R = g_logits.dim(2),
                    A = g_logits.dim(3);
  const Activation act = m.cfg.activation;

  Tensor<T> g_pre = g_logits;  // residual path
  if (!m.cfg.ablations.no_time && !m.temporal.empty()) {
    Tensor<T> g_h = detail::toTemporalLayout(g_logits);
    for (std::size_t i = m.temporal.size(); i-- > 0;) {
      if (i + 1 < m.temporal.size()) activationBackward(act, cache.temporal_pre[i], g_h);
      const Tensor<T>& layer_in = i == 0 ? cache.temporal_in : cache.temporal_post[i - 1];
      g_h = m.temporal[i].backward(layer_in, g_h);
    }
    g_pre = detail::addTensors(g_logits, detail::fromTemporalLayout(g_h));
  }

  for (std::size_t t = 0; t < Tn; ++t) {
    const FrameCache<T>& f = cache.frames[t];
    Tensor<T> g_t({E, R, A, 1});
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a) g_t(e, r, a, 0) = g_pre(t, e, r, a);

    Tensor<T> g_u2o = m.head.backward(f.u2o, g_t);

    Tensor<T> g_u2pre = g_u2o;  // skip branch keeps g_u2o
    activationBackward(act, f.u2_pre, g_u2pre);
    Tensor<T> g_u2up = m.u2.backward(f.u2_up, g_u2pre);
    Tensor<T> g_u1o = upsample2Backward(g_u2up, f.u1o.dim(1), f.u1o.dim(2));

    Tensor<T> g_u1pre = g_u1o;
    activationBackward(act, f.u1_pre, g_u1pre);
    Tensor<T> g_u1up = m.u1.backward(f.u1_up, g_u1pre);
    Tensor<T> g_mido = upsample2Backward(g_u1up, f.mido.dim(1), f.mido.dim(2));

    activationBackward(act, f.mid_pre, g_mido);
    Tensor<T> g_d2o = m.mid.backward(f.d2o, g_mido);
    activationBackward(act, f.d2_pre, g_d2o);
    Tensor<T> g_d1o = detail::addTensors(m.d2.backward(f.d1o, g_d2o), g_u1o);
    activationBackward(act, f.d1_pre, g_d1o);
    Tensor<T> g_b0o = detail::addTensors(m.d1.backward(f.b0o, g_d1o), g_u2o);
    activationBackward(act, f.b0_pre, g_b0o);
    Tensor<T> g_pooled = m.b0.backward(f.pooled, g_b0o);

    Tensor<T> g_e2 = maxPoolZBackward(f.pool_arg, g_pooled, f.pool_depth);
    activationBackward(act, f.e2_pre, g_e2);
    Tensor<T> g_e1 = m.enc2.backward(f.e1, g_e2);
    activationBackward(act, f.e1_pre, g_e1);
    (void)m.enc1.backward(f.xt, g_e1);  // input gradient unused
  }
}

template <typename T>
double focalLoss(const Tensor<T>& logits, const Tensor<std::uint8_t>& target, double alpha,
                 double gamma, Tensor<T>* grad) {
  const std::size_t Tn = logits.dim(0), E = logits.dim(1), R = logits.dim(2), A = logits.dim(3);
  if (target.rank() != 4 || target.dim(0) != Tn || target.dim(1) != R || target.dim(2) != A ||
      target.dim(3) != E)
    throwError(ErrorCode::ShapeMismatch, "focalLoss: target must be [T][R][A][E]");
  if (grad && !grad->sameShape(logits)) *grad = Tensor<T>(logits.shape());

  const double inv_n = 1.0 / static_cast<double>(logits.size());
  double total = 0.0;
  for (std::size_t t = 0; t < Tn; ++t)
    for (std::size_t e = 0; e < E; ++e)
      for (std::size_t r = 0; r < R; ++r)
        for (std::size_t a = 0; a < A; ++a) {
          const double z = static_cast<double>(logits(t, e, r, a));
          const int y = target(t, r, a, e) ? 1 : 0;
          const double p = detail::stableSigmoid(z);
          const double pt = y ? p : 1.0 - p;
          const double at = y ? alpha : 1.0 - alpha;
          const double om = 1.0 - pt;
          const double pow_g = gamma == 0.0 ? 1.0 : std::pow(om, gamma);
          const double log_pt = std::log(std::max(pt, 1e-12));
          total += -at * pow_g * log_pt;
          if (grad) {
            const double inv_pt = pt > 1e-12 ? 1.0 / pt : 0.0;
            const double focus =
                (gamma > 0.0 && om > 0.0) ? -gamma * std::pow(om, gamma - 1.0) * log_pt : 0.0;
            const double dloss_dpt = -at * (focus + pow_g * inv_pt);
            const double dpt_dz = (y ? 1.0 : -1.0) * p * (1.0 - p);
            (*grad)(t, e, r, a) = static_cast<T>(dloss_dpt * dpt_dz * inv_n);
          }
        }
  return total * inv_n;
}

}  // namespace nn
}  // namespace radelft

#endif
