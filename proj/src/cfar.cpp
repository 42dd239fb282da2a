#include "radelft/cfar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "radelft/errors.hpp"
#include "radelft/parallel.hpp"

namespace radelft {
namespace cfar {

void CfarConfig::validate(std::size_t tensor_rank) const {
  if (dims.empty()) throwError(ErrorCode::Config, "cfar: dims must name at least one axis");
  for (std::size_t d : dims)
    if (d >= tensor_rank) throwError(ErrorCode::Config, "cfar: window axis out of range");
  if (n_train < 1) throwError(ErrorCode::Config, "cfar: n_train must be >= 1");
  if (n_guard < 0) throwError(ErrorCode::Config, "cfar: n_guard must be >= 0");
  if (!(rank_fraction > 0.0 && rank_fraction <= 1.0))
    throwError(ErrorCode::Config, "cfar: rank_fraction must be in (0, 1]");
  if (!(target_pfa > 0.0 && target_pfa < 1.0))
    throwError(ErrorCode::Config, "cfar: target_pfa must be in (0, 1)");
  if (!wrap.empty() && wrap.size() != dims.size())
    throwError(ErrorCode::Config, "cfar: wrap flags must match dims");
}

double caThresholdFactor(int n, double pfa) {
  return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

namespace {

double osPfaOf(int n, int k, double alpha) {
  // P(exceedance) for exponential noise with threshold alpha * x_(k).
  double p = 1.0;
  for (int i = 0; i < k; ++i) p *= (n - i) / (n - i + alpha);
  return p;
}

}  // namespace

double osThresholdFactor(int n, int k, double pfa) {
  if (k < 1 || k > n) throwError(ErrorCode::Config, "cfar: OS rank out of [1, N]");
  double lo = 0.0, hi = 1.0;
  while (osPfaOf(n, k, hi) > pfa) {
    hi *= 2.0;
    if (hi > 1e12) throwError(ErrorCode::Numeric, "cfar: OS threshold bracket failed");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double p = osPfaOf(n, k, mid);
    if (std::abs(p - pfa) < 1e-10 * std::max(1.0, pfa)) return mid;
    if (p > pfa)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

struct WindowOffsets {
  // Offset vectors of the training region: outer box minus guard box.
  std::vector<std::vector<int>> offsets;
};

WindowOffsets buildOffsets(const CfarConfig& cfg) {
  const int reach = cfg.n_train + cfg.n_guard;
  const std::size_t n_axes = cfg.dims.size();
  WindowOffsets w;
  std::vector<int> cur(n_axes, -reach);
  while (true) {
    bool in_guard = true;
    for (std::size_t i = 0; i < n_axes; ++i)
      if (std::abs(cur[i]) > cfg.n_guard) in_guard = false;
    if (!in_guard) w.offsets.push_back(cur);
    std::size_t axis = 0;
    while (axis < n_axes) {
      if (++cur[axis] <= reach) break;
      cur[axis] = -reach;
      ++axis;
    }
    if (axis == n_axes) break;
  }
  return w;
}

template <typename ThresholdFn>
Tensor<std::uint8_t> slidingCfar(const Tensor<double>& power, const CfarConfig& cfg,
                                 const ThresholdFn& threshold_of_n) {
  cfg.validate(power.rank());
  const auto& shape = power.shape();
  for (std::size_t ai = 0; ai < cfg.dims.size(); ++ai) {
    const bool wraps = !cfg.wrap.empty() && cfg.wrap[ai];
    const std::size_t extent = shape[cfg.dims[ai]];
    if (wraps && static_cast<std::size_t>(2 * (cfg.n_train + cfg.n_guard) + 1) > extent)
      throwError(ErrorCode::Config, "cfar: window larger than wrapped axis");
    if (!wraps && static_cast<std::size_t>(cfg.n_train + cfg.n_guard) >= extent)
      throwError(ErrorCode::Config, "cfar: window larger than axis");
  }

  const WindowOffsets win = buildOffsets(cfg);
  const std::size_t rank = power.rank();
  std::vector<std::size_t> strides(rank);
  for (std::size_t i = 0; i < rank; ++i) strides[i] = power.stride(i);

  Tensor<std::uint8_t> mask(power.shape());
  const std::size_t total = power.size();

  // Threshold factors per reduced training count; the reachable counts are
  // bounded by the nominal window size, so the cache stays small.
  std::map<int, double> alpha_cache;
  std::mutex cache_mutex;
  auto alphaFor = [&](int n_cells) {
    {
      std::lock_guard<std::mutex> lock(cache_mutex);
      auto it = alpha_cache.find(n_cells);
      if (it != alpha_cache.end()) return it->second;
    }
    const double a = threshold_of_n(n_cells);
    std::lock_guard<std::mutex> lock(cache_mutex);
    alpha_cache.emplace(n_cells, a);
    return a;
  };

  const bool is_os = cfg.kind == CfarKind::OS;

  parallelFor(total, [&](std::size_t flat) {
    // Decompose the flat index.
    std::vector<std::size_t> idx(rank);
    std::size_t rem = flat;
    for (std::size_t i = 0; i < rank; ++i) {
      idx[i] = rem / strides[i];
      rem %= strides[i];
    }

    std::vector<double> train;
    train.reserve(win.offsets.size());
    for (const auto& off : win.offsets) {
      std::size_t cell = flat;
      bool valid = true;
      for (std::size_t ai = 0; ai < cfg.dims.size(); ++ai) {
        const std::size_t axis = cfg.dims[ai];
        const std::size_t extent = shape[axis];
        long long pos = static_cast<long long>(idx[axis]) + off[ai];
        const bool wraps = !cfg.wrap.empty() && cfg.wrap[ai];
        if (wraps) {
          pos = ((pos % static_cast<long long>(extent)) + extent) % extent;
        } else if (pos < 0 || pos >= static_cast<long long>(extent)) {
          valid = false;
          break;
        }
        cell += (static_cast<std::size_t>(pos) - idx[axis]) * strides[axis];
      }
      if (valid) train.push_back(power[cell]);
    }

    if (train.empty()) {
      mask[flat] = 0;
      return;
    }
    const int n_cells = static_cast<int>(train.size());
    double statistic;
    if (is_os) {
      const int k = std::clamp(static_cast<int>(std::llround(cfg.rank_fraction * n_cells)), 1,
                               n_cells);
      std::nth_element(train.begin(), train.begin() + (k - 1), train.end());
      statistic = train[k - 1];
    } else {
      statistic = 0.0;
      for (double v : train) statistic += v;
      statistic /= n_cells;
    }
    mask[flat] = power[flat] > alphaFor(n_cells) * statistic ? 1 : 0;
  });
  return mask;
}

}  // namespace

Tensor<std::uint8_t> caCfar(const Tensor<double>& power, const CfarConfig& cfg) {
  CfarConfig c = cfg;
  c.kind = CfarKind::CA;
  return slidingCfar(power, c, [&](int n) { return caThresholdFactor(n, cfg.target_pfa); });
}

Tensor<std::uint8_t> osCfar(const Tensor<double>& power, const CfarConfig& cfg) {
  CfarConfig c = cfg;
  c.kind = CfarKind::OS;
  return slidingCfar(power, c, [&](int n) {
    const int k = std::clamp(static_cast<int>(std::llround(cfg.rank_fraction * n)), 1, n);
    return osThresholdFactor(n, k, cfg.target_pfa);
  });
}

OccupancyGrid cascadeDetect(const RadarCube& cube, const CfarConfig& cfg2d,
                            const CfarConfig& cfg1d) {
  const auto mask2d = osCfar(cube.power, cfg2d);
  const auto mask1d = osCfar(cube.power, cfg1d);

  OccupancyGrid out = OccupancyGrid::zeros(cube.grid);
  const std::size_t n_r = cube.power.dim(0), n_d = cube.power.dim(1), n_a = cube.power.dim(2);
  for (std::size_t r = 0; r < n_r; ++r)
    for (std::size_t d = 0; d < n_d; ++d)
      for (std::size_t a = 0; a < n_a; ++a)
        if (mask2d(r, d, a) && mask1d(r, d, a))
          out.occ(r, a, static_cast<std::size_t>(cube.elev_argmax(r, d, a))) = 1;
  return out;
}

OccupancyGrid cascadeDetectDefault(const RadarCube& cube, const CfarConfig& base2d,
                                   const CfarConfig& base1d) {
  CfarConfig c2 = base2d;
  c2.kind = CfarKind::OS;
  c2.dims = {0, 2};  // range, azimuth
  c2.wrap = {false, false};
  CfarConfig c1 = base1d;
  c1.kind = CfarKind::OS;
  c1.dims = {1};  // Doppler is periodic
  c1.wrap = {true};
  return cascadeDetect(cube, c2, c1);
}

}  // namespace cfar
}  // namespace radelft
