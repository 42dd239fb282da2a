#include "radelft/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace radelft {

namespace {

// FFTW plan creation is not thread-safe; execution via fftw_execute_dft is.
// FFTW_ESTIMATE keeps planning deterministic.
class PlanCache {
public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::vector<fftw_complex> buf(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), buf.data(), buf.data(), sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans_.emplace(key, p);
    return p;
  }

private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

}  // namespace

void fft(const Cplx* in, Cplx* out, std::size_t n, bool inverse) {
  if (n == 0) return;
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  fftw_plan plan = PlanCache::instance().get(n, inverse ? FFTW_BACKWARD : FFTW_FORWARD);
  if (out != in) std::copy(in, in + n, out);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(out),
                   reinterpret_cast<fftw_complex*>(out));
}

void fftPadded(const Cplx* in, std::size_t n_in, Cplx* out, std::size_t n_fft,
               std::size_t n_keep) {
  std::vector<Cplx> buf(n_fft, Cplx{0.0, 0.0});
  std::copy(in, in + std::min(n_in, n_fft), buf.begin());
  fft(buf.data(), buf.data(), n_fft);
  std::copy(buf.begin(), buf.begin() + n_keep, out);
}

std::vector<double> hammingWindow(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * M_PI * i / (n - 1));
  return w;
}

}  // namespace radelft
