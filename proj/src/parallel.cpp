#include "radelft/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace radelft {

namespace {
thread_local bool g_in_parallel_region = false;
}

std::size_t workerCount() {
  static const std::size_t count = [] {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("RADELFT_THREADS")) {
      char* end = nullptr;
      long v = std::strtol(env, &end, 10);
      if (end != env && v > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
    }
    return n;
  }();
  return count;
}

void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers = std::min(workerCount(), n);
  if (workers <= 1 || g_in_parallel_region) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    const std::size_t lo = n * t / workers;
    const std::size_t hi = n * (t + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      g_in_parallel_region = true;
      for (std::size_t i = lo; i < hi; ++i) fn(i);
      g_in_parallel_region = false;
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace radelft
