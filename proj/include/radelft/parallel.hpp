#ifndef RADELFT_PARALLEL_HPP
#define RADELFT_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace radelft {

// Number of worker threads used by parallelFor. Defaults to the hardware
// concurrency, capped by the RADELFT_THREADS environment variable.
std::size_t workerCount();

// Static partitioning of [0, n) across workers. Each index is visited exactly
// once by exactly one thread, so any kernel writing disjoint outputs per index
// produces bit-identical results regardless of the thread count. Nested calls
// run serially on the calling thread.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace radelft

#endif
