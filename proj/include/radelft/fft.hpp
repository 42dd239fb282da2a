#ifndef RADELFT_FFT_HPP
#define RADELFT_FFT_HPP

#include <cstddef>

#include "radelft/tensor.hpp"

namespace radelft {

// Unnormalized complex DFT of length n (any n), forward = exp(-j 2 pi k n / N).
// in and out may alias. Plans are cached per (n, direction) behind a mutex;
// execution is thread-safe and deterministic.
void fft(const Cplx* in, Cplx* out, std::size_t n, bool inverse = false);

// Convenience: forward DFT of `in` zero-padded to n_fft, writing n_keep bins.
void fftPadded(const Cplx* in, std::size_t n_in, Cplx* out, std::size_t n_fft,
               std::size_t n_keep);

// Symmetric Hamming window of length n.
std::vector<double> hammingWindow(std::size_t n);

}  // namespace radelft

#endif
