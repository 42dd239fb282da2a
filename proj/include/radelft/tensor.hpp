#ifndef RADELFT_TENSOR_HPP
#define RADELFT_TENSOR_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "radelft/errors.hpp"

namespace radelft {

// Dense row-major tensor with a runtime shape. Deliberately minimal: the
// compute kernels index raw data() with precomputed strides.
template <typename T>
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    computeStrides();
    data_.assign(numel(), T{});
  }

  Tensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    computeStrides();
    if (data_.size() != numel())
      throwError(ErrorCode::ShapeMismatch, "tensor data size does not match shape");
  }

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

  std::size_t rank() const { return shape_.size(); }
  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t numel() const {
    std::size_t n = 1;
    for (std::size_t d : shape_) n *= d;
    return n;
  }

  template <typename U>
  bool sameShape(const Tensor<U>& other) const { return shape_ == other.shape(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t flat) { return data_[flat]; }
  const T& operator[](std::size_t flat) const { return data_[flat]; }

  T& operator()(std::size_t i) { return data_[i]; }
  const T& operator()(std::size_t i) const { return data_[i]; }
  T& operator()(std::size_t i, std::size_t j) { return data_[i * strides_[0] + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * strides_[0] + j]; }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[i * strides_[0] + j * strides_[1] + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[i * strides_[0] + j * strides_[1] + k];
  }
  T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[i * strides_[0] + j * strides_[1] + k * strides_[2] + l];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[i * strides_[0] + j * strides_[1] + k * strides_[2] + l];
  }
  T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l, std::size_t m) {
    return data_[i * strides_[0] + j * strides_[1] + k * strides_[2] + l * strides_[3] + m];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l,
                      std::size_t m) const {
    return data_[i * strides_[0] + j * strides_[1] + k * strides_[2] + l * strides_[3] + m];
  }

  // Stride of axis i in elements (innermost axis has stride 1).
  std::size_t stride(std::size_t i) const { return i + 1 < shape_.size() ? strides_[i] : 1; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

private:
  void computeStrides() {
    strides_.assign(shape_.empty() ? 0 : shape_.size() - 1, 1);
    if (shape_.size() < 2) return;
    // strides_[i] = product of dims after i
    for (std::size_t i = shape_.size() - 1; i-- > 0;) {
      std::size_t s = 1;
      for (std::size_t j = i + 1; j < shape_.size(); ++j) s *= shape_[j];
      strides_[i] = s;
    }
  }

  std::vector<std::size_t> shape_;
  std::vector<std::size_t> strides_;
  std::vector<T> data_;
};

using Cplx = std::complex<double>;

}  // namespace radelft

#endif
