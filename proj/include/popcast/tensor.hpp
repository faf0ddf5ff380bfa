#pragma once
#include <cassert>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "popcast/error.hpp"

namespace popcast {

// Dense row-major n-d array; the value type of all network computation.
// T is float in fast mode and double in high-precision mode.
template <typename T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, T fill = T{})
      : shape_(std::move(shape)), data_(checked_count(shape_), fill) {}

  Tensor(std::vector<std::size_t> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    require(checked_count(shape_) == data_.size(),
            "tensor data length does not match shape " + shape_str());
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  // rank-specific indexers, row-major
  T& operator()(std::size_t i) {
    assert(rank() == 1);
    return data_[i];
  }
  const T& operator()(std::size_t i) const {
    assert(rank() == 1);
    return data_[i];
  }
  T& operator()(std::size_t i, std::size_t j) {
    assert(rank() == 2);
    return data_[i * shape_[1] + j];
  }
  const T& operator()(std::size_t i, std::size_t j) const {
    assert(rank() == 2);
    return data_[i * shape_[1] + j];
  }
  T& operator()(std::size_t i, std::size_t j, std::size_t k) {
    assert(rank() == 3);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    assert(rank() == 3);
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  void fill(T v) { data_.assign(data_.size(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape_.size(); ++i)
      os << (i ? "," : "") << shape_[i];
    os << ']';
    return os.str();
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i)
      out[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  static std::size_t checked_count(const std::vector<std::size_t>& shape) {
    std::size_t n = shape.empty() ? 0 : 1;
    for (auto d : shape) {
      require(d > 0, "tensor dimensions must be positive");
      n *= d;
    }
    return n;
  }

  std::vector<std::size_t> shape_;
  std::vector<T> data_;
};

}  // namespace popcast
