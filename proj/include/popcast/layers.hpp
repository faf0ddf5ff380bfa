#pragma once
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "popcast/rng.hpp"
#include "popcast/tensor.hpp"

namespace popcast {

// A learnable tensor with its gradient accumulator and momentum buffer.
// Gradient and velocity always share the value's shape.
template <typename T>
struct ParamTensor {
  std::string name;
  Tensor<T> value, grad, vel;

  ParamTensor() = default;
  ParamTensor(std::string n, std::vector<std::size_t> shape)
      : name(std::move(n)),
        value(shape),
        grad(shape, T(0)),
        vel(std::move(shape), T(0)) {}

  void zero_grad() { grad.fill(T(0)); }
};

// weights + bias of one conv/dense layer
template <typename T>
struct LayerParams {
  ParamTensor<T> weight, bias;
};

// packed LSTM parameters, gate order i,f,g,o
template <typename T>
struct LstmParams {
  ParamTensor<T> wx;  // [4H, D]
  ParamTensor<T> wh;  // [4H, H]
  ParamTensor<T> b;   // [4H]
};

template <typename T>
struct LstmState {
  Tensor<T> hidden, cell;
};

// He fan-in init: N(0, sqrt(2/fan_in))
template <typename T>
void he_init(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double s = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<T>(rng.normal() * s);
}

}  // namespace popcast
