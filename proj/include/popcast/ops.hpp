#pragma once
#include <cstdint>
#include <vector>

#include "popcast/layers.hpp"
#include "popcast/rng.hpp"
#include "popcast/tensor.hpp"

// Forward and reverse-mode kernels for the fixed layer vocabulary. Heavy
// loops are OpenMP-parallel over independent output (or gradient) elements,
// so results are bit-identical for any thread count in either precision.
// Backward functions accumulate (+=) into their gradient outputs.
namespace popcast::ops {

template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const Tensor<T>& w,
                         const Tensor<T>& b, int stride, int pad);

template <typename T>
void conv2d_backward(const Tensor<T>& x, const Tensor<T>& w, int stride,
                     int pad, const Tensor<T>& dy, Tensor<T>& dx,
                     Tensor<T>& dw, Tensor<T>& db);

template <typename T>
struct MaxPoolOut {
  Tensor<T> y;
  std::vector<std::size_t> argmax;  // flat input index per output element
};

template <typename T>
MaxPoolOut<T> maxpool2d_forward(const Tensor<T>& x, int k, int stride);

template <typename T>
void maxpool2d_backward(const MaxPoolOut<T>& out, const Tensor<T>& dy,
                        Tensor<T>& dx);

template <typename T>
Tensor<T> lrn_forward(const Tensor<T>& x, int n, double alpha, double beta,
                      double kconst, Tensor<T>* denom_cache = nullptr);

template <typename T>
void lrn_backward(const Tensor<T>& x, const Tensor<T>& denom, int n,
                  double alpha, double beta, const Tensor<T>& dy,
                  Tensor<T>& dx);

template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x);

template <typename T>
void relu_backward(const Tensor<T>& x, const Tensor<T>& dy, Tensor<T>& dx);

template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const Tensor<T>& w,
                        const Tensor<T>& b);

template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy,
                    Tensor<T>& dx, Tensor<T>& dw, Tensor<T>& db);

// Inverted dropout: train mode zeroes with probability drop_ratio and scales
// survivors by 1/(1-drop_ratio); eval mode is the identity. The mask holds
// the per-element factor, so backward is an elementwise product.
template <typename T>
Tensor<T> dropout_forward(const Tensor<T>& x, double drop_ratio, bool train,
                          Rng& rng, Tensor<T>* mask_cache = nullptr);

template <typename T>
void dropout_backward(const Tensor<T>& mask, const Tensor<T>& dy,
                      Tensor<T>& dx);

template <typename T>
struct LstmStepCache {
  Tensor<T> x, h_prev, c_prev;
  Tensor<T> gi, gf, gg, go;  // gate activations, order i,f,g,o
  Tensor<T> c, tanh_c;
};

// Standard cell: i,f,o sigmoid gates, g tanh candidate,
// c' = f*c + i*g, h' = o*tanh(c'). Packed weights wx [4H,D], wh [4H,H],
// bias [4H] in gate order i,f,g,o.
template <typename T>
void lstm_step_forward(const Tensor<T>& x, const Tensor<T>& h_prev,
                       const Tensor<T>& c_prev, const Tensor<T>& wx,
                       const Tensor<T>& wh, const Tensor<T>& b, Tensor<T>& h,
                       Tensor<T>& c, LstmStepCache<T>* cache = nullptr);

template <typename T>
void lstm_step_backward(const LstmStepCache<T>& cache, const Tensor<T>& wx,
                        const Tensor<T>& wh, const Tensor<T>& dh,
                        const Tensor<T>& dc, Tensor<T>& dx, Tensor<T>& dh_prev,
                        Tensor<T>& dc_prev, Tensor<T>& dwx, Tensor<T>& dwh,
                        Tensor<T>& db);

// state-typed wrapper over lstm_step_forward
template <typename T>
LstmState<T> lstm_step(const Tensor<T>& x, const LstmState<T>& state,
                       const LstmParams<T>& params,
                       LstmStepCache<T>* cache = nullptr);

template <typename T>
Tensor<T> softmax_forward(const Tensor<T>& logits);

template <typename T>
void softmax_backward(const Tensor<T>& probs, const Tensor<T>& dprobs,
                      Tensor<T>& dlogits);

enum class LossKind { squared, cross_entropy };

// squared: (probs[1]-label)^2; cross_entropy: -log(max(probs[label], floor))
template <typename T>
T loss_forward(const Tensor<T>& probs, int label, LossKind kind,
               double floor = 1e-12);

template <typename T>
Tensor<T> loss_backward(const Tensor<T>& probs, int label, LossKind kind,
                        double floor = 1e-12);

}  // namespace popcast::ops
