#pragma once
#include <cstdint>
#include <vector>

#include "popcast/tensor.hpp"

// Serial reference implementations, written independently of the production
// kernels. Tests use them as oracles; the benchmark target compares the
// production kernels against them. Never linked into the main library.
namespace popcast::ref {

// plain 6-nested-loop cross-correlation
Tensor<double> conv2d(const Tensor<double>& x, const Tensor<double>& w,
                      const Tensor<double>& b, int stride, int pad);

// windowed max, first occurrence wins nothing here (forward only)
Tensor<double> maxpool2d(const Tensor<double>& x, int k, int stride);

// direct evaluation of the across-channel normalization formula
Tensor<double> lrn(const Tensor<double>& x, int n, double alpha, double beta,
                   double kconst);

Tensor<double> dense(const Tensor<double>& x, const Tensor<double>& w,
                     const Tensor<double>& b);

// single-purpose unrolled LSTM over a whole sequence; gate order i,f,g,o
struct LstmResult {
  Tensor<double> h, c;
};
LstmResult lstm_sequence(const std::vector<Tensor<double>>& xs,
                         const Tensor<double>& wx, const Tensor<double>& wh,
                         const Tensor<double>& b, const Tensor<double>& h0,
                         const Tensor<double>& c0);

// average ranks by O(n^2) counting, then textbook Pearson on the ranks
double spearman(const std::vector<double>& a, const std::vector<double>& b);

// Projected-gradient ascent on the SVM dual:
//   max  sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
//   s.t. 0 <= alpha <= C,  sum_i alpha_i y_i = 0
// The projection onto the box intersected with the hyperplane is exact
// (bisection on the multiplier). Returns the dual objective reached.
struct QpResult {
  std::vector<double> alpha;
  double objective;
};
QpResult svm_dual_qp(const std::vector<std::vector<double>>& kernel,
                     const std::vector<int>& y, double C, int iterations);

double svm_dual_objective(const std::vector<std::vector<double>>& kernel,
                          const std::vector<int>& y,
                          const std::vector<double>& alpha);

}  // namespace popcast::ref
