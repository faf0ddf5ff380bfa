#pragma once
#include <vector>

namespace popcast::eval {

// ratio of matching positions
double accuracy(const std::vector<int>& predicted,
                const std::vector<int>& truth);

// average (fractional) ranks, ties get the mean of their rank range
std::vector<double> average_ranks(const std::vector<double>& v);

// Pearson correlation of average ranks. Zero rank variance on either side is
// reported as 0 with the degenerate flag set rather than an error.
struct SpearmanResult {
  double rho = 0.0;
  bool degenerate = false;
};
SpearmanResult spearman(const std::vector<double>& scores,
                        const std::vector<double>& targets);

}  // namespace popcast::eval
