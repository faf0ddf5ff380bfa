#include "popcast/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "popcast/error.hpp"

namespace popcast::eval {

double accuracy(const std::vector<int>& predicted,
                const std::vector<int>& truth) {
  require(!predicted.empty(), "accuracy: empty input");
  require(predicted.size() == truth.size(),
          "accuracy: length mismatch (" + std::to_string(predicted.size()) +
              " vs " + std::to_string(truth.size()) + ")");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double mean_rank = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

SpearmanResult spearman(const std::vector<double>& scores,
                        const std::vector<double>& targets) {
  require(scores.size() == targets.size(), "spearman: length mismatch");
  require(scores.size() >= 2, "spearman: need at least 2 samples");
  const auto ra = average_ranks(scores);
  const auto rb = average_ranks(targets);
  const std::size_t n = ra.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= double(n);
  mb /= double(n);
  double num = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return {0.0, true};
  return {num / std::sqrt(va * vb), false};
}

}  // namespace popcast::eval
