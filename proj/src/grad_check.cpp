#include "popcast/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "popcast/rng.hpp"

namespace popcast {

GradCheckReport grad_check(const std::vector<GradCheckTarget>& targets,
                           const std::function<double()>& loss_fn,
                           double tolerance, double step,
                           std::size_t max_per_target, std::uint64_t seed) {
  GradCheckReport report;
  report.tolerance = tolerance;
  Rng rng(seed);

  for (const auto& t : targets) {
    const std::size_t n = t.value->size();
    std::vector<std::size_t> picks;
    if (max_per_target == 0 || n <= max_per_target) {
      picks.resize(n);
      for (std::size_t i = 0; i < n; ++i) picks[i] = i;
    } else {
      // sampling without replacement via partial Fisher-Yates
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      for (std::size_t i = 0; i < max_per_target; ++i) {
        const std::size_t j = i + rng.uniform_int(n - i);
        std::swap(idx[i], idx[j]);
      }
      picks.assign(idx.begin(), idx.begin() + max_per_target);
    }

    for (std::size_t i : picks) {
      const double orig = (*t.value)[i];
      (*t.value)[i] = orig + step;
      const double lp = loss_fn();
      (*t.value)[i] = orig - step;
      const double lm = loss_fn();
      (*t.value)[i] = orig;

      const double numeric = (lp - lm) / (2.0 * step);
      const double analytic = (*t.grad)[i];
      const double denom = std::max(std::abs(analytic), std::abs(numeric));
      double rel = 0.0;
      if (denom > 1e-10) rel = std::abs(analytic - numeric) / denom;
      report.max_rel_err = std::max(report.max_rel_err, rel);
      ++report.checked;
      if (rel >= tolerance)
        report.failures.push_back({t.name, i, analytic, numeric, rel});
    }
  }
  report.pass = report.failures.empty();
  return report;
}

}  // namespace popcast
