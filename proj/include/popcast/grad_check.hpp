#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "popcast/tensor.hpp"

namespace popcast {

// Central-difference gradient verification. High precision (double) only;
// finite-difference tolerances are unreachable in single precision.
struct GradCheckEntry {
  std::string param;
  std::size_t index;
  double analytic, numeric, rel_err;
};

struct GradCheckReport {
  double tolerance = 0;
  double max_rel_err = 0;
  std::size_t checked = 0;
  bool pass = true;
  std::vector<GradCheckEntry> failures;
};

struct GradCheckTarget {
  std::string name;
  Tensor<double>* value;        // perturbed in place
  const Tensor<double>* grad;   // analytic gradient, already populated
};

// loss_fn must re-run the forward pass (deterministically) and return the
// scalar loss. Targets above max_per_target elements are subsampled with the
// seeded generator; 0 means check every element.
GradCheckReport grad_check(const std::vector<GradCheckTarget>& targets,
                           const std::function<double()>& loss_fn,
                           double tolerance, double step = 1e-5,
                           std::size_t max_per_target = 0,
                           std::uint64_t seed = 0);

}  // namespace popcast
