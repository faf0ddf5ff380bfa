#pragma once
#include <vector>

#include "popcast/layers.hpp"

namespace popcast {

// v <- momentum*v - lr*g; w <- w + v; gradients cleared afterwards.
// A non-finite gradient aborts with a diagnostic naming the parameter.
template <typename T>
void sgd_step(const std::vector<ParamTensor<T>*>& params, double lr,
              double momentum);

}  // namespace popcast
