#include "popcast/sgd.hpp"

#include <cmath>

#include "popcast/error.hpp"

namespace popcast {

template <typename T>
void sgd_step(const std::vector<ParamTensor<T>*>& params, double lr,
              double momentum) {
  for (ParamTensor<T>* p : params) {
    for (std::size_t i = 0; i < p->grad.size(); ++i)
      require(std::isfinite(static_cast<double>(p->grad[i])),
              "sgd_step: non-finite gradient in parameter '" + p->name + "'");
    const T m = static_cast<T>(momentum);
    const T step = static_cast<T>(lr);
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->vel[i] = m * p->vel[i] - step * p->grad[i];
      p->value[i] += p->vel[i];
    }
    p->zero_grad();
  }
}

template void sgd_step<float>(const std::vector<ParamTensor<float>*>&, double,
                              double);
template void sgd_step<double>(const std::vector<ParamTensor<double>*>&,
                               double, double);

}  // namespace popcast
