#include "depthq/optim.hpp"

#include "depthq/error.hpp"

namespace depthq {

template <Real T>
void SgdMomentum<T>::step(ParameterSet<T>& params, const ParameterSet<T>& grads) {
  if (grads.tensors.size() != params.tensors.size()) {
    throw ConfigError("gradient set does not match parameters");
  }
  if (velocity_.tensors.empty()) velocity_ = params.zeros_like();
  const T mu = static_cast<T>(momentum_);
  const T lr = static_cast<T>(learning_rate_);
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    auto& theta = params.tensors[i];
    auto& v = velocity_.tensors[i];
    const auto& g = grads.tensors[i];
    if (g.shape() != theta.shape() || v.shape() != theta.shape()) {
      throw ConfigError(params.names[i] + ": gradient/velocity shape mismatch");
    }
    for (std::size_t j = 0; j < theta.size(); ++j) {
      v[j] = mu * v[j] - lr * g[j];
      theta[j] += v[j];
    }
  }
}

template class SgdMomentum<float>;
template class SgdMomentum<double>;

}  // namespace depthq
