#pragma once

#include "depthq/qnetwork.hpp"

namespace depthq {

/// SGD with classical momentum: v <- momentum * v - lr * grad; theta <- theta + v.
template <Real T>
class SgdMomentum {
 public:
  SgdMomentum(double learning_rate, double momentum)
      : learning_rate_(learning_rate), momentum_(momentum) {}

  void step(ParameterSet<T>& params, const ParameterSet<T>& grads);

  const ParameterSet<T>& velocity() const { return velocity_; }
  double learning_rate() const { return learning_rate_; }
  double momentum() const { return momentum_; }
  void set_learning_rate(double lr) { learning_rate_ = lr; }

 private:
  double learning_rate_;
  double momentum_;
  ParameterSet<T> velocity_;
};

extern template class SgdMomentum<float>;
extern template class SgdMomentum<double>;

}  // namespace depthq
