#include "depthq/agent.hpp"

#include <algorithm>
#include <cmath>

#include "depthq/error.hpp"

namespace depthq {

double EpsilonSchedule::at(std::size_t iteration) const {
  if (anneal_iterations == 0 || iteration >= anneal_iterations) return end;
  const double frac = static_cast<double>(iteration) / static_cast<double>(anneal_iterations);
  return start + (end - start) * frac;
}

void TrainConfig::validate() const {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("gamma must be in [0,1)");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (memory_capacity == 0) throw ConfigError("memory_capacity must be positive");
  if (batch_size > memory_capacity) {
    throw ConfigError("batch_size " + std::to_string(batch_size) +
                      " exceeds replay memory capacity " + std::to_string(memory_capacity));
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0,1)");
  if (!(collision_threshold > 0.0)) throw ConfigError("collision_threshold must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (max_episode_steps == 0) throw ConfigError("max_episode_steps must be positive");
  if (episodes == 0 && max_iterations == 0) {
    throw ConfigError("set episodes or max_iterations (both are unlimited)");
  }
  for (double e : {epsilon.start, epsilon.end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon values must be in [0,1]");
  }
}

std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (q.empty()) throw ConfigError("select_action needs at least one action value");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must be in [0,1]");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (epsilon > 0.0 && coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    return pick(rng);
  }
  return argmax_index(q);
}

double compute_reward(bool collided, const TrainConfig& config) {
  return collided ? config.reward_terminal : config.reward_move;
}

template <Real T>
NetworkLearner<T>::NetworkLearner(QNetwork<T> net, double learning_rate, double momentum)
    : network_(std::move(net)),
      grads_(network_.parameters().zeros_like()),
      optimizer_(learning_rate, momentum) {
  network_.set_mode(Mode::Train);
}

template <Real T>
Tensor<T> NetworkLearner<T>::to_input(const PackedDepth& state) const {
  const auto& cfg = network_.config();
  if (state.rows != cfg.input_rows || state.cols != cfg.input_cols) {
    throw ConfigError("state image size does not match the network input");
  }
  Tensor<T> input({1, state.rows, state.cols});
  for (std::size_t i = 0; i < input.size(); ++i) {
    input[i] = static_cast<T>(state.millimeters[i]) / T{1000};
  }
  return input;
}

template <Real T>
std::vector<double> NetworkLearner<T>::q_values(const PackedDepth& state) const {
  const Tensor<T> out = network_.forward(to_input(state), Mode::Eval, nullptr, nullptr);
  return std::vector<double>(out.values().begin(), out.values().end());
}

template <Real T>
double NetworkLearner<T>::accumulate(const PackedDepth& state, std::size_t action, double target,
                                     double scale, Rng& rng) {
  return accumulate_masked_mse(network_, to_input(state), action, target, scale, grads_, &rng)
      .loss;
}

template class NetworkLearner<float>;
template class NetworkLearner<double>;

}  // namespace depthq
