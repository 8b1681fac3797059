#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "depthq/agent.hpp"

namespace depthq::testing {

/// Deterministic 5-state, 2-action MDP. kNext[s][a] is the successor, or -1
/// for a collision (terminal). Rewards come from the training config.
inline constexpr int kToyStates = 5;
inline constexpr int kToyActions = 2;
inline constexpr std::array<std::array<int, 2>, 5> kToyNext{{
    {1, 2},
    {0, 3},
    {3, -1},
    {4, -1},
    {-1, -1},
}};

class ToyMdp {
 public:
  using State = std::size_t;

  State reset(Rng& rng) {
    state_ = std::uniform_int_distribution<std::size_t>(0, kToyStates - 1)(rng);
    start_ = state_;
    return state_;
  }
  StepOutcome<State> step(std::size_t action) {
    const int next = kToyNext[state_][action];
    if (next < 0) return {std::nullopt, true};
    state_ = static_cast<State>(next);
    return {state_, false};
  }
  std::size_t start_index() const { return start_; }

 private:
  State state_ = 0;
  State start_ = 0;
};

/// Q-table trained by plain gradient descent on the squared Bellman error.
class TabularLearner {
 public:
  using State = std::size_t;

  explicit TabularLearner(double learning_rate) : lr_(learning_rate) {}

  std::vector<double> q_values(const State& s) const { return {q_[s][0], q_[s][1]}; }
  double accumulate(const State& s, std::size_t a, double target, double scale, Rng&) {
    const double err = q_[s][a] - target;
    grad_[s][a] += 2.0 * err * scale;
    return err * err;
  }
  void zero_grad() { grad_ = {}; }
  void apply_update() {
    for (std::size_t s = 0; s < kToyStates; ++s) {
      for (std::size_t a = 0; a < kToyActions; ++a) q_[s][a] -= lr_ * grad_[s][a];
    }
  }
  double q(std::size_t s, std::size_t a) const { return q_[s][a]; }

 private:
  double lr_;
  std::array<std::array<double, 2>, 5> q_{};
  std::array<std::array<double, 2>, 5> grad_{};
};

/// Q* by value iteration, iterated to machine precision.
inline std::array<std::array<double, 2>, 5> toy_value_iteration(double gamma, double r_move,
                                                                double r_ter) {
  std::array<std::array<double, 2>, 5> q{};
  for (int sweep = 0; sweep < 10000; ++sweep) {
    auto next_q = q;
    for (int s = 0; s < kToyStates; ++s) {
      for (int a = 0; a < kToyActions; ++a) {
        const int n = kToyNext[s][a];
        next_q[s][a] = n < 0 ? r_ter : r_move + gamma * std::max(q[n][0], q[n][1]);
      }
    }
    if (next_q == q) break;
    q = next_q;
  }
  return q;
}

}  // namespace depthq::testing
