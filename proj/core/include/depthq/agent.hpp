#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "depthq/environment.hpp"
#include "depthq/optim.hpp"
#include "depthq/qnetwork.hpp"
#include "depthq/random.hpp"
#include "depthq/replay_memory.hpp"

namespace depthq {

/// Linear anneal from `start` to `end` over the first `anneal_iterations`
/// training iterations, constant afterwards.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.1;
  std::size_t anneal_iterations = 3000;

  double at(std::size_t iteration) const;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t memory_capacity = 3000;
  double gamma = 0.85;
  double learning_rate = 1e-7;
  double momentum = 0.99;
  double collision_threshold = 0.55;
  double reward_terminal = -100.0;
  double reward_move = 1.0;
  /// Episode limit; 0 means no limit (stop on max_iterations instead).
  std::size_t episodes = 0;
  /// Training-iteration limit; 0 means no limit.
  std::size_t max_iterations = 0;
  std::size_t max_episode_steps = 1000;
  EpsilonSchedule epsilon;
  double dt = 0.4;
  std::uint64_t seed = 1;
  std::vector<std::size_t> checkpoint_iterations{500, 4000, 7500, 40000};

  void validate() const;
};

/// Epsilon-greedy choice: uniform over all actions with probability epsilon,
/// otherwise the argmax (lowest index on ties).
std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng);

/// The binary feedback signal: r_ter on collision, r_move otherwise.
double compute_reward(bool collided, const TrainConfig& config);

/// A Q-function that can be trained by the replay loop.
template <class M>
concept QLearner = requires(M& m, const M& cm, const typename M::State& s, Rng& rng) {
  { cm.q_values(s) } -> std::convertible_to<std::vector<double>>;
  { m.accumulate(s, std::size_t{}, double{}, double{}, rng) } -> std::convertible_to<double>;
  m.zero_grad();
  m.apply_update();
};

template <class E>
concept Environment = requires(E& e, Rng& rng, std::size_t a) {
  typename E::State;
  { e.reset(rng) } -> std::same_as<typename E::State>;
  { e.step(a) } -> std::same_as<StepOutcome<typename E::State>>;
  { e.start_index() } -> std::convertible_to<std::size_t>;
};

/// Bellman targets with the current (pre-update) weights: r for terminal
/// transitions, r + gamma * max_a' Q(x', a') otherwise.
template <QLearner M>
std::vector<double> compute_targets(std::span<const Transition<typename M::State>* const> batch,
                                    const M& model, double gamma) {
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (const auto* t : batch) {
    if (t->terminal()) {
      targets.push_back(t->reward);
    } else {
      const std::vector<double> q = model.q_values(*t->next);
      targets.push_back(t->reward + gamma * q[argmax_index(q)]);
    }
  }
  return targets;
}

/// One gradient step on a uniformly sampled batch. Returns the mean squared
/// error of the batch, or nullopt (and no update) when the memory holds fewer
/// than batch_size transitions.
template <QLearner M>
std::optional<double> train_step(const ReplayMemory<typename M::State>& memory, M& model,
                                 const TrainConfig& config, Rng& rng) {
  if (memory.size() < config.batch_size) return std::nullopt;
  const auto indices = memory.sample_indices(config.batch_size, rng);
  std::vector<const Transition<typename M::State>*> batch;
  batch.reserve(indices.size());
  for (auto i : indices) batch.push_back(&memory.at(i));

  const std::vector<double> targets =
      compute_targets<M>(std::span<const Transition<typename M::State>* const>(batch), model,
                         config.gamma);
  const double scale = 1.0 / static_cast<double>(batch.size());
  model.zero_grad();
  double loss = 0.0;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    loss += model.accumulate(batch[k]->state, batch[k]->action, targets[k], scale, rng);
  }
  model.apply_update();
  return loss * scale;
}

struct IterationRecord {
  std::size_t iteration = 0;
  std::size_t episode = 0;
  std::size_t step = 0;
  double loss = 0.0;
  double epsilon = 0.0;
  double reward = 0.0;
  std::size_t start_index = 0;  // 1-based

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct EpisodeSummary {
  std::size_t episode = 0;
  std::size_t start_index = 0;  // 1-based
  std::size_t steps = 0;
  bool terminal = false;
};

struct TrainLoopResult {
  std::size_t iterations = 0;
  std::size_t episodes = 0;
  std::vector<EpisodeSummary> episode_summaries;
};

/// The episodic replay-training loop: random start; then act epsilon-greedily,
/// step, reward, store, train until the episode hits a collision (or the
/// training step cap). `on_iteration` sees every completed training iteration.
template <Environment E, QLearner M>
  requires std::same_as<typename E::State, typename M::State>
TrainLoopResult train_loop(E& env, M& model, ReplayMemory<typename M::State>& memory,
                           const TrainConfig& config, Rng& rng,
                           const std::function<void(const IterationRecord&)>& on_iteration = {}) {
  TrainLoopResult result;
  const auto done = [&] {
    return (config.max_iterations && result.iterations >= config.max_iterations) ||
           (config.episodes && result.episodes >= config.episodes);
  };
  while (!done()) {
    ++result.episodes;
    auto state = env.reset(rng);
    EpisodeSummary summary{result.episodes, env.start_index() + 1, 0, false};
    for (std::size_t step = 1; step <= config.max_episode_steps; ++step) {
      const double epsilon = config.epsilon.at(result.iterations);
      const std::vector<double> q = model.q_values(state);
      const std::size_t action = select_action(q, epsilon, rng);
      auto outcome = env.step(action);
      const double reward = compute_reward(outcome.collided, config);
      summary.steps = step;
      const bool terminal = outcome.collided;
      std::optional<typename M::State> next;
      if (!terminal) next = *outcome.next;
      memory.push({std::move(state), action, reward, std::move(outcome.next)});

      if (auto loss = train_step(memory, model, config, rng)) {
        ++result.iterations;
        if (on_iteration) {
          on_iteration({result.iterations, result.episodes, step, *loss, epsilon, reward,
                        env.start_index() + 1});
        }
      }
      if (terminal) {
        summary.terminal = true;
        break;
      }
      if (config.max_iterations && result.iterations >= config.max_iterations) break;
      state = std::move(*next);
    }
    result.episode_summaries.push_back(summary);
  }
  return result;
}

/// Adapts a QNetwork to QLearner over PackedDepth states. Action values for
/// acting and for targets come from Eval-mode forwards; gradient passes run in
/// Train mode (dropout active).
template <Real T>
class NetworkLearner {
 public:
  using State = PackedDepth;

  NetworkLearner(QNetwork<T> net, double learning_rate, double momentum);

  std::vector<double> q_values(const PackedDepth& state) const;
  double accumulate(const PackedDepth& state, std::size_t action, double target, double scale,
                    Rng& rng);
  void zero_grad() { grads_.set_zero(); }
  void apply_update() { optimizer_.step(network_.parameters(), grads_); }

  QNetwork<T>& network() { return network_; }
  const QNetwork<T>& network() const { return network_; }
  const SgdMomentum<T>& optimizer() const { return optimizer_; }

 private:
  Tensor<T> to_input(const PackedDepth& state) const;

  QNetwork<T> network_;
  ParameterSet<T> grads_;
  SgdMomentum<T> optimizer_;
};

extern template class NetworkLearner<float>;
extern template class NetworkLearner<double>;

}  // namespace depthq
