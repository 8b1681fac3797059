#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "depthq/error.hpp"
#include "depthq/random.hpp"

namespace depthq {

/// One replay record (x_t, a_t, r_t, x_{t+1}); `next` is empty for a terminal
/// (collision) transition.
template <class State>
struct Transition {
  State state;
  std::size_t action = 0;
  double reward = 0.0;
  std::optional<State> next;

  bool terminal() const { return !next.has_value(); }
};

/// Fixed-capacity FIFO ring of transitions.
template <class State>
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("replay memory capacity must be positive");
    slots_.reserve(capacity);
  }

  void push(Transition<State> t) {
    if (slots_.size() < capacity_) {
      slots_.push_back(std::move(t));
    } else {
      slots_[head_] = std::move(t);
      head_ = (head_ + 1) % capacity_;
    }
    ++inserted_;
  }

  std::size_t size() const { return slots_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Total number of transitions ever pushed.
  std::uint64_t inserted() const { return inserted_; }

  /// i-th oldest stored transition.
  const Transition<State>& at(std::size_t i) const {
    if (i >= slots_.size()) throw ConfigError("replay index out of range");
    return slots_[(head_ + i) % slots_.size()];
  }

  /// `n` indices drawn uniformly with replacement.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const {
    if (slots_.empty()) throw ConfigError("cannot sample from an empty replay memory");
    std::uniform_int_distribution<std::size_t> pick(0, slots_.size() - 1);
    std::vector<std::size_t> out(n);
    for (auto& i : out) i = pick(rng);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // oldest element once full
  std::uint64_t inserted_ = 0;
  std::vector<Transition<State>> slots_;
};

}  // namespace depthq
