#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace depthq {

/// The five moving commands, in network output order.
enum class Action : std::uint8_t { Left = 0, HalfLeft = 1, Straight = 2, HalfRight = 3, Right = 4 };

inline constexpr std::size_t kNumActions = 5;

inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::Left, Action::HalfLeft, Action::Straight, Action::HalfRight, Action::Right};

/// One value per action, indexed by static_cast<size_t>(Action).
using QValues = std::array<double, kNumActions>;

constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

std::string_view action_name(Action a);

/// Index of the largest value; the lowest index wins ties.
std::size_t argmax_index(std::span<const double> values);

}  // namespace depthq
