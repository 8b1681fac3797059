#include "depthq/actions.hpp"

namespace depthq {

std::string_view action_name(Action a) {
  switch (a) {
    case Action::Left: return "Left";
    case Action::HalfLeft: return "HalfLeft";
    case Action::Straight: return "Straight";
    case Action::HalfRight: return "HalfRight";
    case Action::Right: return "Right";
  }
  return "?";
}

std::size_t argmax_index(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace depthq
