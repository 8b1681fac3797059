#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "depthq/environment.hpp"
#include "depthq/qnetwork.hpp"

namespace depthq {

struct LabeledImage {
  DepthImage image;
  Action label = Action::Straight;
};

/// Geometric pilot used to label warm-start data: for each command, repeats it
/// for `horizon` steps and scores the smallest valid depth seen along the way
/// (a collision scores lowest). Returns the best-scoring command, lowest index
/// on ties.
Action scripted_pilot(const WorldMap& map, const Pose& pose, const EnvConfig& env,
                      std::size_t horizon = 3);

/// Samples collision-free poses uniformly in the map bounds and labels each
/// rendered image with scripted_pilot().
std::vector<LabeledImage> generate_pilot_dataset(const WorldMap& map, const EnvConfig& env,
                                                 std::size_t count, Rng& rng);

struct PretrainOptions {
  std::size_t epochs = 5;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double momentum = 0.9;
};

/// Supervised warm start: regresses the labeled command's output to +1 and
/// the other outputs to 0 (MSE, mini-batch SGD with momentum). Returns the
/// mean loss of the last epoch (0 when epochs == 0).
template <Real T>
double pretrain_supervised(QNetwork<T>& net, std::span<const LabeledImage> data,
                           const PretrainOptions& options, Rng& rng);

/// Fraction of samples whose greedy (Eval-mode) action equals the label.
template <Real T>
double label_accuracy(const QNetwork<T>& net, std::span<const LabeledImage> data);

}  // namespace depthq
