#include "depthq/pretrain.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "depthq/error.hpp"
#include "depthq/kinematics.hpp"
#include "depthq/optim.hpp"

namespace depthq {

Action scripted_pilot(const WorldMap& map, const Pose& pose, const EnvConfig& env,
                      std::size_t horizon) {
  double best_score = -std::numeric_limits<double>::infinity();
  Action best = Action::Left;
  for (Action a : kAllActions) {
    Pose p = pose;
    double score = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < horizon; ++k) {
      p = step_kinematics(p, a, env.profile, env.dt);
      const DepthImage img = render_depth(map, p, env.camera);
      if (!map.bounds.contains(p.x, p.y) || check_collision(img, env.collision_threshold)) {
        score = -1.0 + static_cast<double>(k) * 1e-3;  // later collisions are less bad
        break;
      }
      score = std::min(score, static_cast<double>(*min_valid_depth(img)));
    }
    if (score > best_score) {
      best_score = score;
      best = a;
    }
  }
  return best;
}

std::vector<LabeledImage> generate_pilot_dataset(const WorldMap& map, const EnvConfig& env,
                                                 std::size_t count, Rng& rng) {
  std::uniform_real_distribution<double> ux(map.bounds.min_x, map.bounds.max_x);
  std::uniform_real_distribution<double> uy(map.bounds.min_y, map.bounds.max_y);
  std::uniform_real_distribution<double> uth(-3.141592653589793, 3.141592653589793);
  std::vector<LabeledImage> out;
  out.reserve(count);
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 200 * (count + 1)) {
      throw ConfigError("could not sample enough collision-free poses in '" + map.name + "'");
    }
    const Pose p{ux(rng), uy(rng), uth(rng)};
    DepthImage img = render_depth(map, p, env.camera);
    if (check_collision(img, env.collision_threshold)) continue;
    out.push_back({std::move(img), scripted_pilot(map, p, env)});
  }
  return out;
}

template <Real T>
double pretrain_supervised(QNetwork<T>& net, std::span<const LabeledImage> data,
                           const PretrainOptions& options, Rng& rng) {
  if (data.empty()) throw ConfigError("pretraining needs a non-empty labeled set");
  if (options.epochs == 0) return 0.0;
  if (options.batch_size == 0) throw ConfigError("pretrain batch size must be positive");
  const Mode saved = net.mode();
  net.set_mode(Mode::Train);
  SgdMomentum<T> optimizer(options.learning_rate, options.momentum);
  auto grads = net.parameters().zeros_like();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  const std::size_t outputs = net.config().num_actions;
  double epoch_loss = 0.0;
  for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += options.batch_size) {
      const std::size_t end = std::min(order.size(), begin + options.batch_size);
      const double scale = 1.0 / static_cast<double>(end - begin);
      grads.set_zero();
      for (std::size_t k = begin; k < end; ++k) {
        const auto& sample = data[order[k]];
        Activations<T> cache;
        const Tensor<T> out = net.forward(net.input_from(sample.image), &cache, &rng);
        std::vector<T> g(outputs);
        for (std::size_t a = 0; a < outputs; ++a) {
          const double target = a == index_of(sample.label) ? 1.0 : 0.0;
          const double err = static_cast<double>(out[a]) - target;
          epoch_loss += err * err / static_cast<double>(outputs);
          g[a] = static_cast<T>(2.0 * err * scale / static_cast<double>(outputs));
        }
        net.backward(cache, g, grads);
      }
      optimizer.step(net.parameters(), grads);
    }
    epoch_loss /= static_cast<double>(data.size());
  }
  net.set_mode(saved);
  return epoch_loss;
}

template <Real T>
double label_accuracy(const QNetwork<T>& net, std::span<const LabeledImage> data) {
  if (data.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& sample : data) {
    const Tensor<T> out = net.forward(net.input_from(sample.image), Mode::Eval, nullptr, nullptr);
    const QValues q = to_qvalues(out);
    if (argmax_index(q) == index_of(sample.label)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

template double pretrain_supervised(QNetwork<float>&, std::span<const LabeledImage>,
                                    const PretrainOptions&, Rng&);
template double pretrain_supervised(QNetwork<double>&, std::span<const LabeledImage>,
                                    const PretrainOptions&, Rng&);
template double label_accuracy(const QNetwork<float>&, std::span<const LabeledImage>);
template double label_accuracy(const QNetwork<double>&, std::span<const LabeledImage>);

}  // namespace depthq
