#include "depthq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "depthq/error.hpp"
#include "depthq/format.hpp"
#include "depthq/weights_io.hpp"

namespace depthq {

namespace {

void write_metadata(const std::filesystem::path& path, const TrainingSetup& setup,
                    const IterationRecord& at, double pretrain_accuracy) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint metadata " + path.string());
  out << "iteration=" << at.iteration << '\n'
      << "episode=" << at.episode << '\n'
      << "seed=" << setup.train.seed << '\n'
      << "profile=" << setup.profile << '\n'
      << "pretrain=" << (setup.pretrain ? "on" : "off") << '\n';
  if (setup.pretrain) out << "pretrain_accuracy=" << format_real(pretrain_accuracy) << '\n';
  std::size_t begin = 0;
  const std::string& snap = setup.config_snapshot;
  while (begin < snap.size()) {
    auto end = snap.find('\n', begin);
    if (end == std::string::npos) end = snap.size();
    if (end > begin) out << "config." << snap.substr(begin, end - begin) << '\n';
    begin = end + 1;
  }
  if (!out) throw IoError("failed writing checkpoint metadata " + path.string());
}

}  // namespace

std::string format_log_row(const IterationRecord& r) {
  return std::to_string(r.iteration) + ',' + std::to_string(r.episode) + ',' +
         std::to_string(r.step) + ',' + format_real(r.loss) + ',' + format_real(r.epsilon) + ',' +
         format_real(r.reward) + ',' + std::to_string(r.start_index);
}

TrainingResult run_training(const WorldMap& map, const TrainingSetup& setup) {
  setup.train.validate();
  EnvConfig env_config = setup.env;
  env_config.profile = SpeedProfile::Train;
  env_config.dt = setup.train.dt;
  env_config.collision_threshold = setup.train.collision_threshold;
  env_config.validate();
  NetworkConfig net_config = setup.network;
  net_config.input_rows = env_config.camera.rows;
  net_config.input_cols = env_config.camera.cols;

  const std::uint64_t seed = setup.train.seed;
  TrainingResult result;
  QNetwork<float> net = QNetwork<float>::he_initialized(net_config, derive_seed(seed, 1));

  if (setup.pretrain) {
    Rng data_rng(derive_seed(seed, 3));
    EnvConfig pilot_env = env_config;
    pilot_env.profile = SpeedProfile::Test;
    const auto data = generate_pilot_dataset(map, pilot_env, setup.pretrain_samples, data_rng);
    const std::size_t held_out = std::max<std::size_t>(1, data.size() / 5);
    std::span<const LabeledImage> all(data);
    pretrain_supervised(net, all.subspan(held_out), setup.pretrain_options, data_rng);
    result.pretrain_accuracy = label_accuracy(net, all.first(held_out));
  }

  const bool write = !setup.out_dir.empty();
  std::ofstream log;
  if (write) {
    std::filesystem::create_directories(setup.out_dir);
    log.open(setup.out_dir / "train_log.csv", std::ios::trunc);
    if (!log) throw IoError("cannot write " + (setup.out_dir / "train_log.csv").string());
    log << kTrainLogHeader << '\n';
  }

  NetworkLearner<float> learner(std::move(net), setup.train.learning_rate, setup.train.momentum);
  ReplayMemory<PackedDepth> memory(setup.train.memory_capacity);
  PackedDepthEnv env(map, env_config);
  Rng rng(derive_seed(seed, 2));
  const auto& checkpoints = setup.train.checkpoint_iterations;

  IterationRecord last;
  result.loop = train_loop(env, learner, memory, setup.train, rng, [&](const IterationRecord& r) {
    if (!std::isfinite(r.loss) && learner.network().config().checked) {
      throw NumericError("non-finite training loss at iteration " + std::to_string(r.iteration));
    }
    last = r;
    result.log.push_back(r);
    if (write) log << format_log_row(r) << '\n';
    if (std::find(checkpoints.begin(), checkpoints.end(), r.iteration) != checkpoints.end()) {
      auto snapshot = learner.network();
      snapshot.set_mode(Mode::Eval);
      result.snapshots.emplace_back(r.iteration, snapshot);
      if (!write) return;
      const auto base = setup.out_dir / ("checkpoint_" + std::to_string(r.iteration));
      save_weights(snapshot, base.string() + ".dqnw");
      write_metadata(base.string() + ".meta", setup, r, result.pretrain_accuracy);
      result.checkpoints.push_back(base.string() + ".dqnw");
    }
  });

  result.network = learner.network();
  result.network.set_mode(Mode::Eval);
  if (write) {
    log.flush();
    if (!log) throw IoError("failed writing training log");
    save_weights(result.network, setup.out_dir / "final.dqnw");
    write_metadata(setup.out_dir / "final.meta", setup, last, result.pretrain_accuracy);
  }
  return result;
}

}  // namespace depthq
