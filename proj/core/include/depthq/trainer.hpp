#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "depthq/agent.hpp"
#include "depthq/environment.hpp"
#include "depthq/pretrain.hpp"
#include "depthq/qnetwork.hpp"

namespace depthq {

struct TrainingSetup {
  NetworkConfig network;
  /// Camera, dt and threshold for training; the Train speed profile is always used.
  EnvConfig env;
  TrainConfig train;
  std::string profile = "from-scratch";
  bool pretrain = false;
  std::size_t pretrain_samples = 2000;
  PretrainOptions pretrain_options;
  /// Output directory for the log and checkpoints; empty writes nothing.
  std::filesystem::path out_dir;
  /// Resolved configuration text copied into checkpoint metadata.
  std::string config_snapshot;
};

struct TrainingResult {
  TrainLoopResult loop;
  std::vector<IterationRecord> log;
  std::vector<std::filesystem::path> checkpoints;
  QNetwork<float> network{NetworkConfig{}};
  /// Network copies taken at each configured checkpoint iteration.
  std::vector<std::pair<std::size_t, QNetwork<float>>> snapshots;
  /// Accuracy of the warm-started network on held-out pilot labels (pretrain only).
  double pretrain_accuracy = 0.0;
};

inline constexpr const char* kTrainLogHeader = "iteration,episode,step,loss,epsilon,reward,start_index";

std::string format_log_row(const IterationRecord& r);

/// Runs the episodic replay training on `map`. Writes `train_log.csv`,
/// `checkpoint_<iteration>.dqnw` (+ `.meta`) at the configured iterations and
/// `final.dqnw` (+ `.meta`) into out_dir when it is set.
TrainingResult run_training(const WorldMap& map, const TrainingSetup& setup);

}  // namespace depthq
