#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "depthq/environment.hpp"
#include "depthq/qnetwork.hpp"

namespace depthq {

enum class Termination { Collision, StepCap };

/// One evaluation episode. poses[0] is the start pose; poses[k] follows actions[k-1].
struct EpisodeLog {
  std::size_t start_index = 0;  // 1-based
  std::uint64_t seed = 0;
  std::vector<Pose> poses;
  std::vector<Action> actions;
  std::vector<QValues> q_values;
  std::size_t steps = 0;
  Termination terminated_by = Termination::Collision;
  /// Wall-clock duration of each policy decision, milliseconds.
  std::vector<double> latency_ms;

  /// Straight-line distance between the first and last pose.
  double displacement() const;
  /// Everything except the latency samples.
  bool same_trajectory(const EpisodeLog& other) const;
};

struct EvalConfig {
  EnvConfig env{CameraConfig{}, SpeedProfile::Test, 0.4, 0.55};
  std::size_t step_cap = 200;
  std::size_t episodes_per_start = 10;
  std::uint64_t base_seed = 0;
  /// Each episode's start pose is perturbed uniformly by up to these amounts
  /// (seeded per episode); a perturbed pose that is not collision-free falls
  /// back to the nominal start.
  double start_jitter_m = 0.05;
  double start_jitter_deg = 3.0;

  void validate() const;
};

/// Decision rule driven by depth images.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Called before every episode with that episode's seed.
  virtual void begin_episode(std::uint64_t /*seed*/) {}
  /// Chooses an action; fills `q` with the values it used (zeros if none).
  virtual Action act(const DepthImage& image, QValues& q) = 0;
};

/// Always the highest-valued command (Eval-mode network, lowest index on ties).
class GreedyPolicy final : public Policy {
 public:
  explicit GreedyPolicy(const QNetwork<float>& net);
  Action act(const DepthImage& image, QValues& q) override;

 private:
  const QNetwork<float>* net_;
};

/// Uniformly random commands; reseeded per episode.
class UniformRandomPolicy final : public Policy {
 public:
  void begin_episode(std::uint64_t seed) override { rng_.seed(seed); }
  Action act(const DepthImage& image, QValues& q) override;

 private:
  Rng rng_;
};

/// Seed of episode `episode` (0-based) at start `start_index` (1-based).
std::uint64_t episode_seed(std::uint64_t base_seed, std::size_t start_index, std::size_t episode);

/// Runs one episode from start `start_index` (1-based) until a collision or
/// the step cap.
EpisodeLog run_episode(Policy& policy, const WorldMap& map, std::size_t start_index,
                       const EvalConfig& config, std::uint64_t seed);
/// Greedy episode with a network, which must be in Eval mode.
EpisodeLog run_episode(const QNetwork<float>& net, const WorldMap& map, std::size_t start_index,
                       const EvalConfig& config, std::uint64_t seed);

struct MetricsRow {
  std::size_t start_index = 0;
  double mean_steps = 0.0;
  double mean_distance_m = 0.0;
  std::size_t episodes = 0;

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

/// Per-start means. Distance is start-to-end displacement, not path length, so
/// it understates exploration of looping trajectories.
struct MetricsTable {
  std::vector<MetricsRow> rows;

  double overall_mean_steps() const;
  friend bool operator==(const MetricsTable&, const MetricsTable&) = default;
};

MetricsRow summarize_start(std::size_t start_index, std::span<const EpisodeLog> episodes);

struct EvalReport {
  MetricsTable table;
  std::vector<EpisodeLog> logs;  // ordered by (start, episode)
};

/// Every start x episodes_per_start episodes.
EvalReport evaluate_model(Policy& policy, const WorldMap& map, const EvalConfig& config);
EvalReport evaluate_model(const QNetwork<float>& net, const WorldMap& map,
                          const EvalConfig& config);

inline constexpr const char* kMetricsHeader = "start_index,mean_steps,mean_distance_m,episodes";
std::string format_metrics_csv(const MetricsTable& table);
MetricsTable parse_metrics_csv(const std::string& text);
void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path);
MetricsTable read_metrics_csv(const std::filesystem::path& path);

/// Line records `step,x,y,theta,action,q0..q4` after a `# key=value` header
/// line; step 0 is the start pose with empty action and Q fields.
std::string format_episode_log(const EpisodeLog& log);
EpisodeLog parse_episode_log(const std::string& text, const std::string& source = "<log>");
void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path);
EpisodeLog read_episode_log(const std::filesystem::path& path);

struct LatencyReport {
  std::vector<double> samples_ms;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  std::size_t warmup = 0;
  std::string hardware_note;
};

/// Times `n_trials` forward passes after `warmup` untimed ones.
LatencyReport measure_latency(const QNetwork<float>& net, const DepthImage& image,
                              std::size_t n_trials, std::size_t warmup = 3);
std::string format_latency(const LatencyReport& report);

struct QRow {
  std::string label;
  QValues q{};
  Action best = Action::Left;
};

std::vector<QRow> dump_q_values(const QNetwork<float>& net,
                                std::span<const std::pair<std::string, DepthImage>> images);
/// "<label>: v0 v1 v2 v3 v4, argmax <Action>" with one decimal.
std::string format_q_row(const QRow& row);
/// Header naming the command columns followed by one format_q_row() per row.
std::string format_q_table(std::span<const QRow> rows);

}  // namespace depthq
