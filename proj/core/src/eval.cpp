#include "depthq/eval.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <thread>

#include "depthq/error.hpp"
#include "depthq/format.hpp"
#include "depthq/kinematics.hpp"

namespace depthq {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

Pose jittered_start(const WorldMap& map, std::size_t index, const EvalConfig& config,
                    std::uint64_t seed) {
  const Pose nominal = map.starts[index];
  if (config.start_jitter_m <= 0.0 && config.start_jitter_deg <= 0.0) return nominal;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double dx = unit(rng) * config.start_jitter_m;
  const double dy = unit(rng) * config.start_jitter_m;
  const double dth = unit(rng) * config.start_jitter_deg * std::numbers::pi / 180.0;
  const Pose p{nominal.x + dx, nominal.y + dy, normalize_angle(nominal.theta + dth)};
  if (!map.bounds.contains(p.x, p.y) ||
      check_collision(render_depth(map, p, config.env.camera), config.env.collision_threshold)) {
    return nominal;
  }
  return p;
}

}  // namespace

double EpisodeLog::displacement() const {
  if (poses.empty()) return 0.0;
  return std::hypot(poses.back().x - poses.front().x, poses.back().y - poses.front().y);
}

bool EpisodeLog::same_trajectory(const EpisodeLog& o) const {
  return start_index == o.start_index && seed == o.seed && poses == o.poses &&
         actions == o.actions && q_values == o.q_values && steps == o.steps &&
         terminated_by == o.terminated_by;
}

void EvalConfig::validate() const {
  env.validate();
  if (step_cap == 0) throw ConfigError("step cap must be positive");
  if (episodes_per_start == 0) throw ConfigError("episodes per start must be positive");
  if (start_jitter_m < 0.0 || start_jitter_deg < 0.0) throw ConfigError("jitter must be >= 0");
}

GreedyPolicy::GreedyPolicy(const QNetwork<float>& net) : net_(&net) {
  if (net.mode() != Mode::Eval) throw ConfigError("greedy evaluation needs an Eval-mode network");
}

Action GreedyPolicy::act(const DepthImage& image, QValues& q) {
  q = forward_q(*net_, image).q;
  return static_cast<Action>(argmax_index(q));
}

Action UniformRandomPolicy::act(const DepthImage&, QValues& q) {
  q.fill(0.0);
  std::uniform_int_distribution<std::size_t> pick(0, kNumActions - 1);
  return static_cast<Action>(pick(rng_));
}

std::uint64_t episode_seed(std::uint64_t base_seed, std::size_t start_index, std::size_t episode) {
  return derive_seed(base_seed, start_index * 100000 + episode);
}

EpisodeLog run_episode(Policy& policy, const WorldMap& map, std::size_t start_index,
                       const EvalConfig& config, std::uint64_t seed) {
  config.validate();
  if (start_index < 1 || start_index > map.starts.size()) {
    throw ConfigError("start index " + std::to_string(start_index) + " out of range 1.." +
                      std::to_string(map.starts.size()));
  }
  DepthEnv env(map, config.env);
  DepthImage image = env.reset_to(start_index - 1, jittered_start(map, start_index - 1, config, seed));
  policy.begin_episode(seed);

  EpisodeLog log;
  log.start_index = start_index;
  log.seed = seed;
  log.poses.push_back(env.pose());
  log.terminated_by = Termination::StepCap;
  while (log.steps < config.step_cap) {
    QValues q{};
    const auto t0 = std::chrono::steady_clock::now();
    const Action a = policy.act(image, q);
    const auto t1 = std::chrono::steady_clock::now();
    log.latency_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    auto outcome = env.step(a);
    log.actions.push_back(a);
    log.q_values.push_back(q);
    log.poses.push_back(env.pose());
    ++log.steps;
    if (outcome.collided) {
      log.terminated_by = Termination::Collision;
      break;
    }
    image = std::move(*outcome.next);
  }
  return log;
}

EpisodeLog run_episode(const QNetwork<float>& net, const WorldMap& map, std::size_t start_index,
                       const EvalConfig& config, std::uint64_t seed) {
  GreedyPolicy policy(net);
  return run_episode(policy, map, start_index, config, seed);
}

double MetricsTable::overall_mean_steps() const {
  if (rows.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : rows) sum += r.mean_steps;
  return sum / static_cast<double>(rows.size());
}

MetricsRow summarize_start(std::size_t start_index, std::span<const EpisodeLog> episodes) {
  MetricsRow row{start_index, 0.0, 0.0, episodes.size()};
  if (episodes.empty()) return row;
  for (const auto& e : episodes) {
    row.mean_steps += static_cast<double>(e.steps);
    row.mean_distance_m += e.displacement();
  }
  row.mean_steps /= static_cast<double>(episodes.size());
  row.mean_distance_m /= static_cast<double>(episodes.size());
  return row;
}

EvalReport evaluate_model(Policy& policy, const WorldMap& map, const EvalConfig& config) {
  config.validate();
  EvalReport report;
  for (std::size_t s = 1; s <= map.starts.size(); ++s) {
    const std::size_t first = report.logs.size();
    for (std::size_t e = 0; e < config.episodes_per_start; ++e) {
      report.logs.push_back(run_episode(policy, map, s, config, episode_seed(config.base_seed, s, e)));
    }
    report.table.rows.push_back(summarize_start(
        s, std::span<const EpisodeLog>(report.logs).subspan(first, config.episodes_per_start)));
  }
  return report;
}

EvalReport evaluate_model(const QNetwork<float>& net, const WorldMap& map,
                          const EvalConfig& config) {
  GreedyPolicy policy(net);
  return evaluate_model(policy, map, config);
}

std::string format_metrics_csv(const MetricsTable& table) {
  std::string out = std::string(kMetricsHeader) + '\n';
  for (const auto& r : table.rows) {
    out += std::to_string(r.start_index) + ',' + format_real(r.mean_steps) + ',' +
           format_real(r.mean_distance_m) + ',' + std::to_string(r.episodes) + '\n';
  }
  return out;
}

MetricsTable parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw FormatError("metrics CSV: missing header '" + std::string(kMetricsHeader) + "'");
  }
  MetricsTable table;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = "metrics CSV line " + std::to_string(line_no);
    if (f.size() != 4) throw FormatError(where + ": expected 4 fields");
    table.rows.push_back({static_cast<std::size_t>(parse_unsigned(f[0], where)),
                          parse_real(f[1], where), parse_real(f[2], where),
                          static_cast<std::size_t>(parse_unsigned(f[3], where))});
  }
  return table;
}

void write_metrics_csv(const MetricsTable& table, const std::filesystem::path& path) {
  write_text(path, format_metrics_csv(table));
}

MetricsTable read_metrics_csv(const std::filesystem::path& path) {
  return parse_metrics_csv(read_text(path));
}

std::string format_episode_log(const EpisodeLog& log) {
  std::string out = "# start_index=" + std::to_string(log.start_index) +
                    " seed=" + std::to_string(log.seed) + " steps=" + std::to_string(log.steps) +
                    " terminated_by=" +
                    (log.terminated_by == Termination::Collision ? "collision" : "step_cap") + '\n';
  out += "step,x,y,theta,action,q0,q1,q2,q3,q4\n";
  for (std::size_t k = 0; k < log.poses.size(); ++k) {
    const auto& p = log.poses[k];
    out += std::to_string(k) + ',' + format_real(p.x) + ',' + format_real(p.y) + ',' +
           format_real(p.theta) + ',';
    if (k == 0) {
      out += ",,,,,\n";
      continue;
    }
    out += std::to_string(index_of(log.actions[k - 1]));
    for (double q : log.q_values[k - 1]) out += ',' + format_real(q);
    out += '\n';
  }
  return out;
}

EpisodeLog parse_episode_log(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  EpisodeLog log;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw FormatError(source + ": missing '# key=value' header line");
  }
  bool have_term = false;
  std::istringstream header(line.substr(2));
  std::string kv;
  while (header >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw FormatError(source + ": bad header field '" + kv + "'");
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "start_index") log.start_index = parse_unsigned(value, source);
    else if (key == "seed") log.seed = parse_unsigned(value, source);
    else if (key == "steps") log.steps = parse_unsigned(value, source);
    else if (key == "terminated_by") {
      if (value == "collision") log.terminated_by = Termination::Collision;
      else if (value == "step_cap") log.terminated_by = Termination::StepCap;
      else throw FormatError(source + ": unknown termination '" + value + "'");
      have_term = true;
    }
  }
  if (!have_term) throw FormatError(source + ": header lacks terminated_by");
  if (!std::getline(in, line) || line != "step,x,y,theta,action,q0,q1,q2,q3,q4") {
    throw FormatError(source + ": missing column header");
  }
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto f = split(line, ',');
    if (f.size() != 10) throw FormatError(where + ": expected 10 fields");
    if (parse_unsigned(f[0], where) != log.poses.size()) throw FormatError(where + ": step out of order");
    log.poses.push_back({parse_real(f[1], where), parse_real(f[2], where), parse_real(f[3], where)});
    if (log.poses.size() == 1) continue;
    const auto a = parse_unsigned(f[4], where);
    if (a >= kNumActions) throw FormatError(where + ": action out of range");
    log.actions.push_back(static_cast<Action>(a));
    QValues q{};
    for (std::size_t i = 0; i < kNumActions; ++i) q[i] = parse_real(f[5 + i], where);
    log.q_values.push_back(q);
  }
  if (log.poses.empty() || log.actions.size() != log.steps) {
    throw FormatError(source + ": step count does not match records");
  }
  return log;
}

void write_episode_log(const EpisodeLog& log, const std::filesystem::path& path) {
  write_text(path, format_episode_log(log));
}

EpisodeLog read_episode_log(const std::filesystem::path& path) {
  return parse_episode_log(read_text(path), path.string());
}

LatencyReport measure_latency(const QNetwork<float>& net, const DepthImage& image,
                              std::size_t n_trials, std::size_t warmup) {
  if (n_trials < 10) throw ConfigError("latency measurement needs at least 10 trials");
  const Tensor<float> input = net.input_from(image);
  for (std::size_t i = 0; i < warmup; ++i) net.forward(input, Mode::Eval, nullptr, nullptr);
  LatencyReport report;
  report.warmup = warmup;
  report.samples_ms.reserve(n_trials);
  for (std::size_t i = 0; i < n_trials; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = net.forward(input, Mode::Eval, nullptr, nullptr);
    const auto t1 = std::chrono::steady_clock::now();
    if (out.empty()) throw NumericError("empty network output");
    report.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  const double n = static_cast<double>(n_trials);
  report.mean_ms = std::accumulate(report.samples_ms.begin(), report.samples_ms.end(), 0.0) / n;
  double var = 0.0;
  for (double s : report.samples_ms) var += (s - report.mean_ms) * (s - report.mean_ms);
  report.std_ms = std::sqrt(var / n);
  report.hardware_note = "single-threaded CPU forward pass, " +
                         std::to_string(std::thread::hardware_concurrency()) +
                         " hardware threads available; figures are machine-specific";
  return report;
}

std::string format_latency(const LatencyReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%.3f ms +- %.3f ms (n=%zu, warmup=%zu)", r.mean_ms, r.std_ms,
                r.samples_ms.size(), r.warmup);
  return std::string(buf) + "\n" + r.hardware_note + "\n";
}

std::vector<QRow> dump_q_values(const QNetwork<float>& net,
                                std::span<const std::pair<std::string, DepthImage>> images) {
  if (net.mode() != Mode::Eval) throw ConfigError("Q-value dump needs an Eval-mode network");
  std::vector<QRow> rows;
  for (const auto& [label, image] : images) {
    QRow row{label, forward_q(net, image).q, Action::Left};
    row.best = static_cast<Action>(argmax_index(row.q));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_q_row(const QRow& row) {
  std::string out = row.label + ":";
  char buf[32];
  for (double v : row.q) {
    std::snprintf(buf, sizeof buf, " %.1f", v);
    out += buf;
  }
  out += ", argmax ";
  out += action_name(row.best);
  return out;
}

std::string format_q_table(std::span<const QRow> rows) {
  std::string out = "# columns:";
  for (Action a : kAllActions) {
    out += ' ';
    out += action_name(a);
  }
  out += '\n';
  for (const auto& r : rows) out += format_q_row(r) + '\n';
  return out;
}

}  // namespace depthq
