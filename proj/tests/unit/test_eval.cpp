#include <doctest.h>

#include <cmath>

#include "depthq/error.hpp"
#include "depthq/eval.hpp"
#include "test_paths.hpp"

using namespace depthq;
using namespace depthq::testing;

namespace {

EvalConfig small_eval() {
  EvalConfig c;
  c.env.camera.rows = 16;
  c.env.camera.cols = 24;
  return c;
}

QNetwork<float> constant_net(const QValues& q) {
  NetworkConfig c;
  c.input_rows = 16;
  c.input_cols = 24;
  c.conv_channels = {2, 2, 2};
  c.fc_widths = {4};
  QNetwork<float> net(c);
  for (std::size_t a = 0; a < 5; ++a) net.fc_bias(1)[a] = static_cast<float>(q[a]);
  net.set_mode(Mode::Eval);
  return net;
}

}  // namespace

TEST_CASE("evaluation protocol defaults") {
  EvalConfig c;
  CHECK(c.step_cap == 200);
  CHECK(c.episodes_per_start == 10);
  CHECK(c.env.profile == SpeedProfile::Test);
}

TEST_CASE("every start gets its episodes and one metrics row") {
  const auto map = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  UniformRandomPolicy policy;
  const auto r = evaluate_model(policy, map, small_eval());
  REQUIRE(r.table.rows.size() == 12);
  CHECK(r.logs.size() == 120);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(r.table.rows[i].start_index == i + 1);
    CHECK(r.table.rows[i].episodes == 10);
  }
  for (const auto& log : r.logs) {
    CHECK(log.poses.size() == log.steps + 1);
    CHECK(log.actions.size() == log.steps);
    CHECK(log.steps <= 200);
    CHECK(((log.terminated_by == Termination::StepCap) == (log.steps == 200)));
  }
}

TEST_CASE("mean steps and displacement are per-start averages") {
  EpisodeLog a, b;
  a.poses = {{0, 0, 0}, {3, 4, 0}};
  a.steps = 1;
  b.poses = {{0, 0, 0}, {0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  b.steps = 3;
  const std::vector<EpisodeLog> logs{a, b};
  const auto row = summarize_start(4, logs);
  CHECK(row.start_index == 4);
  CHECK(row.mean_steps == 2.0);
  CHECK(row.mean_distance_m == doctest::Approx(3.0));
  CHECK(row.episodes == 2);
}

TEST_CASE("episodes are reproducible from their seed") {
  const auto map = load_world(world_path("paper_like"), small_eval().env.camera, 0.55);
  UniformRandomPolicy p1, p2;
  const auto seed = episode_seed(3, 5, 2);
  const auto a = run_episode(p1, map, 5, small_eval(), seed);
  const auto b = run_episode(p2, map, 5, small_eval(), seed);
  CHECK(a.same_trajectory(b));
  CHECK(episode_seed(3, 5, 2) != episode_seed(3, 5, 3));
  CHECK(episode_seed(3, 5, 2) != episode_seed(3, 6, 2));
}

TEST_CASE("start jitter stays within its limits and can be disabled") {
  const auto map = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  UniformRandomPolicy p;
  auto cfg = small_eval();
  for (std::size_t e = 0; e < 20; ++e) {
    const auto log = run_episode(p, map, 1, cfg, episode_seed(0, 1, e));
    CHECK(std::abs(log.poses[0].x - map.starts[0].x) <= 0.05 + 1e-12);
    CHECK(std::abs(log.poses[0].y - map.starts[0].y) <= 0.05 + 1e-12);
  }
  cfg.start_jitter_m = 0.0;
  cfg.start_jitter_deg = 0.0;
  CHECK(run_episode(p, map, 1, cfg, 5).poses[0] == map.starts[0]);
}

TEST_CASE("greedy evaluation requires Eval mode") {
  auto net = constant_net({0, 0, 1, 0, 0});
  net.set_mode(Mode::Train);
  CHECK_THROWS_AS(GreedyPolicy{net}, ConfigError);
}

TEST_CASE("a constant preference drives a constant command") {
  const auto net = constant_net({0, 0, 0, 0, 3});
  const auto map = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  const auto log = run_episode(net, map, 1, small_eval(), 11);
  for (Action a : log.actions) CHECK(a == Action::Right);
}

TEST_CASE("the step cap ends endless circling") {
  // A full left turn at 0.25 m/s, 1.2 rad/s stays within 0.21 m of its centre.
  const auto net = constant_net({5, 0, 0, 0, 0});
  const auto map = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  auto cfg = small_eval();
  cfg.step_cap = 37;
  const auto log = run_episode(net, map, 1, cfg, 1);
  CHECK(log.steps == 37);
  CHECK(log.terminated_by == Termination::StepCap);
}

TEST_CASE("a closed tiny room ends random runs quickly") {
  const auto map = load_world(world_path("closed_tiny"), small_eval().env.camera, 0.55);
  UniformRandomPolicy p;
  const auto r = evaluate_model(p, map, small_eval());
  CHECK(r.table.overall_mean_steps() < 20.0);
}

TEST_CASE("metrics CSV round trip") {
  MetricsTable t;
  for (std::size_t i = 1; i <= 12; ++i) t.rows.push_back({i, 10.0 + i / 3.0, 0.1 * i, 10});
  const auto text = format_metrics_csv(t);
  CHECK(text.rfind("start_index,mean_steps,mean_distance_m,episodes\n", 0) == 0);
  CHECK(parse_metrics_csv(text) == t);
  CHECK_THROWS_AS(parse_metrics_csv("bad\n"), FormatError);
}

TEST_CASE("episode log round trip") {
  const auto map = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  UniformRandomPolicy p;
  const auto log = run_episode(p, map, 3, small_eval(), 42);
  const auto text = format_episode_log(log);
  CHECK(text.rfind("# start_index=3 seed=42", 0) == 0);
  const auto back = parse_episode_log(text);
  CHECK(back.same_trajectory(log));
  CHECK_THROWS_AS(parse_episode_log("nonsense"), FormatError);
}

TEST_CASE("Q-value rows follow the table layout") {
  QRow row{"S1 DRL", {-16.3, -36.2, -31.7, -38.7, -44.5}, Action::Left};
  CHECK(format_q_row(row) == "S1 DRL: -16.3 -36.2 -31.7 -38.7 -44.5, argmax Left");
  const auto net = constant_net({-16.3, -36.2, -31.7, -38.7, -44.5});
  const std::vector<std::pair<std::string, DepthImage>> images{{"S1 DRL", DepthImage(16, 24)}};
  const auto rows = dump_q_values(net, images);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].best == Action::Left);
  CHECK(format_q_row(rows[0]) == "S1 DRL: -16.3 -36.2 -31.7 -38.7 -44.5, argmax Left");
  const auto table = format_q_table(rows);
  CHECK(table.rfind("# columns:", 0) == 0);
}

TEST_CASE("the dump's argmax agrees with the greedy policy") {
  const auto net = constant_net({0.1, 0.4, 0.4, -2, 0});
  const std::vector<std::pair<std::string, DepthImage>> images{{"x", DepthImage(16, 24)}};
  GreedyPolicy policy(net);
  QValues q;
  CHECK(dump_q_values(net, images)[0].best == policy.act(images[0].second, q));
  CHECK(dump_q_values(net, images)[0].best == Action::HalfLeft);
}

TEST_CASE("latency needs enough trials") {
  const auto net = constant_net({0, 0, 0, 0, 0});
  CHECK_THROWS_AS(measure_latency(net, DepthImage(16, 24), 5), ConfigError);
  const auto r = measure_latency(net, DepthImage(16, 24), 12);
  CHECK(r.samples_ms.size() == 12);
  CHECK(r.mean_ms > 0.0);
  CHECK(format_latency(r).find("ms") != std::string::npos);
}

TEST_CASE("driving straight at a wall stops inside the threshold band") {
  const auto net = constant_net({0, 0, 4, 0, 0});
  auto cfg = small_eval();
  cfg.start_jitter_m = 0.0;
  cfg.start_jitter_deg = 0.0;
  const auto map = load_world(world_path("corridor"), cfg.env.camera, 0.55);
  // Each step advances 0.25 m/s * 0.4 s; the first reading under the
  // threshold leaves the wall between min range and threshold.
  for (std::size_t start = 1; start <= map.starts.size(); ++start) {
    const auto log = run_episode(net, map, start, cfg, 5);
    CHECK(log.terminated_by == Termination::Collision);
    const double gap = 6.0 - log.poses.back().x;
    CHECK(gap >= 0.45 - 1e-9);
    CHECK(gap < 0.55 + 1e-9);
    CHECK(std::abs(log.poses.back().y - 0.8) < 1e-9);
    CHECK(log.poses.back().x == doctest::Approx(map.starts[start - 1].x + 0.1 * log.steps));
  }
}

TEST_CASE("circling at the default cap ends at exactly 200 steps") {
  const auto net = constant_net({5, 0, 0, 0, 0});
  const auto open = load_world(world_path("square_4m"), small_eval().env.camera, 0.55);
  const auto log = run_episode(net, open, 1, small_eval(), 2);
  CHECK(log.terminated_by == Termination::StepCap);
  CHECK(log.steps == 200);
  const auto tiny = load_world(world_path("closed_tiny"), small_eval().env.camera, 0.55);
  for (std::size_t start = 1; start <= tiny.starts.size(); ++start) {
    const auto t = run_episode(net, tiny, start, small_eval(), 3);
    CHECK((t.terminated_by == Termination::StepCap) == (t.steps == 200));
    CHECK(t.steps <= 200);
  }
}

TEST_CASE("mean of ten step counts is exact") {
  std::vector<EpisodeLog> logs;
  for (std::size_t s = 7; s <= 16; ++s) {
    EpisodeLog l;
    l.poses = {{0, 0, 0}, {0, 0, 0}};
    l.steps = s;
    logs.push_back(l);
  }
  CHECK(summarize_start(1, logs).mean_steps == 11.5);
}

TEST_CASE("a policy that hits the wall quickly scores small everywhere") {
  const auto net = constant_net({0, 0, 4, 0, 0});
  const auto map = load_world(world_path("closed_tiny"), small_eval().env.camera, 0.55);
  auto cfg = small_eval();
  cfg.episodes_per_start = 2;
  const auto r = evaluate_model(net, map, cfg);
  for (const auto& row : r.table.rows) {
    CHECK(row.mean_steps < 8.0);
    CHECK(row.mean_distance_m < 0.8);
  }
}

TEST_CASE("an all-zero network dumps zeros and picks Left") {
  const auto net = constant_net({0, 0, 0, 0, 0});
  const std::vector<std::pair<std::string, DepthImage>> images{{"z", DepthImage(16, 24, 1.5f)}};
  const auto rows = dump_q_values(net, images);
  for (double q : rows[0].q) CHECK(q == 0.0);
  CHECK(rows[0].best == Action::Left);
}

TEST_CASE("latency reports mean and spread over the requested trials") {
  NetworkConfig c;
  c.input_rows = 24;
  c.input_cols = 32;
  c.conv_channels = {8, 16, 16};
  c.fc_widths = {64, 64};
  auto net = QNetwork<float>::he_initialized(c, 4);
  net.set_mode(Mode::Eval);
  const DepthImage img(24, 32, 2.0f);
  const auto a = measure_latency(net, img, 100);
  REQUIRE(a.samples_ms.size() == 100);
  double sum = 0.0;
  for (double s : a.samples_ms) sum += s;
  CHECK(a.mean_ms == doctest::Approx(sum / 100.0));
  CHECK(a.std_ms >= 0.0);
  CHECK(format_latency(a).find("+-") != std::string::npos);
  const auto b = measure_latency(net, img, 100);
  CHECK(std::abs(a.mean_ms - b.mean_ms) < 0.5 * std::max(a.mean_ms, b.mean_ms));
}
