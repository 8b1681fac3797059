// Acceptance suite: one PASS/FAIL line per criterion.
//   depthq_acceptance            run all
//   depthq_acceptance 3 6        run the listed criteria

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "convex_room.hpp"
#include "depthq/agent.hpp"
#include "depthq/depth_camera.hpp"
#include "depthq/eval.hpp"
#include "depthq/heatmap.hpp"
#include "depthq/run_config.hpp"
#include "depthq/saliency.hpp"
#include "depthq/trainer.hpp"
#include "grad_check.hpp"
#include "test_paths.hpp"
#include "toy_mdp.hpp"

using namespace depthq;
using namespace depthq::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1
Outcome gradients() {
  const auto t0 = Clock::now();
  const auto stats = run_gradient_suite(100, 20240601);
  const double elapsed = seconds_since(t0);
  std::size_t instances = 0, fewest = stats.empty() ? 0 : stats.front().instances;
  double worst = 0.0;
  std::string per_layer;
  for (const auto& s : stats) {
    instances += s.instances;
    fewest = std::min(fewest, s.instances);
    worst = std::max(worst, s.max_rel_error);
    per_layer += " " + s.layer + "=" + fmt("%.1e", s.max_rel_error);
  }
  return {worst < 1e-4 && fewest >= 100 && elapsed < 120.0,
          std::to_string(instances) + " instances, max rel error " + fmt("%.2e", worst) + " (<1e-4)," +
              per_layer + ", " + fmt("%.1fs", elapsed)};
}

// 2
Outcome tabular_dqn() {
  const auto t0 = Clock::now();
  TrainConfig cfg;
  cfg.max_iterations = 20000;
  cfg.epsilon = {1.0, 1.0, 1};
  cfg.max_episode_steps = 50;
  ToyMdp env;
  TabularLearner model(0.5);
  ReplayMemory<std::size_t> mem(cfg.memory_capacity);
  Rng rng(2);
  train_loop(env, model, mem, cfg, rng);
  const auto q_star = toy_value_iteration(cfg.gamma, cfg.reward_move, cfg.reward_terminal);
  double worst = 0.0;
  for (std::size_t s = 0; s < 5; ++s) {
    for (std::size_t a = 0; a < 2; ++a) worst = std::max(worst, std::abs(model.q(s, a) - q_star[s][a]));
  }
  const double elapsed = seconds_since(t0);
  return {worst < 1e-3 && elapsed < 10.0,
          "max |Q - Q*| " + fmt("%.2e", worst) + " (<1e-3), gamma 0.85, " + fmt("%.2fs", elapsed)};
}

// 3
Outcome raycast() {
  const auto t0 = Clock::now();
  Rng rng(31337);
  CameraConfig cam;
  std::size_t poses = 0, clamped = 0;
  double worst = 0.0;
  while (poses < 1000) {
    const auto room = random_convex_room(rng);
    for (int k = 0; k < 10 && poses < 1000; ++k) {
      Vec2 o;
      if (!sample_interior(room, rng, 0.05, o)) break;
      const double heading = std::uniform_real_distribution<double>(-3.14159, 3.14159)(rng);
      const double d = convex_exit_distance(room, o, heading);
      const double want = (d < cam.min_range || d > cam.max_range) ? 0.0 : d;
      clamped += want == 0.0;
      const auto img = render_depth(room.map, Pose{o.x, o.y, heading}, cam);
      worst = std::max(worst, std::abs(static_cast<double>(img.at(cam.rows / 2, cam.cols / 2)) - want));
      ++poses;
    }
  }
  // Explicit clamp checks against a wall straight ahead.
  const auto wall = [](double x) {
    return WorldMap{"wall", {-20, -20, 20, 20}, {{{x, -20}, {x, 20}}}, {}};
  };
  const bool far_zero = render_depth(wall(5.2), Pose{}, cam).at(0, 80) == 0.0f;
  const bool near_zero = render_depth(wall(0.4), Pose{}, cam).at(0, 80) == 0.0f;
  const bool inside = std::abs(render_depth(wall(4.9), Pose{}, cam).at(0, 80) - 4.9) < 1e-6;
  const double elapsed = seconds_since(t0);
  return {worst < 1e-6 && far_zero && near_zero && inside && elapsed < 10.0,
          std::to_string(poses) + " poses, max center error " + fmt("%.2e", worst) + " m (<1e-6), " +
              std::to_string(clamped) + " out-of-range rays read 0, clamp checks " +
              (far_zero && near_zero && inside ? "ok" : "FAILED") + ", " + fmt("%.2fs", elapsed)};
}

// 4
Outcome algorithm_structure() {
  std::vector<std::string> problems;
  const TrainConfig defaults;
  const auto map = load_world(world_path("paper_like"));

  // Gather real transitions with the default constants and a small network.
  TrainConfig cfg;
  cfg.max_iterations = 400;
  cfg.batch_size = 32;
  NetworkConfig net_cfg;
  net_cfg.input_rows = 24;
  net_cfg.input_cols = 32;
  net_cfg.conv_channels = {4, 4, 4};
  net_cfg.fc_widths = {16, 16};
  EnvConfig env_cfg;
  env_cfg.camera.rows = 24;
  env_cfg.camera.cols = 32;
  NetworkLearner<float> learner(QNetwork<float>::he_initialized(net_cfg, 4), cfg.learning_rate,
                                cfg.momentum);
  ReplayMemory<PackedDepth> memory(cfg.memory_capacity);
  PackedDepthEnv env(map, env_cfg);
  Rng rng(4);
  train_loop(env, learner, memory, cfg, rng);

  std::size_t terminal = 0, nonterminal = 0;
  std::vector<const Transition<PackedDepth>*> all;
  for (std::size_t i = 0; i < memory.size(); ++i) all.push_back(&memory.at(i));
  const auto targets = compute_targets<NetworkLearner<float>>(all, learner, defaults.gamma);
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& t = *all[i];
    if (t.terminal()) {
      ++terminal;
      if (t.reward != -100.0) problems.push_back("terminal reward != -100");
      if (targets[i] != -100.0) problems.push_back("terminal target != -100");
    } else {
      ++nonterminal;
      if (t.reward != 1.0) problems.push_back("non-terminal reward != +1");
      const auto q = learner.q_values(*t.next);
      const double expected = 1.0 + 0.85 * *std::max_element(q.begin(), q.end());
      if (targets[i] != expected) problems.push_back("non-terminal target != r + 0.85 max Q");
    }
  }
  if (terminal == 0 || nonterminal == 0) problems.push_back("sample lacks both transition kinds");
  // FIFO eviction at the default capacity.
  ReplayMemory<int> fifo(defaults.memory_capacity);
  for (int i = 0; i < 3000 + 250; ++i) fifo.push({i, 0, 1.0, i + 1});
  const bool fifo_ok = fifo.size() == 3000 && fifo.at(0).state == 250 && fifo.at(2999).state == 3249;
  if (!fifo_ok) problems.push_back("replay memory is not a 3000-slot FIFO");

  const bool constants = defaults.gamma == 0.85 && defaults.reward_terminal == -100.0 &&
                         defaults.reward_move == 1.0 && defaults.memory_capacity == 3000 &&
                         defaults.batch_size == 32;
  if (!constants) problems.push_back("default constants differ");

  std::sort(problems.begin(), problems.end());
  problems.erase(std::unique(problems.begin(), problems.end()), problems.end());
  std::string detail = std::to_string(terminal) + " terminal / " + std::to_string(nonterminal) +
                       " non-terminal transitions checked, Null next state on every terminal, "
                       "FIFO eviction at 3000 " + (fifo_ok ? "ok" : "FAILED");
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 5
Outcome trend() {
  const auto t0 = Clock::now();
  RunConfig cfg = load_run_config(data_dir() / "configs" / "trend_reduced.cfg");
  const auto map = load_world(data_dir() / "worlds" / "paper_like.world", cfg.eval.env.camera,
                              cfg.eval.env.collision_threshold);
  if (cfg.training.train.max_iterations < 10000) return {false, "configured for fewer than 10000 iterations"};
  const auto result = run_training(map, cfg.training);
  const double train_s = seconds_since(t0);

  UniformRandomPolicy random_policy;
  const double random_mean = evaluate_model(random_policy, map, cfg.eval).table.overall_mean_steps();
  double early = -1.0;
  for (const auto& [it, net] : result.snapshots) {
    if (it == 500) early = evaluate_model(net, map, cfg.eval).table.overall_mean_steps();
  }
  const auto final_report = evaluate_model(result.network, map, cfg.eval);
  const double final_mean = final_report.table.overall_mean_steps();
  // Loss trace, reported only: early-phase mean against the last 1000 iterations.
  auto mean_loss = [&](std::size_t from, std::size_t to) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : result.log) {
      if (r.iteration >= from && r.iteration < to && r.loss > 0.0) {
        sum += r.loss;
        ++n;
      }
    }
    return n ? sum / static_cast<double>(n) : 0.0;
  };
  const std::size_t iters = result.loop.iterations;
  const double loss_early = mean_loss(0, 1000);
  const double loss_late = mean_loss(iters > 1000 ? iters - 1000 : 0, iters + 1);
  std::string per_start;
  for (const auto& r : final_report.table.rows) per_start += " " + fmt("%.0f", r.mean_steps);
  const bool pass = result.loop.iterations >= 10000 && early >= 0.0 &&
                    final_mean >= 2.0 * random_mean && final_mean > early;
  return {pass, std::to_string(result.loop.iterations) + " iterations at " +
                    std::to_string(cfg.training.env.camera.rows) + "x" +
                    std::to_string(cfg.training.env.camera.cols) + ", mean steps: random " +
                    fmt("%.2f", random_mean) + ", 500-iteration " + fmt("%.2f", early) + ", final " +
                    fmt("%.2f", final_mean) + " (need >= " + fmt("%.2f", 2 * random_mean) +
                    " and > 500-iteration), per start" + per_start + ", loss mean first 1000 " +
                    fmt("%.1f", loss_early) + " last 1000 " + fmt("%.1f", loss_late) + ", training " +
                    fmt("%.0fs", train_s)};
}

// 6
Outcome saliency() {
  std::vector<std::string> problems;
  NetworkConfig cfg;
  cfg.conv_channels = {4, 4, 4};
  cfg.fc_widths = {8};
  const auto net = QNetwork<float>::he_initialized(cfg, 2024);
  const auto map = load_world(world_path("paper_like"));
  const auto image = render_depth(map, map.starts[0], CameraConfig{});
  const auto sal = compute_saliency(net, image, 0.10);
  if (sal.mask.count() != 1920 || sal.mask.marked.size() != 19200) problems.push_back("mask size");

  // Constants survive upsampling; pool3 upsampling matches dense bilinear interpolation.
  const auto coarse = collapse_channels(forward_q(net, image).pool3);
  const auto up = bilinear_upsample8(coarse);
  const auto flat = bilinear_upsample8(Tensor<double>({15, 20}, 3.25));
  double const_err = 0.0, dense_err = 0.0;
  for (std::size_t y = 4; y + 4 < 120; ++y) {
    for (std::size_t x = 4; x + 4 < 160; ++x) {
      const_err = std::max(const_err, std::abs(flat.at(y, x) - 3.25));
      const double u = (y - 3.5) / 8.0, v = (x - 3.5) / 8.0;
      const auto i = static_cast<std::size_t>(u), j = static_cast<std::size_t>(v);
      const double fu = u - i, fv = v - j;
      const double dense = (1 - fu) * (1 - fv) * coarse[i * 20 + j] + (1 - fu) * fv * coarse[i * 20 + j + 1] +
                           fu * (1 - fv) * coarse[(i + 1) * 20 + j] + fu * fv * coarse[(i + 1) * 20 + j + 1];
      dense_err = std::max(dense_err, std::abs(up.at(y, x) - dense));
    }
  }
  if (const_err > 1e-12) problems.push_back("constant not reproduced");
  if (dense_err > 1e-5) problems.push_back("dense oracle mismatch");

  const auto overlay = render_overlay(image, sal.mask, sal.chosen, 5.0);
  const auto fixture_path = data_dir() / "fixtures" / "saliency_overlay.png";
  bool fixture_ok = false;
  if (std::filesystem::exists(fixture_path)) {
    const auto fixture = read_png(fixture_path);
    fixture_ok = fixture.width == overlay.width && fixture.height == overlay.height &&
                 fixture.rgb == overlay.rgb;
  }
  if (!fixture_ok) problems.push_back("overlay differs from fixture");
  std::string detail = std::to_string(sal.mask.count()) + " of " + std::to_string(sal.mask.marked.size()) +
                       " pixels masked, constant error " + fmt("%.1e", const_err) +
                       ", dense bilinear error " + fmt("%.1e", dense_err) + " (<1e-5), fixture " +
                       (fixture_ok ? "identical" : "DIFFERENT");
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

// 7
Outcome determinism() {
  const auto map = load_world(world_path("paper_like"));
  const auto setup_in = [](const std::filesystem::path& out) {
    RunConfig cfg = parse_run_config(
        "profile=from-scratch\ncamera_rows=24\ncamera_cols=32\nconv_channels=4,8,8\n"
        "fc_widths=16,16\niterations=300\ncheckpoints=100,250\nseed=42\n",
        "determinism");
    TrainingSetup s = cfg.training;
    s.out_dir = out;
    s.config_snapshot = to_text(cfg);
    return std::make_pair(s, cfg.eval);
  };
  TempDir a("acc_det_a"), b("acc_det_b");
  const auto [sa, eval_cfg] = setup_in(a.path());
  const auto ra = run_training(map, sa);
  const auto rb = run_training(map, setup_in(b.path()).first);
  std::size_t files = 0, identical = 0;
  for (const auto& entry : std::filesystem::directory_iterator(a.path())) {
    ++files;
    const auto name = entry.path().filename().string();
    identical += read_bytes(entry.path()) == read_bytes(b / name);
  }
  const auto ea = evaluate_model(ra.network, map, eval_cfg);
  const auto eb = evaluate_model(rb.network, map, eval_cfg);
  bool logs_same = ea.table == eb.table && ea.logs.size() == eb.logs.size();
  for (std::size_t i = 0; logs_same && i < ea.logs.size(); ++i) {
    logs_same = format_episode_log(ea.logs[i]) == format_episode_log(eb.logs[i]);
  }
  return {files >= 7 && identical == files && logs_same,
          std::to_string(identical) + "/" + std::to_string(files) +
              " output files byte-identical across two seeded runs (checkpoints, metadata, log), "
              "evaluation logs " + (logs_same ? "identical" : "DIFFER")};
}

// 8
Outcome metrics() {
  EvalConfig cfg;
  cfg.env.camera.rows = 24;
  cfg.env.camera.cols = 32;
  const auto map = load_world(world_path("paper_like"), cfg.env.camera, 0.55);
  NetworkConfig net_cfg;
  net_cfg.input_rows = 24;
  net_cfg.input_cols = 32;
  net_cfg.conv_channels = {4, 4, 4};
  net_cfg.fc_widths = {8};
  const auto net = QNetwork<float>::he_initialized(net_cfg, 8);
  const auto report = evaluate_model(net, map, cfg);
  bool rows_ok = report.table.rows.size() == 12 && report.logs.size() == 120;
  for (const auto& r : report.table.rows) rows_ok = rows_ok && r.episodes == 10;
  const auto hm = build_heatmap(std::span<const EpisodeLog>(report.logs), map.bounds, 0.2);
  const double peak = *std::max_element(hm.values.begin(), hm.values.end());
  const bool dims_ok = hm.cols == 50 && hm.rows == 40;
  return {rows_ok && peak == 1.0 && dims_ok,
          std::to_string(report.table.rows.size()) + " rows x " + std::to_string(cfg.episodes_per_start) +
              " episodes, heatmap " + std::to_string(hm.cols) + "x" + std::to_string(hm.rows) +
              " cells, max " + fmt("%.3f", peak)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "gradient check", gradients},
      {2, "tabular DQN fixed point", tabular_dqn},
      {3, "raycast exactness", raycast},
      {4, "replay-update structure", algorithm_structure},
      {5, "from-scratch training trend", trend},
      {6, "saliency pipeline", saliency},
      {7, "determinism", determinism},
      {8, "evaluation metrics", metrics},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
