#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "depthq/depth_camera.hpp"
#include "depthq/error.hpp"
#include "depthq/eval.hpp"
#include "depthq/format.hpp"
#include "depthq/heatmap.hpp"
#include "depthq/png_io.hpp"
#include "depthq/run_config.hpp"
#include "depthq/saliency.hpp"
#include "depthq/trainer.hpp"
#include "depthq/weights_io.hpp"

namespace depthq::cli {

namespace fs = std::filesystem;
using Overrides = std::vector<std::pair<std::string, std::string>>;

namespace {

struct Common {
  std::string config_file;
  std::string world;
  std::string out;
  std::string profile;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "key=value config file");
  cmd->add_option("--world", c.world, "world file");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--profile", c.profile, "paper | from-scratch");
  cmd->add_option("--seed", c.seed, "base seed");
  cmd->add_option("--set", c.sets, "extra key=value override (repeatable)");
}

void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("missing --") + what);
  if (!fs::is_regular_file(path)) throw ConfigError(std::string(what) + " file not found: " + path);
}

RunConfig resolve(const Common& c, Overrides extra = {}) {
  Overrides ov;
  if (!c.profile.empty()) ov.emplace_back("profile", c.profile);
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    ov.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!c.world.empty()) ov.emplace_back("world", c.world);
  if (!c.out.empty()) ov.emplace_back("out", c.out);
  if (c.seed) ov.emplace_back("seed", std::to_string(*c.seed));
  for (auto& e : extra) ov.push_back(std::move(e));
  if (c.config_file.empty()) return parse_run_config("", "<flags>", ov);
  require_file(c.config_file, "config");
  return load_run_config(c.config_file, ov);
}

WorldMap load_configured_world(const RunConfig& cfg, const CameraConfig& camera) {
  require_file(cfg.world.string(), "world");
  return load_world(cfg.world, camera, cfg.eval.env.collision_threshold);
}

fs::path output_dir(const RunConfig& cfg, const char* fallback) {
  fs::path dir = cfg.out_dir.empty() ? fs::path(fallback) : cfg.out_dir;
  fs::create_directories(dir);
  return dir;
}

QNetwork<float> load_eval_network(const std::string& path) {
  require_file(path, "weights");
  auto net = load_weights<float>(path);
  net.set_mode(Mode::Eval);
  return net;
}

Pose parse_pose(const std::string& text) {
  std::vector<double> v;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    auto end = text.find(',', begin);
    if (end == std::string::npos) end = text.size();
    try {
      v.push_back(parse_real(text.substr(begin, end - begin), "pose"));
    } catch (const FormatError& e) {
      throw ConfigError(e.what());
    }
    begin = end + 1;
  }
  if (v.size() != 3) throw ConfigError("pose must be x,y,heading_deg, got '" + text + "'");
  return Pose{v[0], v[1], v[2] * std::numbers::pi / 180.0};
}

DepthImage read_depth_pgm(const std::string& path) {
  require_file(path, "image");
  const Gray16Image g = read_pgm16(path);
  return PackedDepth{g.height, g.width, g.pixels}.unpack();
}

void write_depth_pgm(const DepthImage& image, const fs::path& path) {
  const auto packed = PackedDepth::pack(image);
  write_pgm16(Gray16Image{packed.cols, packed.rows, packed.millimeters}, path);
}

CameraConfig camera_for(const RunConfig& cfg, const QNetwork<float>& net) {
  CameraConfig cam = cfg.eval.env.camera;
  cam.rows = net.config().input_rows;
  cam.cols = net.config().input_cols;
  return cam;
}

DepthImage render_at(const WorldMap& map, const Pose& pose, const CameraConfig& camera) {
  if (!map.bounds.contains(pose.x, pose.y)) {
    throw ConfigError("pose (" + format_real(pose.x) + ", " + format_real(pose.y) +
                      ") is outside the world bounds");
  }
  return render_depth(map, pose, camera);
}

void check_input_size(const DepthImage& image, const QNetwork<float>& net) {
  if (image.rows != net.config().input_rows || image.cols != net.config().input_cols) {
    throw ConfigError("image is " + std::to_string(image.rows) + "x" + std::to_string(image.cols) +
                      " but the network expects " + std::to_string(net.config().input_rows) + "x" +
                      std::to_string(net.config().input_cols));
  }
}

// ---- train

struct TrainArgs {
  Common common;
  std::optional<std::size_t> iterations;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  Overrides extra;
  if (a.iterations) extra.emplace_back("iterations", std::to_string(*a.iterations));
  RunConfig cfg = resolve(a.common, extra);
  cfg.training.train.validate();
  const WorldMap map = load_configured_world(cfg, cfg.training.env.camera);
  const fs::path dir = output_dir(cfg, "train_out");
  cfg.out_dir = dir;
  write_resolved_config(cfg, dir / "resolved_config.txt");
  TrainingSetup setup = cfg.training;
  setup.out_dir = dir;
  setup.config_snapshot = to_text(cfg);
  const auto result = run_training(map, setup);
  out << "iterations " << result.loop.iterations << ", episodes " << result.loop.episodes << '\n';
  for (const auto& p : result.checkpoints) out << "checkpoint " << p.string() << '\n';
  out << "final " << (dir / "final.dqnw").string() << '\n';
  return kExitOk;
}

// ---- eval

struct EvalArgs {
  Common common;
  std::string weights;
  std::string policy = "greedy";
  std::optional<std::size_t> episodes_per_start;
  std::optional<std::size_t> step_cap;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  Overrides extra;
  if (a.episodes_per_start) extra.emplace_back("episodes_per_start", std::to_string(*a.episodes_per_start));
  if (a.step_cap) extra.emplace_back("step_cap", std::to_string(*a.step_cap));
  RunConfig cfg = resolve(a.common, extra);
  if (a.policy != "greedy" && a.policy != "random") {
    throw ConfigError("--policy must be greedy or random, got '" + a.policy + "'");
  }
  std::optional<QNetwork<float>> net;
  if (a.policy == "greedy") {
    net = load_eval_network(a.weights);
    cfg.eval.env.camera = camera_for(cfg, *net);
  }
  cfg.eval.validate();
  const WorldMap map = load_configured_world(cfg, cfg.eval.env.camera);
  const fs::path dir = output_dir(cfg, "eval_out");
  cfg.out_dir = dir;

  EvalReport report;
  if (net) {
    report = evaluate_model(*net, map, cfg.eval);
  } else {
    UniformRandomPolicy policy;
    report = evaluate_model(policy, map, cfg.eval);
  }
  write_resolved_config(cfg, dir / "resolved_config.txt");
  write_metrics_csv(report.table, dir / "metrics.csv");
  fs::create_directories(dir / "logs");
  for (std::size_t i = 0; i < report.logs.size(); ++i) {
    const auto& log = report.logs[i];
    const std::size_t ep = i % cfg.eval.episodes_per_start + 1;
    char name[64];
    std::snprintf(name, sizeof name, "start_%02zu_ep_%02zu.csv", log.start_index, ep);
    write_episode_log(log, dir / "logs" / name);
  }
  out << format_metrics_csv(report.table);
  out << "overall_mean_steps " << format_real(report.table.overall_mean_steps()) << '\n';
  return kExitOk;
}

// ---- heatmap

struct HeatmapArgs {
  Common common;
  std::vector<std::string> logs;
  std::optional<double> cell;
};

std::vector<EpisodeLog> read_log_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("log directory not found: " + dir.string());
  fs::path source = fs::is_directory(dir / "logs") ? dir / "logs" : dir;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(source)) {
    if (e.is_regular_file() && e.path().extension() == ".csv" && e.path().filename() != "metrics.csv") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw IoError("no episode logs in " + source.string());
  std::vector<EpisodeLog> logs;
  for (const auto& f : files) logs.push_back(read_episode_log(f));
  return logs;
}

int cmd_heatmap(const HeatmapArgs& a, std::ostream& out) {
  Overrides extra;
  if (a.cell) extra.emplace_back("heatmap_cell", format_real(*a.cell));
  RunConfig cfg = resolve(a.common, extra);
  if (a.logs.empty()) throw ConfigError("missing --logs");
  require_file(cfg.world.string(), "world");
  const WorldMap map = parse_world(
      [&] {
        std::ifstream in(cfg.world);
        return std::string(std::istreambuf_iterator<char>(in), {});
      }(),
      cfg.world.string());
  const fs::path dir = output_dir(cfg, "heatmap_out");
  cfg.out_dir = dir;
  write_resolved_config(cfg, dir / "resolved_config.txt");
  for (const auto& d : a.logs) {
    const auto logs = read_log_dir(d);
    const Heatmap hm = build_heatmap(std::span<const EpisodeLog>(logs), map.bounds, cfg.heatmap_cell);
    fs::path p = fs::path(d).lexically_normal();
    if (p.filename().empty()) p = p.parent_path();
    const std::string name = p.filename().string();
    write_pgm16(heatmap_to_gray16(hm), dir / (name + "_heatmap.pgm"));
    write_png(heatmap_to_rgb(hm), dir / (name + "_heatmap.png"));
    out << name << ": " << hm.cols << "x" << hm.rows << " cells from " << logs.size()
        << " episodes\n";
  }
  return kExitOk;
}

// ---- saliency / qdump / latency / render share an image source

struct ImageSource {
  std::vector<std::string> images;
  std::vector<std::string> poses;
};

void add_image_source(CLI::App* cmd, ImageSource& s) {
  cmd->add_option("--image", s.images, "16-bit millimeter PGM depth image (repeatable)");
  cmd->add_option("--pose", s.poses, "x,y,heading_deg rendered in --world (repeatable)");
}

std::vector<std::pair<std::string, DepthImage>> gather_images(const ImageSource& s,
                                                              const RunConfig& cfg,
                                                              const CameraConfig& camera) {
  std::vector<std::pair<std::string, DepthImage>> images;
  for (const auto& path : s.images) images.emplace_back(fs::path(path).stem().string(), read_depth_pgm(path));
  if (!s.poses.empty()) {
    const WorldMap map = load_configured_world(cfg, camera);
    for (std::size_t i = 0; i < s.poses.size(); ++i) {
      images.emplace_back("P" + std::to_string(i + 1), render_at(map, parse_pose(s.poses[i]), camera));
    }
  }
  return images;
}

struct SaliencyArgs {
  Common common;
  std::string weights;
  ImageSource source;
  std::optional<double> fraction;
  bool csv = false;
};

int cmd_saliency(const SaliencyArgs& a, std::ostream& out) {
  Overrides extra;
  if (a.fraction) extra.emplace_back("fraction", format_real(*a.fraction));
  RunConfig cfg = resolve(a.common, extra);
  const auto net = load_eval_network(a.weights);
  const CameraConfig camera = camera_for(cfg, net);
  if (a.source.images.size() + a.source.poses.size() != 1) {
    throw ConfigError("saliency needs exactly one --image or --pose");
  }
  const auto images = gather_images(a.source, cfg, camera);
  const DepthImage& image = images.front().second;
  check_input_size(image, net);
  const fs::path dir = output_dir(cfg, "saliency_out");
  cfg.out_dir = dir;
  const auto sal = compute_saliency(net, image, cfg.saliency_fraction);
  write_resolved_config(cfg, dir / "resolved_config.txt");
  write_png(render_overlay(image, sal.mask, sal.chosen, camera.max_range), dir / "overlay.png");
  if (a.csv) write_saliency_csv(sal.matrix, dir / "saliency.csv");
  out << format_q_row(QRow{images.front().first, sal.q, sal.chosen}) << '\n';
  out << "masked " << sal.mask.count() << " of " << sal.mask.marked.size() << " pixels\n";
  return kExitOk;
}

struct QdumpArgs {
  Common common;
  std::string weights;
  ImageSource source;
  std::vector<std::string> labels;
};

int cmd_qdump(const QdumpArgs& a, std::ostream& out) {
  RunConfig cfg = resolve(a.common);
  const auto net = load_eval_network(a.weights);
  auto images = gather_images(a.source, cfg, camera_for(cfg, net));
  if (images.empty()) throw ConfigError("qdump needs at least one --image or --pose");
  if (!a.labels.empty()) {
    if (a.labels.size() != images.size()) {
      throw ConfigError("--label count (" + std::to_string(a.labels.size()) +
                        ") does not match the image count (" + std::to_string(images.size()) + ")");
    }
    for (std::size_t i = 0; i < images.size(); ++i) images[i].first = a.labels[i];
  }
  for (const auto& [label, image] : images) check_input_size(image, net);
  const auto rows = dump_q_values(net, images);
  const std::string table = format_q_table(rows);
  out << table;
  if (!cfg.out_dir.empty()) {
    const fs::path dir = output_dir(cfg, "");
    write_resolved_config(cfg, dir / "resolved_config.txt");
    std::ofstream f(dir / "qdump.txt", std::ios::trunc);
    f << table;
    if (!f) throw IoError("failed writing " + (dir / "qdump.txt").string());
  }
  return kExitOk;
}

struct LatencyArgs {
  Common common;
  std::string weights;
  ImageSource source;
  std::size_t trials = 100;
  std::size_t warmup = 3;
};

int cmd_latency(const LatencyArgs& a, std::ostream& out) {
  RunConfig cfg = resolve(a.common);
  const auto net = load_eval_network(a.weights);
  const CameraConfig camera = camera_for(cfg, net);
  auto images = gather_images(a.source, cfg, camera);
  DepthImage image(camera.rows, camera.cols);
  if (images.empty()) {
    std::fill(image.pixels.begin(), image.pixels.end(), 2.0f);
  } else {
    image = images.front().second;
  }
  check_input_size(image, net);
  const auto report = measure_latency(net, image, a.trials, a.warmup);
  out << format_latency(report);
  return kExitOk;
}

struct RenderArgs {
  Common common;
  std::string pose;
  std::string file = "depth.pgm";
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
  RunConfig cfg = resolve(a.common);
  const WorldMap map = load_configured_world(cfg, cfg.eval.env.camera);
  const DepthImage image = render_at(map, parse_pose(a.pose), cfg.eval.env.camera);
  fs::path path = a.file;
  if (!cfg.out_dir.empty()) path = output_dir(cfg, "") / path;
  write_depth_pgm(image, path);
  out << path.string() << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Depth-image obstacle avoidance with deep Q-learning"};
  app.name("depthq");
  app.require_subcommand(1);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "train a network in a world");
  add_common(c_train, train.common);
  c_train->add_option("--iterations", train.iterations, "training iterations");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "evaluate a network from every start pose");
  add_common(c_eval, eval.common);
  c_eval->add_option("--weights", eval.weights, "weights file");
  c_eval->add_option("--policy", eval.policy, "greedy | random");
  c_eval->add_option("--episodes-per-start", eval.episodes_per_start, "episodes per start (10)");
  c_eval->add_option("--step-cap", eval.step_cap, "maximum steps per episode (200)");

  HeatmapArgs heat;
  auto* c_heat = app.add_subcommand("heatmap", "visit heatmaps from evaluation logs");
  add_common(c_heat, heat.common);
  c_heat->add_option("--logs", heat.logs, "directory of episode logs (repeatable)");
  c_heat->add_option("--cell", heat.cell, "cell size in meters (0.2)");

  SaliencyArgs sal;
  auto* c_sal = app.add_subcommand("saliency", "feature-map saliency overlay");
  add_common(c_sal, sal.common);
  c_sal->add_option("--weights", sal.weights, "weights file");
  add_image_source(c_sal, sal.source);
  c_sal->add_option("--fraction", sal.fraction, "fraction of pixels to mark (0.10)");
  c_sal->add_flag("--csv", sal.csv, "also write the saliency matrix");

  QdumpArgs qd;
  auto* c_qd = app.add_subcommand("qdump", "print Q-values for depth images");
  add_common(c_qd, qd.common);
  c_qd->add_option("--weights", qd.weights, "weights file");
  add_image_source(c_qd, qd.source);
  c_qd->add_option("--label", qd.labels, "row labels, one per image");

  LatencyArgs lat;
  auto* c_lat = app.add_subcommand("latency", "time forward passes");
  add_common(c_lat, lat.common);
  c_lat->add_option("--weights", lat.weights, "weights file");
  add_image_source(c_lat, lat.source);
  c_lat->add_option("--trials", lat.trials, "timed passes");
  c_lat->add_option("--warmup", lat.warmup, "untimed passes");

  RenderArgs ren;
  auto* c_ren = app.add_subcommand("render", "render a depth image to PGM");
  add_common(c_ren, ren.common);
  c_ren->add_option("--pose", ren.pose, "x,y,heading_deg")->required();
  c_ren->add_option("--file", ren.file, "output file name");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "depthq: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (c_train->parsed()) return cmd_train(train, out);
    if (c_eval->parsed()) return cmd_eval(eval, out);
    if (c_heat->parsed()) return cmd_heatmap(heat, out);
    if (c_sal->parsed()) return cmd_saliency(sal, out);
    if (c_qd->parsed()) return cmd_qdump(qd, out);
    if (c_lat->parsed()) return cmd_latency(lat, out);
    if (c_ren->parsed()) return cmd_render(ren, out);
  } catch (const ConfigError& e) {
    err << "depthq: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "depthq: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace depthq::cli
