#include "depthq/run_config.hpp"

#include <fstream>
#include <functional>
#include <sstream>

#include "depthq/error.hpp"
#include "depthq/format.hpp"

namespace depthq {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double real_value(std::string_view v, std::string_view key) {
  try {
    return parse_real(v, key);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

std::size_t size_value(std::string_view v, std::string_view key) {
  try {
    return static_cast<std::size_t>(parse_unsigned(v, key));
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

bool bool_value(std::string_view v, std::string_view key) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError(std::string(key) + ": expected on/off, got '" + std::string(v) + "'");
}

std::vector<std::size_t> list_value(std::string_view v, std::string_view key) {
  std::vector<std::size_t> out;
  if (trim(v).empty()) return out;
  std::size_t begin = 0;
  while (begin <= v.size()) {
    auto end = v.find(',', begin);
    if (end == std::string_view::npos) end = v.size();
    out.push_back(size_value(trim(v.substr(begin, end - begin)), key));
    begin = end + 1;
  }
  return out;
}

std::string list_text(const std::vector<std::size_t>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string bool_text(bool b) { return b ? "on" : "off"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define REAL_FIELD(name, expr)                                                     \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { expr = real_value(v, name); },   \
        [](const RunConfig& c) { return format_real(expr); }                       \
  }
#define SIZE_FIELD(name, expr)                                                     \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { expr = size_value(v, name); },   \
        [](const RunConfig& c) { return std::to_string(expr); }                    \
  }
#define BOOL_FIELD(name, expr)                                                     \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { expr = bool_value(v, name); },   \
        [](const RunConfig& c) { return bool_text(expr); }                         \
  }
#define LIST_FIELD(name, expr)                                                     \
  Field {                                                                          \
    name, [](RunConfig& c, std::string_view v) { expr = list_value(v, name); },   \
        [](const RunConfig& c) { return list_text(expr); }                         \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      Field{"profile", [](RunConfig&, std::string_view) {},
            [](const RunConfig& c) { return c.training.profile; }},
      Field{"world", [](RunConfig& c, std::string_view v) { c.world = std::string(v); },
            [](const RunConfig& c) { return c.world.string(); }},
      Field{"out", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
            [](const RunConfig& c) { return c.out_dir.string(); }},
      Field{"seed",
            [](RunConfig& c, std::string_view v) {
              c.training.train.seed = size_value(v, "seed");
              c.eval.base_seed = c.training.train.seed;
            },
            [](const RunConfig& c) { return std::to_string(c.training.train.seed); }},
      SIZE_FIELD("iterations", c.training.train.max_iterations),
      SIZE_FIELD("episodes", c.training.train.episodes),
      SIZE_FIELD("batch_size", c.training.train.batch_size),
      SIZE_FIELD("memory_capacity", c.training.train.memory_capacity),
      REAL_FIELD("gamma", c.training.train.gamma),
      REAL_FIELD("learning_rate", c.training.train.learning_rate),
      REAL_FIELD("momentum", c.training.train.momentum),
      Field{"collision_threshold",
            [](RunConfig& c, std::string_view v) {
              const double t = real_value(v, "collision_threshold");
              c.training.train.collision_threshold = t;
              c.training.env.collision_threshold = t;
              c.eval.env.collision_threshold = t;
            },
            [](const RunConfig& c) { return format_real(c.training.train.collision_threshold); }},
      REAL_FIELD("reward_terminal", c.training.train.reward_terminal),
      REAL_FIELD("reward_move", c.training.train.reward_move),
      SIZE_FIELD("max_episode_steps", c.training.train.max_episode_steps),
      REAL_FIELD("epsilon_start", c.training.train.epsilon.start),
      REAL_FIELD("epsilon_end", c.training.train.epsilon.end),
      SIZE_FIELD("epsilon_anneal", c.training.train.epsilon.anneal_iterations),
      Field{"dt",
            [](RunConfig& c, std::string_view v) {
              const double dt = real_value(v, "dt");
              c.training.train.dt = dt;
              c.training.env.dt = dt;
              c.eval.env.dt = dt;
            },
            [](const RunConfig& c) { return format_real(c.training.train.dt); }},
      LIST_FIELD("checkpoints", c.training.train.checkpoint_iterations),
      Field{"camera_rows",
            [](RunConfig& c, std::string_view v) {
              const auto r = size_value(v, "camera_rows");
              c.training.env.camera.rows = r;
              c.eval.env.camera.rows = r;
              c.training.network.input_rows = r;
            },
            [](const RunConfig& c) { return std::to_string(c.training.env.camera.rows); }},
      Field{"camera_cols",
            [](RunConfig& c, std::string_view v) {
              const auto n = size_value(v, "camera_cols");
              c.training.env.camera.cols = n;
              c.eval.env.camera.cols = n;
              c.training.network.input_cols = n;
            },
            [](const RunConfig& c) { return std::to_string(c.training.env.camera.cols); }},
      Field{"hfov_deg",
            [](RunConfig& c, std::string_view v) {
              c.training.env.camera.hfov_deg = c.eval.env.camera.hfov_deg = real_value(v, "hfov_deg");
            },
            [](const RunConfig& c) { return format_real(c.training.env.camera.hfov_deg); }},
      Field{"min_range",
            [](RunConfig& c, std::string_view v) {
              c.training.env.camera.min_range = c.eval.env.camera.min_range =
                  real_value(v, "min_range");
            },
            [](const RunConfig& c) { return format_real(c.training.env.camera.min_range); }},
      Field{"max_range",
            [](RunConfig& c, std::string_view v) {
              c.training.env.camera.max_range = c.eval.env.camera.max_range =
                  real_value(v, "max_range");
            },
            [](const RunConfig& c) { return format_real(c.training.env.camera.max_range); }},
      LIST_FIELD("conv_channels", c.training.network.conv_channels),
      SIZE_FIELD("conv_kernel", c.training.network.kernel),
      LIST_FIELD("fc_widths", c.training.network.fc_widths),
      REAL_FIELD("dropout", c.training.network.dropout_rate),
      BOOL_FIELD("checked", c.training.network.checked),
      BOOL_FIELD("pretrain", c.training.pretrain),
      SIZE_FIELD("pretrain_samples", c.training.pretrain_samples),
      SIZE_FIELD("pretrain_epochs", c.training.pretrain_options.epochs),
      SIZE_FIELD("pretrain_batch", c.training.pretrain_options.batch_size),
      REAL_FIELD("pretrain_lr", c.training.pretrain_options.learning_rate),
      REAL_FIELD("pretrain_momentum", c.training.pretrain_options.momentum),
      SIZE_FIELD("step_cap", c.eval.step_cap),
      SIZE_FIELD("episodes_per_start", c.eval.episodes_per_start),
      REAL_FIELD("jitter_m", c.eval.start_jitter_m),
      REAL_FIELD("jitter_deg", c.eval.start_jitter_deg),
      REAL_FIELD("heatmap_cell", c.heatmap_cell),
      REAL_FIELD("fraction", c.saliency_fraction),
  };
  return table;
}

#undef REAL_FIELD
#undef SIZE_FIELD
#undef BOOL_FIELD
#undef LIST_FIELD

using Entry = std::pair<std::string, std::string>;

std::vector<Entry> parse_lines(std::string_view text, std::string_view source) {
  std::vector<Entry> out;
  std::size_t begin = 0, line_no = 0;
  while (begin < text.size()) {
    auto end = text.find('\n', begin);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(begin, end - begin);
    begin = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_no) +
                        ": expected key=value, got '" + std::string(line) + "'");
    }
    out.emplace_back(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return out;
}

}  // namespace

RunConfig default_run_config(std::string_view profile) {
  RunConfig c;
  if (profile == "paper") {
    c.training.profile = "paper";
    c.training.train.learning_rate = 1e-7;
    c.training.pretrain = true;
  } else if (profile == "from-scratch") {
    c.training.profile = "from-scratch";
    c.training.train.learning_rate = 1e-4;
    c.training.pretrain = false;
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "' (expected paper or from-scratch)");
  }
  return c;
}

void apply_setting(RunConfig& config, std::string_view key, std::string_view value) {
  for (const auto& f : fields()) {
    if (key == f.key) {
      if (key == "profile") {
        if (value != config.training.profile) {
          throw ConfigError("profile must be given before other settings");
        }
        return;
      }
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

RunConfig parse_run_config(std::string_view text, std::string_view source,
                           const std::vector<Entry>& overrides) {
  const auto entries = parse_lines(text, source);
  std::string profile = "paper";
  for (const auto& [k, v] : entries) {
    if (k == "profile") profile = v;
  }
  for (const auto& [k, v] : overrides) {
    if (k == "profile") profile = v;
  }
  RunConfig config = default_run_config(profile);
  for (const auto& [k, v] : entries) {
    if (k != "profile") apply_setting(config, k, v);
  }
  for (const auto& [k, v] : overrides) {
    if (k != "profile") apply_setting(config, k, v);
  }
  return config;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<Entry>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), path.string(), overrides);
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const auto& f : fields()) {
    out += f.key;
    out += '=';
    out += f.get(config);
    out += '\n';
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void write_resolved_config(const RunConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_text(config);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace depthq
