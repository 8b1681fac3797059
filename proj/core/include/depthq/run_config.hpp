#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "depthq/eval.hpp"
#include "depthq/trainer.hpp"

namespace depthq {

/// Everything a CLI run needs, resolved from defaults, a profile, a key=value
/// file and command-line overrides (in that order).
struct RunConfig {
  std::filesystem::path world;
  std::filesystem::path out_dir;
  TrainingSetup training;
  EvalConfig eval;
  double heatmap_cell = 0.2;
  double saliency_fraction = 0.10;
};

/// Profile names: "paper" (lr 1e-7, supervised warm start) and
/// "from-scratch" (lr 1e-4, no warm start).
RunConfig default_run_config(std::string_view profile = "paper");

/// Applies a single key. Throws ConfigError on an unknown key or bad value.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines (`#` comments, blank lines allowed). A `profile`
/// key anywhere in the text, or in `overrides`, is applied before everything
/// else; `overrides` win over the text.
RunConfig parse_run_config(std::string_view text, std::string_view source,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {});

RunConfig load_run_config(const std::filesystem::path& path,
                          const std::vector<std::pair<std::string, std::string>>& overrides = {});

/// All keys, one `key=value` per line, in schema order. Parses back to the same config.
std::string to_text(const RunConfig& config);

/// Names of every accepted key, in schema order.
std::vector<std::string> config_keys();

void write_resolved_config(const RunConfig& config, const std::filesystem::path& path);

}  // namespace depthq
