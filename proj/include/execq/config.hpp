#pragma once

// Run configuration: a flat key=value file, `--set` overrides and a resolved
// snapshot that reproduces the run when fed back in.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "execq/agent.hpp"
#include "execq/env.hpp"
#include "execq/features.hpp"
#include "execq/market_data.hpp"
#include "execq/nn.hpp"

namespace execq {

struct DataConfig {
  std::string source = "synthetic";  // synthetic | csv
  std::string path;
  std::string instrument = "SYNTH";
  std::vector<int> hours{11, 12, 13};
  std::int64_t utc_offset_s = 0;
  double max_gap_fraction = 0.05;
  double train_ratio = 0.8;
  SplitMode split = SplitMode::chronological;
  int synthetic_windows = 100;
};

/// Synthetic generator settings; `days`, `session_*` only matter for synth-gen.
struct SynthConfig {
  SynthSpec spec;
  int days = 5;
  int session_start_hour = 11;
  int session_hours = 3;
};

struct EvalConfig {
  std::string policy = "model";  // model | twap
  GridSpec grid;
};

struct RunConfig {
  std::uint64_t seed = 1;
  FeatureSet features = FeatureSet::tip;
  std::string out = "run";
  DataConfig data;
  SynthConfig synth;
  EnvConfig env;
  AgentConfig agent;
  NetConfig nn;
  std::size_t replay_capacity = 10000;
  EvalConfig eval;

  /// Throws ConfigError describing the first invalid value.
  void validate() const;
};

/// Every recognised key, in snapshot order.
std::vector<std::string> config_keys();

/// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::string get_config_value(const RunConfig& cfg, const std::string& key);

/// Applies `key = value` lines; `#` starts a comment.
void apply_config_text(RunConfig& cfg, std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Splits "key=value" and applies it.
void apply_override(RunConfig& cfg, const std::string& assignment);

/// Every key with its resolved value, one `key = value` line each.
void write_resolved_config(std::ostream& out, const RunConfig& cfg);
std::string resolved_config_text(const RunConfig& cfg);

ModelContext model_context(const RunConfig& cfg, const FeatureConfig& features);

}  // namespace execq
