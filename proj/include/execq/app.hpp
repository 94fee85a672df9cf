#pragma once

// Subcommand implementations behind the `execq` binary. Each command takes a
// resolved RunConfig, writes only inside cfg.out and throws on failure;
// run_command maps exceptions to exit codes.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "execq/config.hpp"
#include "execq/market_data.hpp"

namespace execq {

enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitUsage = 2 };

struct CliOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> features;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::filesystem::path> checkpoint;
};

/// Defaults, then the config file, then --set overrides, then the dedicated
/// flags. The result is validated.
RunConfig resolve_config(const CliOptions& opts);

/// Deterministic 64-bit stream seed derived from the run seed and a tag.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag);

/// Training and evaluation windows for the configured data source.
WindowSplit load_windows(const RunConfig& cfg);

struct TrainArtifacts {
  std::filesystem::path model;
  std::filesystem::path log;
  std::filesystem::path resolved_config;
  std::filesystem::path checkpoint_dir;
};

TrainArtifacts train_artifacts(const std::filesystem::path& out);

TrainArtifacts cmd_train(const RunConfig& cfg);
/// `checkpoint` may be empty only when eval.policy = twap.
void cmd_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint);
std::vector<std::filesystem::path> cmd_policy_map(const RunConfig& cfg, const std::filesystem::path& checkpoint);
/// Writes a multi-day synthetic price CSV to cfg.out/prices.csv.
std::filesystem::path cmd_synth_gen(const RunConfig& cfg);

/// Runs a subcommand by name, logging errors and returning the exit code.
int run_command(const std::string& command, const CliOptions& opts);

}  // namespace execq
