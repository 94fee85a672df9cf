#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "execq/app.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("execq");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%^%l%$] %v");
  const char* level = std::getenv("EXECQ_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::info);
}

void add_common(CLI::App* cmd, execq::CliOptions& opts, bool with_checkpoint) {
  cmd->add_option("--config", opts.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", opts.seed, "run seed");
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--features", opts.features, "feature set")->check(CLI::IsMember({"ti", "tip", "tipqv"}));
  cmd->add_option("--set", opts.overrides, "override a config key (key=value), repeatable");
  if (with_checkpoint) cmd->add_option("--checkpoint", opts.checkpoint, "model checkpoint (model.json)");
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Deep Q-learning trade execution: train, evaluate and inspect execution policies"};
  app.require_subcommand(1);

  execq::CliOptions opts;
  add_common(app.add_subcommand("train", "pretrain and train an agent"), opts, false);
  add_common(app.add_subcommand("eval", "compare a trained policy with TWAP on held-out windows"), opts, true);
  add_common(app.add_subcommand("policy-map", "write greedy-action grids of a trained policy"), opts, true);
  add_common(app.add_subcommand("synth-gen", "write a synthetic second-level price CSV"), opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? execq::kExitOk : execq::kExitUsage;
  }
  return execq::run_command(app.get_subcommands().front()->get_name(), opts);
}
