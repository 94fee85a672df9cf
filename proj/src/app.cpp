#include "execq/app.hpp"

#include <charconv>
#include <fstream>
#include <random>

#include <spdlog/spdlog.h>

#include "execq/checkpoint.hpp"
#include "execq/error.hpp"
#include "execq/eval.hpp"
#include "execq/parallel.hpp"

namespace execq {
namespace {

constexpr std::uint32_t kSplitTag = 1;
constexpr std::uint32_t kAgentTag = 2;
constexpr std::uint32_t kReplayTag = 3;
constexpr std::int64_t kSynthFirstDay = 18263;  // 2020-01-02

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void make_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

Checkpoint make_checkpoint(const AgentState& agent, const ModelContext& ctx, bool full) {
  Checkpoint c;
  c.feature_set = ctx.feature_set;
  c.features = ctx.features;
  c.main = agent.main;
  c.episodes = agent.episodes;
  c.epsilon = agent.epsilon;
  if (full) {
    c.target = agent.target;
    c.optimizer = agent.optimizer;
  }
  return c;
}

Checkpoint load_matching_checkpoint(const RunConfig& cfg, const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.feature_set != cfg.features)
    throw ConfigError("checkpoint was trained with feature set " + to_string(ckpt.feature_set) +
                      " but the config requests " + to_string(cfg.features));
  if (ckpt.features.q0 != cfg.env.q0 || ckpt.features.periods != cfg.env.periods)
    throw ConfigError("checkpoint inventory/period settings differ from env.q0/env.periods");
  return ckpt;
}

}  // namespace

RunConfig resolve_config(const CliOptions& opts) {
  RunConfig cfg = opts.config ? load_config(*opts.config) : RunConfig{};
  for (const std::string& o : opts.overrides) apply_override(cfg, o);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.out) cfg.out = *opts.out;
  if (opts.features) set_config_value(cfg, "features", *opts.features);
  cfg.validate();
  return cfg;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  std::uint32_t w[2];
  seq.generate(w, w + 2);
  return (std::uint64_t{w[0]} << 32) | w[1];
}

WindowSplit load_windows(const RunConfig& cfg) {
  const WindowLayout layout = cfg.env.layout();
  std::vector<EpisodeWindow> windows;
  if (cfg.data.source == "synthetic") {
    windows = synth_windows(cfg.synth.spec, layout, static_cast<std::size_t>(cfg.data.synthetic_windows));
  } else {
    if (!std::filesystem::is_regular_file(cfg.data.path))
      throw ConfigError("data.path '" + cfg.data.path + "' does not exist");
    const PriceSeries series = load_price_series(cfg.data.path, cfg.data.instrument);
    SliceOptions so;
    so.hours = cfg.data.hours;
    so.utc_offset_s = cfg.data.utc_offset_s;
    so.max_gap_fraction = cfg.data.max_gap_fraction;
    SliceResult sliced = slice_windows(series, layout, so);
    spdlog::info("{} windows sliced, {} skipped", sliced.windows.size(), sliced.skipped.size());
    windows = std::move(sliced.windows);
  }
  return train_eval_split(std::move(windows), cfg.data.train_ratio, derive_seed(cfg.seed, kSplitTag), cfg.data.split);
}

TrainArtifacts train_artifacts(const std::filesystem::path& out) {
  return {out / "model.json", out / "train_log.csv", out / "resolved_config.txt", out / "checkpoints"};
}

TrainArtifacts cmd_train(const RunConfig& cfg) {
  cfg.validate();
  const WindowSplit split = load_windows(cfg);
  const FeatureConfig features =
      fit_feature_config(split.train, cfg.env.q0, cfg.env.periods, cfg.env.seconds_per_period);
  const ModelContext ctx = model_context(cfg, features);

  const TrainArtifacts art = train_artifacts(cfg.out);
  make_out_dir(art.checkpoint_dir);

  AgentState agent = make_agent(ctx, cfg.agent, cfg.nn, derive_seed(cfg.seed, kAgentTag));
  ReplayBuffer replay(cfg.replay_capacity, derive_seed(cfg.seed, kReplayTag));
  spdlog::info("training on {} windows ({} held out), features {}", split.train.size(), split.eval.size(),
               to_string(cfg.features));
  pretrain(agent, split.train, ctx, replay, cfg.agent);

  std::string log = "episode,epsilon,mean_loss,episode_reward,eps_used\n";
  TrainHooks hooks;
  hooks.on_episode = [&](const EpisodeLog& e) {
    log += std::to_string(e.episode) + ',' + fmt(e.epsilon) + ',' + fmt(e.mean_loss) + ',' + fmt(e.episode_reward) +
           ',' + std::to_string(e.eps_used) + '\n';
  };
  hooks.on_sync = [&](const AgentState& a) {
    char name[48];
    std::snprintf(name, sizeof name, "sync_%06d.json", a.episodes);
    save_checkpoint(art.checkpoint_dir / name, make_checkpoint(a, ctx, false));
  };
  hooks.on_abort = [&](const AgentState& a, const std::string& reason) {
    save_checkpoint(art.checkpoint_dir / "abort.json", make_checkpoint(a, ctx, true));
    write_text(art.log, log);
    spdlog::error("diagnostic checkpoint written to {} ({})", (art.checkpoint_dir / "abort.json").string(), reason);
  };
  train(agent, split.train, ctx, replay, cfg.agent, hooks);

  save_checkpoint(art.model, make_checkpoint(agent, ctx, true));
  write_text(art.log, log);
  write_text(art.resolved_config, resolved_config_text(cfg));
  spdlog::info("model written to {}", art.model.string());
  return art;
}

void cmd_eval(const RunConfig& cfg, const std::optional<std::filesystem::path>& checkpoint) {
  cfg.validate();
  const bool model_policy = cfg.eval.policy == "model";
  if (model_policy && !checkpoint) throw ConfigError("eval needs --checkpoint unless eval.policy = twap");
  std::optional<Checkpoint> ckpt;
  if (checkpoint) ckpt = load_matching_checkpoint(cfg, *checkpoint);
  const WindowSplit split = load_windows(cfg);

  const ActionSource twap = twap_policy(cfg.env);
  ActionSource model = twap;
  if (model_policy) model = greedy_policy(ckpt->main, model_context(cfg, ckpt->features));

  const std::vector<HourResult> rows = evaluate_windows(model, twap, split.eval, cfg.env);
  const SummaryStats stats = summarize(rows);
  make_out_dir(cfg.out);
  emit_report(stats, rows, report_files(cfg.out),
              ckpt ? std::optional<FeatureConfig>(ckpt->features) : std::nullopt);
  spdlog::info("evaluated {} windows: median {:.4f} bps, mean {:.4f} bps, win rate {:.3f}", stats.count, stats.median,
               stats.mean, stats.win_probability);
}

std::vector<std::filesystem::path> cmd_policy_map(const RunConfig& cfg, const std::filesystem::path& checkpoint) {
  cfg.validate();
  const Checkpoint ckpt = load_matching_checkpoint(cfg, checkpoint);
  const PolicyGrid grid = extract_policy_grid(ckpt.main, model_context(cfg, ckpt.features), cfg.eval.grid);
  make_out_dir(cfg.out);
  return write_policy_grid(grid, cfg.out);
}

std::filesystem::path cmd_synth_gen(const RunConfig& cfg) {
  cfg.validate();
  const std::int64_t lead = cfg.env.seconds_per_period;
  const std::int64_t begin = std::int64_t{cfg.synth.session_start_hour} * 3600 - lead;
  const std::int64_t end =
      std::int64_t{cfg.synth.session_start_hour + cfg.synth.session_hours} * 3600 + cfg.env.terminal_seconds;

  PriceSeries all;
  all.instrument = cfg.data.instrument;
  for (int d = 0; d < cfg.synth.days; ++d) {
    SynthSpec spec = cfg.synth.spec;
    spec.seed = derive_seed(cfg.synth.spec.seed, static_cast<std::uint32_t>(d));
    const std::int64_t day_start = (kSynthFirstDay + d) * 86400 - cfg.data.utc_offset_s;
    const PriceSeries day = synth_series(spec, static_cast<std::size_t>(end - begin + 1), day_start + begin);
    all.points.insert(all.points.end(), day.points.begin(), day.points.end());
  }
  all.filled.assign(all.points.size(), 0);

  make_out_dir(cfg.out);
  const auto path = std::filesystem::path(cfg.out) / "prices.csv";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_price_series(out, all);
  spdlog::info("wrote {} points over {} days to {}", all.points.size(), cfg.synth.days, path.string());
  return path;
}

int run_command(const std::string& command, const CliOptions& opts) {
  try {
    const RunConfig cfg = resolve_config(opts);
    if (command == "train") {
      cmd_train(cfg);
    } else if (command == "eval") {
      cmd_eval(cfg, opts.checkpoint);
    } else if (command == "policy-map") {
      if (!opts.checkpoint) throw ConfigError("policy-map needs --checkpoint");
      cmd_policy_map(cfg, *opts.checkpoint);
    } else if (command == "synth-gen") {
      cmd_synth_gen(cfg);
    } else {
      throw ConfigError("unknown command '" + command + "'");
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace execq
