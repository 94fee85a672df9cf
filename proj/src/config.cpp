#include "execq/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <sstream>

#include "execq/error.hpp"

namespace execq {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_i(const std::string& key, const std::string& v) { return to_int<int>(key, v); }

double to_d(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

bool to_b(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string fmt(bool v) { return v ? "true" : "false"; }

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define EXECQ_INT(name, member)                                                               \
  Field {                                                                                     \
    name, [](RunConfig& c, const std::string& v) { c.member = to_int<decltype(c.member)>(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }                          \
  }
#define EXECQ_DBL(name, member)                                                    \
  Field {                                                                          \
    name, [](RunConfig& c, const std::string& v) { c.member = to_d(name, v); },    \
        [](const RunConfig& c) { return fmt(c.member); }                           \
  }
#define EXECQ_STR(name, member)                                                \
  Field {                                                                      \
    name, [](RunConfig& c, const std::string& v) { c.member = v; },            \
        [](const RunConfig& c) { return c.member; }                            \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      EXECQ_INT("seed", seed),
      Field{"features", [](RunConfig& c, const std::string& v) {
              try {
                c.features = parse_feature_set(v);
              } catch (const std::exception& e) {
                throw ConfigError(std::string("features: ") + e.what());
              }
            },
            [](const RunConfig& c) { return to_string(c.features); }},
      EXECQ_STR("out", out),

      EXECQ_STR("data.source", data.source),
      EXECQ_STR("data.path", data.path),
      EXECQ_STR("data.instrument", data.instrument),
      Field{"data.hours",
            [](RunConfig& c, const std::string& v) {
              std::vector<int> hours;
              std::stringstream ss(v);
              std::string item;
              while (std::getline(ss, item, ',')) hours.push_back(to_i("data.hours", trim(item)));
              c.data.hours = std::move(hours);
            },
            [](const RunConfig& c) {
              std::string s;
              for (std::size_t i = 0; i < c.data.hours.size(); ++i)
                s += (i ? "," : "") + std::to_string(c.data.hours[i]);
              return s;
            }},
      EXECQ_INT("data.utc_offset_s", data.utc_offset_s),
      EXECQ_DBL("data.max_gap_fraction", data.max_gap_fraction),
      EXECQ_DBL("data.train_ratio", data.train_ratio),
      Field{"data.split",
            [](RunConfig& c, const std::string& v) {
              if (v == "chronological")
                c.data.split = SplitMode::chronological;
              else if (v == "shuffled")
                c.data.split = SplitMode::shuffled;
              else
                throw ConfigError("data.split: expected chronological or shuffled, got '" + v + "'");
            },
            [](const RunConfig& c) {
              return std::string(c.data.split == SplitMode::chronological ? "chronological" : "shuffled");
            }},
      EXECQ_INT("data.synthetic_windows", data.synthetic_windows),

      Field{"synth.model",
            [](RunConfig& c, const std::string& v) {
              try {
                c.synth.spec.model = parse_synth_model(v);
              } catch (const std::exception& e) {
                throw ConfigError(std::string("synth.model: ") + e.what());
              }
            },
            [](const RunConfig& c) { return to_string(c.synth.spec.model); }},
      EXECQ_DBL("synth.vol", synth.spec.vol),
      EXECQ_DBL("synth.mu", synth.spec.mu),
      EXECQ_DBL("synth.kappa", synth.spec.kappa),
      EXECQ_DBL("synth.pbar", synth.spec.pbar),
      EXECQ_DBL("synth.p0", synth.spec.p0),
      EXECQ_INT("synth.seed", synth.spec.seed),
      EXECQ_INT("synth.days", synth.days),
      EXECQ_INT("synth.session_start_hour", synth.session_start_hour),
      EXECQ_INT("synth.session_hours", synth.session_hours),

      EXECQ_INT("env.q0", env.q0),
      EXECQ_INT("env.periods", env.periods),
      EXECQ_INT("env.seconds_per_period", env.seconds_per_period),
      EXECQ_DBL("env.penalty_a", env.penalty_a),
      EXECQ_INT("env.lot_multiple", env.lot_multiple),
      Field{"env.strict_terminal",
            [](RunConfig& c, const std::string& v) { c.env.strict_terminal = to_b("env.strict_terminal", v); },
            [](const RunConfig& c) { return fmt(c.env.strict_terminal); }},

      EXECQ_DBL("agent.gamma", agent.gamma),
      EXECQ_DBL("agent.epsilon0", agent.epsilon0),
      EXECQ_DBL("agent.tau", agent.tau),
      EXECQ_INT("agent.rho", agent.rho),
      EXECQ_INT("agent.batch", agent.batch),
      EXECQ_INT("agent.pretrain_episodes", agent.pretrain_episodes),
      EXECQ_INT("agent.episodes", agent.episodes),
      EXECQ_INT("agent.updates_per_step", agent.updates_per_step),

      EXECQ_INT("nn.hidden_layers", nn.hidden_layers),
      EXECQ_INT("nn.hidden_units", nn.hidden_units),
      EXECQ_DBL("nn.learning_rate", nn.rmsprop.learning_rate),
      EXECQ_DBL("nn.rms_decay", nn.rmsprop.decay),
      EXECQ_DBL("nn.rms_epsilon", nn.rmsprop.epsilon),

      EXECQ_INT("replay.capacity", replay_capacity),

      EXECQ_STR("eval.policy", eval.policy),
      EXECQ_INT("eval.price_buckets", eval.grid.price_buckets),
      EXECQ_INT("eval.qv_buckets", eval.grid.qv_buckets),
  };
  return table;
}

#undef EXECQ_INT
#undef EXECQ_DBL
#undef EXECQ_STR

const Field& field(const std::string& key) {
  for (const Field& f : fields())
    if (key == f.key) return f;
  throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  try {
    env.validate();
    agent.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(e.what());
  }
  if (data.source != "synthetic" && data.source != "csv")
    throw ConfigError("data.source must be synthetic or csv, got '" + data.source + "'");
  if (data.source == "csv" && data.path.empty()) throw ConfigError("data.path is required when data.source = csv");
  if (data.hours.empty()) throw ConfigError("data.hours must list at least one hour");
  for (int h : data.hours)
    if (h < 0 || h > 23) throw ConfigError("data.hours entries must lie in 0..23");
  if (!(data.max_gap_fraction >= 0.0 && data.max_gap_fraction <= 1.0))
    throw ConfigError("data.max_gap_fraction must lie in [0, 1]");
  if (!(data.train_ratio > 0.0 && data.train_ratio < 1.0)) throw ConfigError("data.train_ratio must lie in (0, 1)");
  if (data.synthetic_windows < 2) throw ConfigError("data.synthetic_windows must be at least 2");
  if (!(synth.spec.vol >= 0.0)) throw ConfigError("synth.vol must be non-negative");
  if (!(synth.spec.p0 > 0.0)) throw ConfigError("synth.p0 must be positive");
  if (synth.days < 1) throw ConfigError("synth.days must be at least 1");
  if (synth.session_start_hour < 0 || synth.session_hours < 1 || synth.session_start_hour + synth.session_hours > 24)
    throw ConfigError("synth session must fit inside one day");
  if (nn.hidden_layers < 1 || nn.hidden_units < 1) throw ConfigError("nn layers and units must be positive");
  if (!(nn.rmsprop.learning_rate > 0.0)) throw ConfigError("nn.learning_rate must be positive");
  if (!(nn.rmsprop.decay >= 0.0 && nn.rmsprop.decay < 1.0)) throw ConfigError("nn.rms_decay must lie in [0, 1)");
  if (!(nn.rmsprop.epsilon > 0.0)) throw ConfigError("nn.rms_epsilon must be positive");
  if (replay_capacity < 1) throw ConfigError("replay.capacity must be positive");
  if (eval.policy != "model" && eval.policy != "twap") throw ConfigError("eval.policy must be model or twap");
  if (eval.grid.price_buckets < 1 || eval.grid.qv_buckets < 1) throw ConfigError("bucket counts must be positive");
  if (out.empty()) throw ConfigError("out must not be empty");
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
  field(key).set(cfg, value);
}

std::string get_config_value(const RunConfig& cfg, const std::string& key) { return field(key).get(cfg); }

void apply_config_text(RunConfig& cfg, std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  RunConfig cfg;
  apply_config_text(cfg, in);
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  set_config_value(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void write_resolved_config(std::ostream& out, const RunConfig& cfg) {
  for (const Field& f : fields()) out << f.key << " = " << f.get(cfg) << '\n';
}

std::string resolved_config_text(const RunConfig& cfg) {
  std::ostringstream out;
  write_resolved_config(out, cfg);
  return out.str();
}

ModelContext model_context(const RunConfig& cfg, const FeatureConfig& features) {
  return ModelContext{cfg.env, features, cfg.features};
}

}  // namespace execq
