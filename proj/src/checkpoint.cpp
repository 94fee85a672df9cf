#include "execq/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "execq/error.hpp"
#include "execq/eval.hpp"

namespace execq {

nlohmann::json to_json(const QNetworkParams& params) {
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& l : params.layers)
    layers.push_back({{"rows", l.rows}, {"cols", l.cols}, {"weights", l.weights}, {"bias", l.bias}});
  return layers;
}

QNetworkParams params_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw DataError("checkpoint: layers must be a non-empty array");
  QNetworkParams p;
  int prev_rows = -1;
  for (const auto& lj : j) {
    DenseLayer l;
    l.rows = lj.at("rows").get<int>();
    l.cols = lj.at("cols").get<int>();
    l.weights = lj.at("weights").get<std::vector<double>>();
    l.bias = lj.at("bias").get<std::vector<double>>();
    if (l.rows < 1 || l.cols < 1 || l.weights.size() != static_cast<std::size_t>(l.rows) * l.cols ||
        l.bias.size() != static_cast<std::size_t>(l.rows))
      throw DataError("checkpoint: layer shape mismatch");
    if (prev_rows >= 0 && l.cols != prev_rows) throw DataError("checkpoint: consecutive layers do not chain");
    prev_rows = l.rows;
    p.layers.push_back(std::move(l));
  }
  if (p.layers.back().rows != 1) throw DataError("checkpoint: output layer must have one row");
  return p;
}

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt) {
  nlohmann::json j;
  j["format"] = "execq.checkpoint";
  j["version"] = kCheckpointVersion;
  j["feature_set"] = to_string(ckpt.feature_set);
  j["feature_config"] = to_json(ckpt.features);
  j["episodes"] = ckpt.episodes;
  j["epsilon"] = ckpt.epsilon;
  j["layers"] = to_json(ckpt.main);
  if (ckpt.target) j["target"] = to_json(*ckpt.target);
  if (ckpt.optimizer) {
    const RmsPropConfig& c = ckpt.optimizer->config;
    j["optimizer"] = {{"learning_rate", c.learning_rate},
                      {"decay", c.decay},
                      {"epsilon", c.epsilon},
                      {"accumulator", to_json(ckpt.optimizer->accumulator)}};
  }
  return j;
}

Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != "execq.checkpoint") throw DataError("not an execq checkpoint");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw DataError("unsupported checkpoint version " + std::to_string(version));
    Checkpoint c;
    c.feature_set = parse_feature_set(j.at("feature_set").get<std::string>());
    c.features = feature_config_from_json(j.at("feature_config"));
    c.episodes = j.at("episodes").get<int>();
    c.epsilon = j.at("epsilon").get<double>();
    c.main = params_from_json(j.at("layers"));
    if (c.main.input_dim() != input_dim(c.feature_set))
      throw DataError("checkpoint: network input width does not match its feature set");
    if (j.contains("target")) {
      c.target = params_from_json(j.at("target"));
      if (c.target->parameter_count() != c.main.parameter_count())
        throw DataError("checkpoint: target network shape differs from main");
    }
    if (j.contains("optimizer")) {
      const auto& oj = j.at("optimizer");
      RmsPropConfig cfg;
      cfg.learning_rate = oj.at("learning_rate").get<double>();
      cfg.decay = oj.at("decay").get<double>();
      cfg.epsilon = oj.at("epsilon").get<double>();
      RmsPropState st = make_rmsprop(c.main, cfg);
      st.accumulator = params_from_json(oj.at("accumulator"));
      if (st.accumulator.parameter_count() != c.main.parameter_count())
        throw DataError("checkpoint: optimizer state shape differs from main");
      c.optimizer = std::move(st);
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

std::string serialize_checkpoint(const Checkpoint& ckpt) { return checkpoint_to_json(ckpt).dump(1) + "\n"; }

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string text = serialize_checkpoint(ckpt);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << text;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move checkpoint into " + path.string() + ": " + ec.message());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint " + path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace execq
