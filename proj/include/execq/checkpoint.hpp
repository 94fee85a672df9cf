#pragma once

// Versioned JSON checkpoints of the main network, optionally with the target
// network and optimizer state.

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "execq/features.hpp"
#include "execq/nn.hpp"

namespace execq {

struct Checkpoint {
  FeatureSet feature_set = FeatureSet::tip;
  FeatureConfig features;
  QNetworkParams main;
  std::optional<QNetworkParams> target;
  std::optional<RmsPropState> optimizer;
  int episodes = 0;
  double epsilon = 0.0;
};

inline constexpr int kCheckpointVersion = 1;

nlohmann::json to_json(const QNetworkParams& params);
QNetworkParams params_from_json(const nlohmann::json& j);

nlohmann::json checkpoint_to_json(const Checkpoint& ckpt);
/// Throws DataError on a wrong format tag, version or inconsistent shapes.
Checkpoint checkpoint_from_json(const nlohmann::json& j);

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Writes to a temporary sibling and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace execq
