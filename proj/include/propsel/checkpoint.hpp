#pragma once

#include "propsel/config.hpp"
#include "propsel/tensor.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace propsel {

inline constexpr int kCheckpointFormatVersion = 1;

/// Self-describing snapshot: resolved config, vocabulary hash and every
/// parameter tensor by name.
struct Checkpoint {
  int format_version = kCheckpointFormatVersion;
  TrainConfig config;
  std::string vocab_hash;
  std::map<std::string, Matrix> parameters;
};

Checkpoint snapshot(const TrainConfig& config, const ParameterRefs& params, const std::string& vocab_hash);

/// Copies checkpoint values into `params`; names and shapes must match.
void restore(const Checkpoint& checkpoint, const ParameterRefs& params);

nlohmann::json checkpoint_to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace propsel
