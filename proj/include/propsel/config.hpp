#pragma once

#include "propsel/compaggr.hpp"
#include "propsel/encoders.hpp"
#include "propsel/graph.hpp"
#include "propsel/objective.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <set>
#include <string>
#include <string_view>

namespace propsel {

enum class Architecture { propagate_selector, compaggr, compaggr_kmax };
std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view name);

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::trainable_lookup;
  int dim = 32;
  std::string path;  // static vector file or contextual store
};

struct EncoderConfig {
  EncoderKind kind = EncoderKind::recurrent;
  int hidden = 200;
  std::string path;  // precomputed sentence store
};

struct ModelConfig {
  Architecture architecture = Architecture::propagate_selector;
  EmbedderConfig embedder;
  EncoderConfig encoder;
  int hops = 4;
  bool tied_weights = false;
  TopologyKind topology = TopologyKind::full;
  double alpha = 1.0;
  RankLossKind rank_loss = RankLossKind::softmax;
  bool attention_loss = true;
  bool normalize_attention_targets = true;
  /// Drop probabilities, not keep probabilities.
  double encoder_dropout = 0.3;
  double attention_dropout = 0.3;
  /// Hidden width of the scoring head; 0 means "same as the node dimension".
  int head_width = 0;
  CompAggrConfig compaggr;

  /// Width of the node vectors the propagation works on.
  int node_dim() const;
};

struct TrainConfig {
  ModelConfig model;
  int batch_size = 20;
  double learning_rate = 1e-3;
  double clip_norm = 5.0;
  int max_epochs = 30;
  int patience = 5;
  std::uint64_t seed = 1;
};

nlohmann::json to_json(const ModelConfig& c);
nlohmann::json to_json(const TrainConfig& c);

/// Parses {"model": {...}, "training": {...}}; missing fields keep their
/// defaults. Every problem (unknown key, wrong type, out-of-range value) is
/// collected and reported together in one ConfigError. Top-level keys in
/// `extra_keys` are ignored so callers can layer their own sections.
TrainConfig train_config_from_json(const nlohmann::json& j, const std::set<std::string>& extra_keys = {});

/// Applies a JSON object of overrides onto an existing config.
TrainConfig merge_train_config(const TrainConfig& base, const nlohmann::json& overrides,
                               const std::set<std::string>& extra_keys = {});

/// Throws ConfigError listing every invalid field.
void validate(const TrainConfig& c);

}  // namespace propsel
