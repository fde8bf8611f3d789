#pragma once

#include "propsel/checkpoint.hpp"
#include "propsel/config.hpp"
#include "propsel/corpus.hpp"
#include "propsel/metrics.hpp"
#include "propsel/model.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace propsel {

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double loss_rank = 0.0;
  double loss_attn = 0.0;
  double total = 0.0;
  double grad_norm = 0.0;
  double clipped_norm = 0.0;
  bool clipped = false;
};

struct EpochRecord {
  int epoch = 0;
  double mean_loss = 0.0;
  double dev_map = 0.0;
  double dev_mrr = 0.0;
  bool improved = false;
};

struct TrainingLog {
  std::vector<std::string> notices;
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;

  nlohmann::json to_json() const;
};

struct TrainResult {
  Checkpoint best;
  TrainingLog log;
  int best_epoch = 0;
  double best_dev_map = 0.0;
  bool aborted = false;
  std::string abort_reason;
  /// Config actually used (for example with the attention loss switched off
  /// on type3 graphs).
  TrainConfig effective_config;
};

struct TrainOptions {
  /// Called after every epoch; useful for progress output.
  std::function<void(const EpochRecord&)> on_epoch;
  /// Keep per-step records in the log.
  bool record_steps = true;
};

/// Applies forced adjustments (type3 disables the attention loss) and
/// returns the notices explaining them.
std::vector<std::string> resolve_effective_config(TrainConfig& config);

/// Builds one graph per example under `kind`.
std::vector<SentenceGraph> build_graphs(const std::vector<Example>& examples, TopologyKind kind);

TrainResult train(const TrainConfig& config, const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  std::shared_ptr<const Vocabulary> vocab, const TrainOptions& options = {});

/// Rebuilds a scorer from a checkpoint.
std::unique_ptr<SentenceScorer> load_scorer(const Checkpoint& checkpoint, std::shared_ptr<const Vocabulary> vocab);

struct QuestionRanking {
  std::string id;
  std::vector<std::size_t> order;
  std::vector<double> confidences;
  Labels labels;
  double average_precision = 0.0;
  double reciprocal_rank = 0.0;
};

struct EvalReport {
  double map = 0.0;
  double mrr = 0.0;
  std::size_t skipped_questions = 0;
  std::vector<ThresholdRow> thresholds;
  std::vector<QuestionRanking> questions;

  nlohmann::json to_json() const;
  std::string thresholds_csv() const;
};

EvalReport evaluate(const SentenceScorer& scorer, const std::vector<Example>& examples, TopologyKind topology,
                    const std::vector<double>& thresholds = {});

/// Question-node attention per hop keyed by sentence index, plus the gold
/// sentence indices.
nlohmann::json attention_trace(const PropagateSelector& model, const Example& example, TopologyKind topology);

struct SweepRow {
  std::string label;
  double dev_map = 0.0;
  double dev_mrr = 0.0;
  double train_map = 0.0;
  double train_mrr = 0.0;
  int best_epoch = 0;
  int epochs_run = 0;
  bool aborted = false;
};

struct SweepTable {
  std::string parameter;
  std::vector<SweepRow> rows;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

struct SweepCell {
  std::string label;
  TrainConfig config;
};

struct SweepOptions {
  bool parallel = false;
};

/// Trains and evaluates every cell independently.
SweepTable run_sweep(const std::string& parameter, const std::vector<SweepCell>& cells,
                     const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                     std::shared_ptr<const Vocabulary> vocab, const SweepOptions& options = {});

SweepTable sweep_hops(const TrainConfig& base, const std::vector<int>& hops, const std::vector<Example>& train_set,
                      const std::vector<Example>& dev_set, std::shared_ptr<const Vocabulary> vocab,
                      const SweepOptions& options = {});

SweepTable sweep_topologies(const TrainConfig& base, const std::vector<Example>& train_set,
                            const std::vector<Example>& dev_set, std::shared_ptr<const Vocabulary> vocab,
                            const SweepOptions& options = {});

struct EncoderVariant {
  std::string label;
  EmbedderConfig embedder;
  EncoderConfig encoder;
};

SweepTable sweep_encoders(const TrainConfig& base, const std::vector<EncoderVariant>& variants,
                          const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                          std::shared_ptr<const Vocabulary> vocab, const SweepOptions& options = {});

}  // namespace propsel
