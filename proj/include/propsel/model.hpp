#pragma once

#include "propsel/compaggr.hpp"
#include "propsel/config.hpp"
#include "propsel/corpus.hpp"
#include "propsel/encoders.hpp"
#include "propsel/graph.hpp"
#include "propsel/objective.hpp"
#include "propsel/propagation.hpp"

#include <memory>

namespace propsel {

/// Common surface of the trainable sentence selectors.
class SentenceScorer {
 public:
  virtual ~SentenceScorer() = default;

  virtual ParameterRefs parameters() = 0;

  /// Forward and backward pass for one question; adds into the parameter
  /// gradients. `dropout_rng` null disables dropout.
  virtual LossBreakdown accumulate_gradients(const Example& example, const SentenceGraph& graph,
                                             Rng* dropout_rng) = 0;

  /// Loss in inference mode (no dropout, no gradients).
  virtual LossBreakdown loss(const Example& example, const SentenceGraph& graph) const = 0;

  /// Per-sentence confidence in [0, 1], global sentence order.
  virtual Vector confidences(const Example& example, const SentenceGraph& graph) const = 0;
};

class PropagateSelector final : public SentenceScorer {
 public:
  PropagateSelector(const ModelConfig& config, std::shared_ptr<WordEmbedder> embedder,
                    std::unique_ptr<NodeEncoder> encoder, Rng& rng);

  struct Forward {
    Matrix initial_states;
    PropagationResult propagation;
    ScoringHead::Trace head;
    Vector scores;
    std::vector<Matrix> token_inputs;  // per node
    std::vector<EncoderTrace> encoder;  // per node
  };

  Forward forward(const Example& example, const SentenceGraph& graph, Rng* dropout_rng) const;

  ParameterRefs parameters() override;
  LossBreakdown accumulate_gradients(const Example& example, const SentenceGraph& graph, Rng* dropout_rng) override;
  LossBreakdown loss(const Example& example, const SentenceGraph& graph) const override;
  Vector confidences(const Example& example, const SentenceGraph& graph) const override;

  const ModelConfig& config() const { return config_; }
  PropagationParams& propagation() { return propagation_; }
  ScoringHead& head() { return head_; }
  NodeEncoder& encoder() { return *encoder_; }

 private:
  LossBreakdown evaluate_loss(const Example& example, const SentenceGraph& graph, const Forward& fwd,
                              Vector* grad_scores, AttentionLoss* attn) const;
  const TokenSeq& node_tokens(const Example& example, const SentenceGraph& graph, int v) const;

  ModelConfig config_;
  std::shared_ptr<WordEmbedder> embedder_;
  std::unique_ptr<NodeEncoder> encoder_;
  PropagationParams propagation_;
  ScoringHead head_;
};

/// Scores every (question, sentence) pair independently with CompAggr or
/// CompAggr-kMax; the confidence is the supporting-class probability.
class CompAggrScorer final : public SentenceScorer {
 public:
  CompAggrScorer(const ModelConfig& config, std::shared_ptr<WordEmbedder> embedder, Rng& rng);

  ParameterRefs parameters() override;
  LossBreakdown accumulate_gradients(const Example& example, const SentenceGraph& graph, Rng* dropout_rng) override;
  LossBreakdown loss(const Example& example, const SentenceGraph& graph) const override;
  Vector confidences(const Example& example, const SentenceGraph& graph) const override;

  CompAggr& network() { return network_; }

 private:
  std::shared_ptr<WordEmbedder> embedder_;
  CompAggr network_;
};

/// Builds the embedder named by the config, loading any files it references.
std::shared_ptr<WordEmbedder> make_embedder(const EmbedderConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                            Rng& rng);

std::unique_ptr<SentenceScorer> make_scorer(const ModelConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                            Rng& rng);

}  // namespace propsel
