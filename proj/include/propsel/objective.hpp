#pragma once

#include "propsel/corpus.hpp"
#include "propsel/graph.hpp"
#include "propsel/propagation.hpp"
#include "propsel/tensor.hpp"

#include <functional>
#include <string_view>

namespace propsel {

/// g(q, s) = w2 . tanh(W1 [q; s; q*s] + b1) + b2.
class ScoringHead {
 public:
  ScoringHead(int dim, int width, Rng& rng);

  struct Trace {
    Matrix inputs;  // sentences x 3d'
    Matrix hidden;  // sentences x width
  };

  double score(const Vector& question, const Vector& sentence) const;
  /// One score per sentence node in global sentence order.
  Vector score_sentences(const Matrix& final_states, const SentenceGraph& graph, Trace* trace = nullptr) const;
  /// Adds parameter gradients and returns d(loss)/d(final states).
  Matrix backward(const Matrix& final_states, const SentenceGraph& graph, const Trace& trace,
                  const Vector& grad_scores);
  void collect_parameters(ParameterRefs& out);

  Parameter hidden;       // width x 3d'
  Parameter hidden_bias;  // width x 1
  Parameter output;       // 1 x width
  Parameter output_bias;  // 1 x 1
};

using PairScorer = std::function<double(const Vector& question, const Vector& sentence)>;

/// Scores every sentence node against the question node with an arbitrary
/// pair function.
Vector score_sentences(const Matrix& final_states, const SentenceGraph& graph, const PairScorer& scorer);

enum class RankLossKind { softmax, sigmoid };
std::string_view to_string(RankLossKind kind);
RankLossKind parse_rank_loss(std::string_view name);

Vector softmax(const Vector& x);

/// Labels divided by their sum. Throws DataError when there is no positive.
Vector normalized_targets(const Labels& labels);

/// Cross-entropy between softmax(scores) and the normalised labels.
/// `grad`, when given, receives d(loss)/d(scores).
double rank_loss(const Vector& scores, const Labels& labels, Vector* grad = nullptr);

/// Sum over sentences of independent binary cross-entropies on sigmoid(score).
double sigmoid_rank_loss(const Vector& scores, const Labels& labels, Vector* grad = nullptr);

struct AttentionLoss {
  double value = 0.0;
  /// False when the question node has no sentence neighbours (topology type3).
  bool applicable = true;
  /// d(loss)/d(attention weights), shaped like AttentionRecord::hops; only
  /// the question node's row is non-empty.
  std::vector<HopAttention> grad;
};

/// -sum_k sum_i t_i log a_qi(k), where t is the label vector restricted to the
/// question's neighbours (normalised to sum 1 when `normalize_targets`).
AttentionLoss attention_loss(const AttentionRecord& attention, const Labels& labels, const SentenceGraph& graph,
                             bool normalize_targets = true, bool want_grad = false);

struct LossBreakdown {
  double loss_rank = 0.0;
  double loss_attn = 0.0;
  double alpha = 1.0;
  double total = 0.0;
};

/// alpha * rank + attn.
double combined_loss(double rank, double attn, double alpha);

}  // namespace propsel
