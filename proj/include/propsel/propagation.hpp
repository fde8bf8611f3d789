#pragma once

#include "propsel/graph.hpp"
#include "propsel/tensor.hpp"

#include <vector>

namespace propsel {

/// Per-hop matrices of the attentive propagation. Hop k uses the transform
/// W(k) both in the bilinear attention score and as the neighbour transform,
/// and the update W'(k) on the concatenation [state; aggregate].
struct PropagationParams {
  int hops = 1;
  bool tied = false;
  /// Element dropout rate applied to W(k) in training mode.
  double attention_dropout = 0.0;
  std::vector<Parameter> transform;  // d' x d'
  std::vector<Parameter> update;     // d' x 2d'

  static PropagationParams create(int dim, int hops, bool tied, double attention_dropout, Rng& rng);

  int dim() const { return static_cast<int>(transform.front().value.rows()); }
  Parameter& transform_at(int hop) { return transform[tied ? 0 : static_cast<std::size_t>(hop)]; }
  const Parameter& transform_at(int hop) const { return transform[tied ? 0 : static_cast<std::size_t>(hop)]; }
  Parameter& update_at(int hop) { return update[tied ? 0 : static_cast<std::size_t>(hop)]; }
  const Parameter& update_at(int hop) const { return update[tied ? 0 : static_cast<std::size_t>(hop)]; }
  void collect_parameters(ParameterRefs& out);
};

/// For each node, a distribution aligned with graph.neighbors(v). Isolated
/// nodes have an empty distribution.
using HopAttention = std::vector<std::vector<double>>;

struct AttentionRecord {
  std::vector<HopAttention> hops;

  /// Weight of u in v's distribution at `hop` (0-based), 0 if u is not a neighbour.
  double weight(const SentenceGraph& graph, int hop, int v, int u) const;
};

/// states[k] is (nodes x d'); states[0] holds the encoder outputs.
struct NodeStates {
  std::vector<Matrix> hops;
  const Matrix& final_states() const { return hops.back(); }
};

/// a_v = softmax over u in N(v) of  N_v^T W N_u.
HopAttention attend(const Matrix& states, const SentenceGraph& graph, const Matrix& transform);

/// A_v = tanh(sum_u a_vu W N_u); isolated nodes aggregate to zero.
Matrix aggregate(const Matrix& states, const HopAttention& attention, const SentenceGraph& graph,
                 const Matrix& transform);

/// N_v' = tanh(W' [N_v; A_v]).
Matrix update(const Matrix& states, const Matrix& aggregated, const Matrix& update_matrix);

struct PropagationResult {
  NodeStates states;
  AttentionRecord attention;
  std::vector<Matrix> aggregated;         // per hop
  std::vector<Matrix> effective_transform;  // W(k) after dropout
  std::vector<Matrix> transform_mask;     // per hop; 0x0 when dropout is off
};

/// Runs attend -> aggregate -> update for every hop. `dropout_rng` null means
/// inference mode. Throws NumericError naming the hop and node on a non-finite
/// state.
PropagationResult propagate(const SentenceGraph& graph, const Matrix& initial_states,
                            const PropagationParams& params, Rng* dropout_rng = nullptr);

/// Back-propagates d(loss)/d(final states) plus optional direct gradients on
/// the attention weights (`grad_attention[k][v][j]`, may be empty). Adds into
/// the parameter gradients and returns d(loss)/d(initial states).
Matrix propagate_backward(const SentenceGraph& graph, const PropagationResult& forward, PropagationParams& params,
                          const Matrix& grad_final_states, const std::vector<HopAttention>& grad_attention);

}  // namespace propsel
