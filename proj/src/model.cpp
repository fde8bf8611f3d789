#include "propsel/model.hpp"

#include "propsel/errors.hpp"

#include <cmath>

namespace propsel {

namespace {

NodeKey key_for(const Example& example, int node) { return NodeKey{example.id, node}; }

}  // namespace

PropagateSelector::PropagateSelector(const ModelConfig& config, std::shared_ptr<WordEmbedder> embedder,
                                     std::unique_ptr<NodeEncoder> encoder, Rng& rng)
    : config_(config),
      embedder_(std::move(embedder)),
      encoder_(std::move(encoder)),
      propagation_(PropagationParams::create(encoder_->output_dim(), config.hops, config.tied_weights,
                                             config.attention_dropout, rng)),
      head_(encoder_->output_dim(), config.head_width > 0 ? config.head_width : encoder_->output_dim(), rng) {}

ParameterRefs PropagateSelector::parameters() {
  ParameterRefs out;
  embedder_->collect_parameters(out);
  encoder_->collect_parameters(out);
  propagation_.collect_parameters(out);
  head_.collect_parameters(out);
  return out;
}

const TokenSeq& PropagateSelector::node_tokens(const Example& example, const SentenceGraph& graph, int v) const {
  const int s = graph.sentence_index(v);
  return s < 0 ? example.question : example.sentence(static_cast<std::size_t>(s));
}

PropagateSelector::Forward PropagateSelector::forward(const Example& example, const SentenceGraph& graph,
                                                      Rng* dropout_rng) const {
  Forward f;
  const int n = graph.node_count();
  f.initial_states.resize(n, encoder_->output_dim());
  f.token_inputs.resize(static_cast<std::size_t>(n));
  f.encoder.resize(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    const auto vs = static_cast<std::size_t>(v);
    const NodeKey key = key_for(example, v);
    f.token_inputs[vs] = embedder_->embed(node_tokens(example, graph, v), key);
    f.initial_states.row(v) = encoder_->encode(f.token_inputs[vs], key, &f.encoder[vs], dropout_rng).transpose();
  }
  f.propagation = propagate(graph, f.initial_states, propagation_, dropout_rng);
  f.scores = head_.score_sentences(f.propagation.states.final_states(), graph, &f.head);
  return f;
}

LossBreakdown PropagateSelector::evaluate_loss(const Example& example, const SentenceGraph& graph, const Forward& fwd,
                                               Vector* grad_scores, AttentionLoss* attn) const {
  LossBreakdown b;
  b.alpha = config_.alpha;
  b.loss_rank = config_.rank_loss == RankLossKind::softmax ? rank_loss(fwd.scores, example.labels, grad_scores)
                                                           : sigmoid_rank_loss(fwd.scores, example.labels, grad_scores);
  if (config_.attention_loss) {
    *attn = attention_loss(fwd.propagation.attention, example.labels, graph, config_.normalize_attention_targets,
                           grad_scores != nullptr);
    b.loss_attn = attn->value;
  } else {
    attn->applicable = false;
  }
  b.total = combined_loss(b.loss_rank, b.loss_attn, b.alpha);
  if (!std::isfinite(b.total)) throw NumericError("non-finite loss for example " + example.id, config_.hops, -1);
  return b;
}

LossBreakdown PropagateSelector::loss(const Example& example, const SentenceGraph& graph) const {
  const Forward fwd = forward(example, graph, nullptr);
  AttentionLoss attn;
  return evaluate_loss(example, graph, fwd, nullptr, &attn);
}

LossBreakdown PropagateSelector::accumulate_gradients(const Example& example, const SentenceGraph& graph,
                                                      Rng* dropout_rng) {
  const Forward fwd = forward(example, graph, dropout_rng);
  Vector grad_scores;
  AttentionLoss attn;
  const LossBreakdown b = evaluate_loss(example, graph, fwd, &grad_scores, &attn);
  grad_scores *= config_.alpha;

  const Matrix& final_states = fwd.propagation.states.final_states();
  const Matrix d_final = head_.backward(final_states, graph, fwd.head, grad_scores);
  static const std::vector<HopAttention> kNoAttentionGrad;
  const Matrix d_initial = propagate_backward(graph, fwd.propagation, propagation_, d_final,
                                              attn.applicable ? attn.grad : kNoAttentionGrad);
  for (int v = 0; v < graph.node_count(); ++v) {
    const auto vs = static_cast<std::size_t>(v);
    const Matrix d_tokens = encoder_->backward(fwd.encoder[vs], d_initial.row(v).transpose());
    embedder_->backward(node_tokens(example, graph, v), key_for(example, v), d_tokens);
  }
  return b;
}

Vector PropagateSelector::confidences(const Example& example, const SentenceGraph& graph) const {
  const Forward fwd = forward(example, graph, nullptr);
  if (config_.rank_loss == RankLossKind::sigmoid) return (1.0 + (-fwd.scores.array()).exp()).inverse().matrix();
  return softmax(fwd.scores);
}

// ---- CompAggr ------------------------------------------------------------------

CompAggrScorer::CompAggrScorer(const ModelConfig& config, std::shared_ptr<WordEmbedder> embedder, Rng& rng)
    : embedder_(std::move(embedder)), network_(embedder_->dim(), config.compaggr, rng) {}

ParameterRefs CompAggrScorer::parameters() {
  ParameterRefs out;
  embedder_->collect_parameters(out);
  network_.collect_parameters(out);
  return out;
}

LossBreakdown CompAggrScorer::accumulate_gradients(const Example& example, const SentenceGraph&, Rng*) {
  const NodeKey qkey = key_for(example, 0);
  const Matrix q_rows = embedder_->embed(example.question, qkey);
  const Matrix q = q_rows.transpose();
  Matrix d_q_total = Matrix::Zero(q.rows(), q.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < example.sentence_count(); ++i) {
    const NodeKey skey = key_for(example, static_cast<int>(i) + 1);
    const TokenSeq& tokens = example.sentence(i);
    const Matrix s = embedder_->embed(tokens, skey).transpose();
    CompAggr::Trace trace;
    const auto p = network_.score(q, s, &trace);
    const bool positive = example.labels[i] != 0;
    total -= std::log(std::max(positive ? p[0] : p[1], 1e-300));
    Vector grad_logits(2);
    grad_logits << p[0] - (positive ? 1.0 : 0.0), p[1] - (positive ? 0.0 : 1.0);
    auto [d_q, d_s] = network_.backward(trace, grad_logits);
    d_q_total += d_q;
    embedder_->backward(tokens, skey, d_s.transpose());
  }
  embedder_->backward(example.question, qkey, d_q_total.transpose());
  if (!std::isfinite(total)) throw NumericError("non-finite loss for example " + example.id, 0, -1);
  return LossBreakdown{total, 0.0, 1.0, total};
}

LossBreakdown CompAggrScorer::loss(const Example& example, const SentenceGraph&) const {
  const Matrix q = embedder_->embed(example.question, key_for(example, 0)).transpose();
  std::vector<std::array<double, 2>> preds;
  for (std::size_t i = 0; i < example.sentence_count(); ++i)
    preds.push_back(
        network_.score(q, embedder_->embed(example.sentence(i), key_for(example, static_cast<int>(i) + 1)).transpose()));
  const double l = compaggr_loss(preds, example.labels);
  return LossBreakdown{l, 0.0, 1.0, l};
}

Vector CompAggrScorer::confidences(const Example& example, const SentenceGraph&) const {
  const Matrix q = embedder_->embed(example.question, key_for(example, 0)).transpose();
  Vector out(static_cast<Eigen::Index>(example.sentence_count()));
  for (std::size_t i = 0; i < example.sentence_count(); ++i)
    out(static_cast<Eigen::Index>(i)) =
        network_.score(q, embedder_->embed(example.sentence(i), key_for(example, static_cast<int>(i) + 1)).transpose())[0];
  return out;
}

// ---- factories -----------------------------------------------------------------

std::shared_ptr<WordEmbedder> make_embedder(const EmbedderConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                            Rng& rng) {
  switch (config.kind) {
    case EmbedderKind::trainable_lookup:
      if (!vocab) throw ConfigError("model.embedder: trainable embeddings need a vocabulary");
      return std::make_shared<TrainableLookup>(std::move(vocab), config.dim, rng);
    case EmbedderKind::static_file:
      return std::make_shared<StaticVectors>(StaticVectors::load_file(config.path, config.dim));
    case EmbedderKind::contextual_precomputed:
      return std::make_shared<ContextualEmbedder>(
          std::make_shared<const EmbeddingStore>(EmbeddingStore::load_file(config.path, config.dim)));
  }
  throw ConfigError("model.embedder.kind: unsupported");
}

std::unique_ptr<SentenceScorer> make_scorer(const ModelConfig& config, std::shared_ptr<const Vocabulary> vocab,
                                            Rng& rng) {
  auto embedder = make_embedder(config.embedder, std::move(vocab), rng);
  if (config.architecture != Architecture::propagate_selector) {
    ModelConfig c = config;
    c.compaggr.kmax = config.architecture == Architecture::compaggr_kmax;
    return std::make_unique<CompAggrScorer>(c, std::move(embedder), rng);
  }
  std::unique_ptr<NodeEncoder> encoder;
  switch (config.encoder.kind) {
    case EncoderKind::recurrent:
      encoder = std::make_unique<GruEncoder>(embedder->dim(), config.encoder.hidden, config.encoder_dropout, rng);
      break;
    case EncoderKind::average:
      encoder = std::make_unique<AverageEncoder>(embedder->dim());
      break;
    case EncoderKind::precomputed_sentence: {
      auto store = std::make_shared<const EmbeddingStore>(EmbeddingStore::load_file(config.encoder.path));
      if (store->dim() != config.encoder.hidden)
        throw ConfigError("model.encoder.hidden: precomputed sentence vectors have dimension " +
                          std::to_string(store->dim()));
      encoder = std::make_unique<PrecomputedSentenceEncoder>(std::move(store));
      break;
    }
  }
  return std::make_unique<PropagateSelector>(config, std::move(embedder), std::move(encoder), rng);
}

}  // namespace propsel
