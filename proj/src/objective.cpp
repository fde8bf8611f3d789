#include "propsel/objective.hpp"

#include "propsel/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace propsel {

ScoringHead::ScoringHead(int dim, int width, Rng& rng)
    : hidden("head.hidden", glorot_init(width, 3 * dim, rng)),
      hidden_bias("head.hidden_bias", Matrix::Zero(width, 1)),
      output("head.output", glorot_init(1, width, rng)),
      output_bias("head.output_bias", Matrix::Zero(1, 1)) {}

void ScoringHead::collect_parameters(ParameterRefs& out) {
  for (auto* p : {&hidden, &hidden_bias, &output, &output_bias}) out.push_back(p);
}

namespace {

Vector pair_features(const Vector& q, const Vector& s) {
  Vector x(3 * q.size());
  x << q, s, q.cwiseProduct(s);
  return x;
}

}  // namespace

double ScoringHead::score(const Vector& question, const Vector& sentence) const {
  const Vector h = (hidden.value * pair_features(question, sentence) + hidden_bias.value.col(0)).array().tanh().matrix();
  return output.value.row(0).dot(h) + output_bias.value(0, 0);
}

Vector ScoringHead::score_sentences(const Matrix& final_states, const SentenceGraph& graph, Trace* trace) const {
  const auto& sentences = graph.sentence_nodes();
  const auto n = static_cast<Eigen::Index>(sentences.size());
  const Vector q = final_states.row(graph.question_node()).transpose();
  Matrix inputs(n, 3 * final_states.cols());
  for (Eigen::Index i = 0; i < n; ++i)
    inputs.row(i) = pair_features(q, final_states.row(sentences[static_cast<std::size_t>(i)]).transpose()).transpose();
  Matrix h = ((inputs * hidden.value.transpose()).rowwise() + hidden_bias.value.col(0).transpose()).array().tanh();
  Vector scores = (h * output.value.row(0).transpose()).array() + output_bias.value(0, 0);
  if (trace) {
    trace->inputs = std::move(inputs);
    trace->hidden = std::move(h);
  }
  return scores;
}

Matrix ScoringHead::backward(const Matrix& final_states, const SentenceGraph& graph, const Trace& trace,
                             const Vector& grad_scores) {
  const auto& sentences = graph.sentence_nodes();
  const Eigen::Index d = final_states.cols();
  output.grad.row(0) += (trace.hidden.transpose() * grad_scores).transpose();
  output_bias.grad(0, 0) += grad_scores.sum();
  const Matrix d_hidden_pre =
      (grad_scores * output.value.row(0)).cwiseProduct((1.0 - trace.hidden.array().square()).matrix());
  hidden.grad += d_hidden_pre.transpose() * trace.inputs;
  hidden_bias.grad.col(0) += d_hidden_pre.colwise().sum().transpose();
  const Matrix d_inputs = d_hidden_pre * hidden.value;

  Matrix d_states = Matrix::Zero(final_states.rows(), d);
  const int qn = graph.question_node();
  const Vector q = final_states.row(qn).transpose();
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    const Vector s = final_states.row(sentences[i]).transpose();
    const Vector dq = d_inputs.row(row).segment(0, d).transpose();
    const Vector ds = d_inputs.row(row).segment(d, d).transpose();
    const Vector dqs = d_inputs.row(row).segment(2 * d, d).transpose();
    d_states.row(qn) += (dq + dqs.cwiseProduct(s)).transpose();
    d_states.row(sentences[i]) += (ds + dqs.cwiseProduct(q)).transpose();
  }
  return d_states;
}

Vector score_sentences(const Matrix& final_states, const SentenceGraph& graph, const PairScorer& scorer) {
  const auto& sentences = graph.sentence_nodes();
  Vector scores(static_cast<Eigen::Index>(sentences.size()));
  const Vector q = final_states.row(graph.question_node()).transpose();
  for (std::size_t i = 0; i < sentences.size(); ++i)
    scores(static_cast<Eigen::Index>(i)) = scorer(q, final_states.row(sentences[i]).transpose());
  return scores;
}

std::string_view to_string(RankLossKind kind) { return kind == RankLossKind::softmax ? "softmax" : "sigmoid"; }

RankLossKind parse_rank_loss(std::string_view name) {
  if (name == "softmax") return RankLossKind::softmax;
  if (name == "sigmoid") return RankLossKind::sigmoid;
  throw std::invalid_argument("unknown rank loss '" + std::string(name) + "' (expected softmax|sigmoid)");
}

Vector softmax(const Vector& x) {
  const Vector e = (x.array() - x.maxCoeff()).exp();
  return e / e.sum();
}

Vector normalized_targets(const Labels& labels) {
  Vector t(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) t(static_cast<Eigen::Index>(i)) = labels[i] ? 1.0 : 0.0;
  const double total = t.sum();
  if (total <= 0.0) throw DataError("loss requires at least one positive label");
  return t / total;
}

double rank_loss(const Vector& scores, const Labels& labels, Vector* grad) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("rank_loss: scores and labels differ in length");
  const Vector target = normalized_targets(labels);
  // log p_i = s_i - logsumexp(s)
  const double top = scores.maxCoeff();
  const double lse = top + std::log((scores.array() - top).exp().sum());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < scores.size(); ++i)
    if (target(i) > 0.0) loss -= target(i) * (scores(i) - lse);
  if (grad) *grad = softmax(scores) - target;
  return loss;
}

double sigmoid_rank_loss(const Vector& scores, const Labels& labels, Vector* grad) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("sigmoid_rank_loss: scores and labels differ in length");
  double loss = 0.0;
  if (grad) grad->resize(scores.size());
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double s = scores(i);
    const double y = labels[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
    // log(1 + exp(-|s|)) + max(s, 0) - y s
    loss += std::log1p(std::exp(-std::abs(s))) + std::max(s, 0.0) - y * s;
    if (grad) (*grad)(i) = 1.0 / (1.0 + std::exp(-s)) - y;
  }
  return loss;
}

AttentionLoss attention_loss(const AttentionRecord& attention, const Labels& labels, const SentenceGraph& graph,
                             bool normalize_targets, bool want_grad) {
  AttentionLoss out;
  const int q = graph.question_node();
  const auto nbrs = graph.neighbors(q);
  std::vector<double> target(nbrs.size(), 0.0);
  double total = 0.0;
  for (std::size_t j = 0; j < nbrs.size(); ++j) {
    const int s = graph.sentence_index(nbrs[j]);
    if (s >= 0 && labels.at(static_cast<std::size_t>(s))) total += (target[j] = 1.0);
  }
  if (nbrs.empty() || total == 0.0) {
    out.applicable = false;
    return out;
  }
  if (normalize_targets)
    for (auto& t : target) t /= total;
  if (want_grad) out.grad.resize(attention.hops.size());
  for (std::size_t k = 0; k < attention.hops.size(); ++k) {
    const auto& a = attention.hops[k][static_cast<std::size_t>(q)];
    std::vector<double> g(nbrs.size(), 0.0);
    for (std::size_t j = 0; j < nbrs.size(); ++j) {
      if (target[j] == 0.0) continue;
      out.value -= target[j] * std::log(a[j]);
      g[j] = -target[j] / a[j];
    }
    if (want_grad) {
      out.grad[k].resize(attention.hops[k].size());
      out.grad[k][static_cast<std::size_t>(q)] = std::move(g);
    }
  }
  return out;
}

double combined_loss(double rank, double attn, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("alpha must be >= 0");
  return alpha * rank + attn;
}

}  // namespace propsel
