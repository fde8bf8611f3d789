#include "propsel/compaggr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace propsel {

Matrix soft_align(const Matrix& context, const Matrix& target, const Matrix& attention, int kmax,
                  AlignmentTrace* trace) {
  const Matrix projected = attention * context;
  const Matrix logits = projected.transpose() * target;  // Lx x Ly
  const Eigen::Index lx = logits.rows();
  Matrix weights = Matrix::Zero(lx, logits.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(lx));
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Eigen::Index keep = lx;
    if (kmax > 0 && kmax < lx) {
      std::stable_sort(order.begin(), order.end(),
                       [&](Eigen::Index a, Eigen::Index b) { return logits(a, j) > logits(b, j); });
      keep = kmax;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < keep; ++r) top = std::max(top, logits(order[static_cast<std::size_t>(r)], j));
    double total = 0.0;
    for (Eigen::Index r = 0; r < keep; ++r) {
      const auto i = order[static_cast<std::size_t>(r)];
      total += (weights(i, j) = std::exp(logits(i, j) - top));
    }
    weights.col(j) /= total;
  }
  if (trace) {
    trace->weights = weights;
    trace->projected = projected;
  }
  return context * weights;
}

namespace {

// Gradient of soft_align w.r.t. context, target and the attention matrix.
void soft_align_backward(const Matrix& context, const Matrix& target, const Matrix& attention,
                         const AlignmentTrace& trace, const Matrix& grad_out, Matrix& d_context, Matrix& d_target,
                         Matrix& d_attention) {
  const Matrix& p = trace.weights;
  d_context += grad_out * p.transpose();
  const Matrix d_p = context.transpose() * grad_out;
  Matrix d_logits(p.rows(), p.cols());
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    const double weighted = p.col(j).dot(d_p.col(j));
    d_logits.col(j) = p.col(j).cwiseProduct((d_p.col(j).array() - weighted).matrix());
  }
  const Matrix d_projected = target * d_logits.transpose();
  d_target += trace.projected * d_logits;
  d_attention += d_projected * context.transpose();
  d_context += attention.transpose() * d_projected;
}

}  // namespace

CompAggr::CompAggr(int dim, CompAggrConfig config, Rng& rng)
    : attention("compaggr.attention", glorot_init(dim, dim, rng)), config_(std::move(config)) {
  if (config_.filter_widths.empty()) throw std::invalid_argument("CompAggr needs at least one filter width");
  for (int w : config_.filter_widths)
    if (w < 1) throw std::invalid_argument("filter widths must be >= 1");
  if (config_.feature_maps < 1) throw std::invalid_argument("feature_maps must be >= 1");
  if (config_.kmax && config_.k < 1) throw std::invalid_argument("k-max pooling needs k >= 1");
  for (int w : config_.filter_widths) {
    const auto tag = ".w" + std::to_string(w);
    filters.emplace_back("compaggr.filter" + tag, glorot_init(config_.feature_maps, dim * w, rng));
    filter_bias.emplace_back("compaggr.filter_bias" + tag, Matrix::Zero(config_.feature_maps, 1));
  }
  output = Parameter("compaggr.output", glorot_init(feature_count(), 2, rng));
  output_bias = Parameter("compaggr.output_bias", Matrix::Zero(2, 1));
}

int CompAggr::feature_count() const {
  const int sides = config_.kmax ? 2 : 1;
  return sides * static_cast<int>(config_.filter_widths.size()) * config_.feature_maps;
}

void CompAggr::collect_parameters(ParameterRefs& out) {
  out.push_back(&attention);
  for (auto& f : filters) out.push_back(&f);
  for (auto& b : filter_bias) out.push_back(&b);
  out.push_back(&output);
  out.push_back(&output_bias);
}

Vector CompAggr::convolve(const Matrix& compared, SideTrace& side) const {
  const int widest = *std::max_element(config_.filter_widths.begin(), config_.filter_widths.end());
  const Eigen::Index d = compared.rows();
  const Eigen::Index len = std::max<Eigen::Index>(compared.cols(), widest);
  side.padded = Matrix::Zero(d, len);
  side.padded.leftCols(compared.cols()) = compared;
  Vector features(static_cast<Eigen::Index>(config_.filter_widths.size()) * config_.feature_maps);
  side.argmax.assign(config_.filter_widths.size(), {});
  side.pooled.assign(config_.filter_widths.size(), {});
  for (std::size_t wi = 0; wi < config_.filter_widths.size(); ++wi) {
    const int w = config_.filter_widths[wi];
    const Matrix& f = filters[wi].value;
    Vector best = Vector::Constant(config_.feature_maps, -std::numeric_limits<double>::infinity());
    std::vector<int> where(static_cast<std::size_t>(config_.feature_maps), 0);
    for (Eigen::Index j = 0; j + w <= len; ++j) {
      const Matrix window = side.padded.middleCols(j, w);
      const Eigen::Map<const Vector> patch(window.data(), d * w);
      const Vector act = (f * patch + filter_bias[wi].value.col(0)).array().tanh().matrix();
      for (int m = 0; m < config_.feature_maps; ++m)
        if (act(m) > best(m)) {
          best(m) = act(m);
          where[static_cast<std::size_t>(m)] = static_cast<int>(j);
        }
    }
    features.segment(static_cast<Eigen::Index>(wi) * config_.feature_maps, config_.feature_maps) = best;
    side.argmax[wi] = std::move(where);
    side.pooled[wi] = std::move(best);
  }
  return features;
}

Matrix CompAggr::convolve_backward(const SideTrace& side, const Vector& grad_features, Eigen::Index offset) {
  const Eigen::Index d = side.padded.rows();
  Matrix d_padded = Matrix::Zero(d, side.padded.cols());
  for (std::size_t wi = 0; wi < config_.filter_widths.size(); ++wi) {
    const int w = config_.filter_widths[wi];
    for (int m = 0; m < config_.feature_maps; ++m) {
      const double g = grad_features(offset + static_cast<Eigen::Index>(wi) * config_.feature_maps + m);
      if (g == 0.0) continue;
      const int j = side.argmax[wi][static_cast<std::size_t>(m)];
      const double a = side.pooled[wi](m);
      const double d_pre = g * (1.0 - a * a);
      const Matrix window = side.padded.middleCols(j, w);
      const Eigen::Map<const Vector> patch(window.data(), d * w);
      filters[wi].grad.row(m) += d_pre * patch.transpose();
      filter_bias[wi].grad(m, 0) += d_pre;
      const Vector d_patch = d_pre * filters[wi].value.row(m).transpose();
      d_padded.middleCols(j, w) += Eigen::Map<const Matrix>(d_patch.data(), d, w);
    }
  }
  return d_padded.leftCols(side.compared.cols());
}

std::array<double, 2> CompAggr::score(const Matrix& question, const Matrix& sentence, Trace* trace) const {
  Trace local;
  Trace& t = trace ? *trace : local;
  t.question = question;
  t.sentence = sentence;
  t.sides.assign(config_.kmax ? 2 : 1, {});
  const int k = config_.kmax ? config_.k : 0;

  // Sentence side: align the question to each sentence position.
  SideTrace& s_side = t.sides[0];
  const Matrix aligned_q = soft_align(question, sentence, attention.value, k, &s_side.alignment);
  s_side.compared = aligned_q.cwiseProduct(sentence);
  Vector features = convolve(s_side.compared, s_side);

  if (config_.kmax) {
    SideTrace& q_side = t.sides[1];
    const Matrix aligned_s = soft_align(sentence, question, attention.value, k, &q_side.alignment);
    q_side.compared = aligned_s.cwiseProduct(question);
    const Vector q_features = convolve(q_side.compared, q_side);
    Vector both(features.size() + q_features.size());
    both << features, q_features;
    features = std::move(both);
  }
  const Vector logits = output.value.transpose() * features + output_bias.value.col(0);
  const Eigen::Vector2d e = (logits.array() - logits.maxCoeff()).exp();
  t.features = std::move(features);
  t.probabilities = e / e.sum();
  return {t.probabilities(0), t.probabilities(1)};
}

std::pair<Matrix, Matrix> CompAggr::backward(const Trace& t, const Vector& grad_logits) {
  output.grad += t.features * grad_logits.transpose();
  output_bias.grad.col(0) += grad_logits;
  const Vector d_features = output.value * grad_logits;

  Matrix d_q = Matrix::Zero(t.question.rows(), t.question.cols());
  Matrix d_s = Matrix::Zero(t.sentence.rows(), t.sentence.cols());
  const Eigen::Index per_side = static_cast<Eigen::Index>(config_.filter_widths.size()) * config_.feature_maps;

  // Sentence side: compared = (Q P) * S.
  {
    const SideTrace& side = t.sides[0];
    const Matrix d_compared = convolve_backward(side, d_features, 0);
    const Matrix aligned = t.question * side.alignment.weights;
    d_s += d_compared.cwiseProduct(aligned);
    soft_align_backward(t.question, t.sentence, attention.value, side.alignment, d_compared.cwiseProduct(t.sentence),
                        d_q, d_s, attention.grad);
  }
  if (config_.kmax) {
    const SideTrace& side = t.sides[1];
    const Matrix d_compared = convolve_backward(side, d_features, per_side);
    const Matrix aligned = t.sentence * side.alignment.weights;
    d_q += d_compared.cwiseProduct(aligned);
    soft_align_backward(t.sentence, t.question, attention.value, side.alignment, d_compared.cwiseProduct(t.question),
                        d_s, d_q, attention.grad);
  }
  return {std::move(d_q), std::move(d_s)};
}

double compaggr_loss(const std::vector<std::array<double, 2>>& predictions, const Labels& labels) {
  if (predictions.size() != labels.size()) throw std::invalid_argument("compaggr_loss: size mismatch");
  constexpr double kFloor = 1e-300;
  double loss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    loss -= std::log(std::max(labels[i] ? predictions[i][0] : predictions[i][1], kFloor));
  return loss;
}

}  // namespace propsel
