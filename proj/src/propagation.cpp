#include "propsel/propagation.hpp"

#include "propsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace propsel {

PropagationParams PropagationParams::create(int dim, int hops, bool tied, double attention_dropout, Rng& rng) {
  if (hops < 1) throw std::invalid_argument("propagation needs at least one hop");
  PropagationParams p;
  p.hops = hops;
  p.tied = tied;
  p.attention_dropout = attention_dropout;
  const int copies = tied ? 1 : hops;
  for (int k = 0; k < copies; ++k) {
    const auto suffix = "." + std::to_string(k + 1);
    p.transform.emplace_back("propagation.transform" + suffix, glorot_init(dim, dim, rng));
    p.update.emplace_back("propagation.update" + suffix, glorot_init(dim, 2 * dim, rng));
  }
  return p;
}

void PropagationParams::collect_parameters(ParameterRefs& out) {
  for (auto& w : transform) out.push_back(&w);
  for (auto& w : update) out.push_back(&w);
}

double AttentionRecord::weight(const SentenceGraph& graph, int hop, int v, int u) const {
  const auto nbrs = graph.neighbors(v);
  const auto it = std::lower_bound(nbrs.begin(), nbrs.end(), u);
  if (it == nbrs.end() || *it != u) return 0.0;
  return hops.at(static_cast<std::size_t>(hop))[static_cast<std::size_t>(v)][static_cast<std::size_t>(it - nbrs.begin())];
}

HopAttention attend(const Matrix& states, const SentenceGraph& graph, const Matrix& transform) {
  const Matrix transformed = states * transform.transpose();  // row u = (W N_u)^T
  HopAttention out(static_cast<std::size_t>(graph.node_count()));
  for (int v = 0; v < graph.node_count(); ++v) {
    const auto nbrs = graph.neighbors(v);
    if (nbrs.empty()) continue;
    std::vector<double> scores(nbrs.size());
    for (std::size_t j = 0; j < nbrs.size(); ++j) scores[j] = states.row(v).dot(transformed.row(nbrs[j]));
    const double top = *std::max_element(scores.begin(), scores.end());
    double total = 0.0;
    for (auto& s : scores) total += (s = std::exp(s - top));
    for (auto& s : scores) s /= total;
    out[static_cast<std::size_t>(v)] = std::move(scores);
  }
  return out;
}

namespace {

Matrix aggregate_preactivation(const Matrix& transformed, const HopAttention& attention, const SentenceGraph& graph) {
  Matrix pre = Matrix::Zero(transformed.rows(), transformed.cols());
  for (int v = 0; v < graph.node_count(); ++v) {
    const auto nbrs = graph.neighbors(v);
    const auto& a = attention[static_cast<std::size_t>(v)];
    for (std::size_t j = 0; j < nbrs.size(); ++j) pre.row(v) += a[j] * transformed.row(nbrs[j]);
  }
  return pre;
}

void check_finite(const Matrix& m, int hop) {
  for (Eigen::Index v = 0; v < m.rows(); ++v)
    if (!m.row(v).allFinite())
      throw NumericError("non-finite node state at hop " + std::to_string(hop) + ", node " + std::to_string(v), hop,
                         static_cast<int>(v));
}

}  // namespace

Matrix aggregate(const Matrix& states, const HopAttention& attention, const SentenceGraph& graph,
                 const Matrix& transform) {
  return aggregate_preactivation(states * transform.transpose(), attention, graph).array().tanh().matrix();
}

Matrix update(const Matrix& states, const Matrix& aggregated, const Matrix& update_matrix) {
  const Eigen::Index d = states.cols();
  return (states * update_matrix.leftCols(d).transpose() + aggregated * update_matrix.rightCols(d).transpose())
      .array()
      .tanh()
      .matrix();
}

PropagationResult propagate(const SentenceGraph& graph, const Matrix& initial_states, const PropagationParams& params,
                            Rng* dropout_rng) {
  if (initial_states.rows() != graph.node_count())
    throw std::invalid_argument("propagate: one initial state row per node required");
  if (initial_states.cols() != params.dim()) throw std::invalid_argument("propagate: state width mismatch");
  PropagationResult r;
  r.states.hops.push_back(initial_states);
  for (int k = 0; k < params.hops; ++k) {
    const Matrix& h = r.states.hops.back();
    Matrix w = params.transform_at(k).value;
    Matrix mask;
    if (dropout_rng && params.attention_dropout > 0.0) {
      mask = dropout_mask(w.rows(), w.cols(), params.attention_dropout, *dropout_rng);
      w = w.cwiseProduct(mask);
    }
    HopAttention a = attend(h, graph, w);
    Matrix agg = aggregate(h, a, graph, w);
    Matrix next = update(h, agg, params.update_at(k).value);
    check_finite(next, k + 1);
    r.attention.hops.push_back(std::move(a));
    r.aggregated.push_back(std::move(agg));
    r.effective_transform.push_back(std::move(w));
    r.transform_mask.push_back(std::move(mask));
    r.states.hops.push_back(std::move(next));
  }
  return r;
}

Matrix propagate_backward(const SentenceGraph& graph, const PropagationResult& fwd, PropagationParams& params,
                          const Matrix& grad_final_states, const std::vector<HopAttention>& grad_attention) {
  Matrix d_next = grad_final_states;
  for (int k = params.hops - 1; k >= 0; --k) {
    const auto ks = static_cast<std::size_t>(k);
    const Matrix& h = fwd.states.hops[ks];
    const Matrix& out = fwd.states.hops[ks + 1];
    const Matrix& agg = fwd.aggregated[ks];
    const Matrix& w = fwd.effective_transform[ks];
    const HopAttention& att = fwd.attention.hops[ks];
    Parameter& upd = params.update_at(k);
    const Eigen::Index d = h.cols();

    // Update: out = tanh([h agg] W'^T).
    const Matrix d_pre = d_next.cwiseProduct((1.0 - out.array().square()).matrix());
    upd.grad.leftCols(d) += d_pre.transpose() * h;
    upd.grad.rightCols(d) += d_pre.transpose() * agg;
    Matrix d_h = d_pre * upd.value.leftCols(d);
    const Matrix d_agg = d_pre * upd.value.rightCols(d);

    // Aggregate: agg_v = tanh(sum_j a_vj T_u), T = h W^T.
    const Matrix d_agg_pre = d_agg.cwiseProduct((1.0 - agg.array().square()).matrix());
    const Matrix transformed = h * w.transpose();
    Matrix d_transformed = Matrix::Zero(transformed.rows(), transformed.cols());
    const bool has_external = ks < grad_attention.size() && !grad_attention[ks].empty();
    for (int v = 0; v < graph.node_count(); ++v) {
      const auto nbrs = graph.neighbors(v);
      if (nbrs.empty()) continue;
      const auto& a = att[static_cast<std::size_t>(v)];
      std::vector<double> d_a(nbrs.size());
      for (std::size_t j = 0; j < nbrs.size(); ++j) {
        d_transformed.row(nbrs[j]) += a[j] * d_agg_pre.row(v);
        d_a[j] = d_agg_pre.row(v).dot(transformed.row(nbrs[j]));
        if (has_external) {
          const auto& ext = grad_attention[ks][static_cast<std::size_t>(v)];
          if (!ext.empty()) d_a[j] += ext[j];
        }
      }
      // Softmax over the neighbour set.
      double weighted = 0.0;
      for (std::size_t j = 0; j < nbrs.size(); ++j) weighted += a[j] * d_a[j];
      for (std::size_t j = 0; j < nbrs.size(); ++j) {
        const double d_score = a[j] * (d_a[j] - weighted);
        d_h.row(v) += d_score * transformed.row(nbrs[j]);
        d_transformed.row(nbrs[j]) += d_score * h.row(v);
      }
    }
    Matrix d_w = d_transformed.transpose() * h;
    d_h += d_transformed * w;
    const Matrix& mask = fwd.transform_mask[ks];
    if (mask.size() > 0) d_w = d_w.cwiseProduct(mask);
    params.transform_at(k).grad += d_w;
    d_next = std::move(d_h);
  }
  return d_next;
}

}  // namespace propsel
