#include "propsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace propsel {

std::vector<std::size_t> rank_order(const Vector& scores) {
  std::vector<std::size_t> order(static_cast<std::size_t>(scores.size()));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores(static_cast<Eigen::Index>(a)) > scores(static_cast<Eigen::Index>(b));
  });
  return order;
}

Labels ranked_labels(const Vector& scores, const Labels& labels) {
  if (static_cast<std::size_t>(scores.size()) != labels.size())
    throw std::invalid_argument("ranked_labels: size mismatch");
  Labels out;
  out.reserve(labels.size());
  for (auto i : rank_order(scores)) out.push_back(labels[i]);
  return out;
}

double average_precision(const Labels& ranked) {
  double hits = 0.0, sum = 0.0;
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    if (!ranked[r]) continue;
    hits += 1.0;
    sum += hits / static_cast<double>(r + 1);
  }
  return hits > 0 ? sum / hits : 0.0;
}

double reciprocal_rank(const Labels& ranked) {
  for (std::size_t r = 0; r < ranked.size(); ++r)
    if (ranked[r]) return 1.0 / static_cast<double>(r + 1);
  return 0.0;
}

RankingMetrics compute_map_mrr(const std::vector<Labels>& per_question) {
  RankingMetrics m;
  for (const auto& ranked : per_question) {
    if (std::none_of(ranked.begin(), ranked.end(), [](auto y) { return y != 0; })) {
      ++m.skipped;
      continue;
    }
    m.map += average_precision(ranked);
    m.mrr += reciprocal_rank(ranked);
    ++m.questions;
  }
  if (m.questions > 0) {
    m.map /= static_cast<double>(m.questions);
    m.mrr /= static_cast<double>(m.questions);
  }
  return m;
}

std::vector<ThresholdRow> threshold_metrics(const std::vector<Vector>& scores, const std::vector<Labels>& labels,
                                            const std::vector<double>& thresholds) {
  if (scores.size() != labels.size()) throw std::invalid_argument("threshold_metrics: size mismatch");
  std::vector<ThresholdRow> rows;
  for (double tau : thresholds) {
    std::size_t tp = 0, predicted = 0, gold = 0, exact = 0;
    for (std::size_t q = 0; q < scores.size(); ++q) {
      if (static_cast<std::size_t>(scores[q].size()) != labels[q].size())
        throw std::invalid_argument("threshold_metrics: question scores and labels differ in length");
      bool match = true;
      for (std::size_t i = 0; i < labels[q].size(); ++i) {
        const bool pred = scores[q](static_cast<Eigen::Index>(i)) > tau;
        const bool truth = labels[q][i] != 0;
        predicted += pred;
        gold += truth;
        tp += pred && truth;
        match = match && pred == truth;
      }
      exact += match;
    }
    ThresholdRow row;
    row.threshold = tau;
    row.no_predictions = predicted == 0;
    row.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    row.recall = gold ? static_cast<double>(tp) / static_cast<double>(gold) : 0.0;
    row.f1 = row.precision + row.recall > 0 ? 2 * row.precision * row.recall / (row.precision + row.recall) : 0.0;
    row.em = scores.empty() ? 0.0 : static_cast<double>(exact) / static_cast<double>(scores.size());
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> threshold_range(double lo, double hi, double step) {
  if (!(step > 0) || hi < lo) throw std::invalid_argument("threshold range needs lo <= hi and step > 0");
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (long i = 0; i < n; ++i) {
    // Round to 1e-12 so 0.3 + 3 * 0.05 prints as 0.45.
    const double t = lo + static_cast<double>(i) * step;
    out.push_back(std::round(t * 1e12) / 1e12);
  }
  return out;
}

std::vector<double> parse_threshold_range(std::string_view text) {
  const auto a = text.find(':');
  const auto b = a == std::string_view::npos ? a : text.find(':', a + 1);
  if (b == std::string_view::npos) throw std::invalid_argument("threshold range must look like lo:hi:step");
  try {
    return threshold_range(std::stod(std::string(text.substr(0, a))), std::stod(std::string(text.substr(a + 1, b - a - 1))),
                           std::stod(std::string(text.substr(b + 1))));
  } catch (const std::logic_error&) {
    throw std::invalid_argument("threshold range must look like lo:hi:step");
  }
}

}  // namespace propsel
