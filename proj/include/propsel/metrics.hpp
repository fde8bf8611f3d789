#pragma once

#include "propsel/corpus.hpp"
#include "propsel/tensor.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace propsel {

/// Sentence indices sorted by descending score; ties keep ascending index.
std::vector<std::size_t> rank_order(const Vector& scores);

/// Labels permuted into rank order.
Labels ranked_labels(const Vector& scores, const Labels& labels);

double average_precision(const Labels& ranked);
double reciprocal_rank(const Labels& ranked);

struct RankingMetrics {
  double map = 0.0;
  double mrr = 0.0;
  std::size_t questions = 0;
  /// Questions without a positive; excluded from both means.
  std::size_t skipped = 0;
};

RankingMetrics compute_map_mrr(const std::vector<Labels>& ranked_labels_per_question);

struct ThresholdRow {
  double threshold = 0.0;
  double em = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// No sentence scored above the threshold; precision is reported as 0.
  bool no_predictions = false;
};

/// Predicts "supporting" when score > threshold. Precision, recall and F1 are
/// micro-averaged over all sentences; EM is the fraction of questions whose
/// predicted set equals the gold set.
std::vector<ThresholdRow> threshold_metrics(const std::vector<Vector>& scores, const std::vector<Labels>& labels,
                                            const std::vector<double>& thresholds);

/// Inclusive arithmetic range lo, lo+step, ..., hi.
std::vector<double> threshold_range(double lo, double hi, double step);

/// Parses "lo:hi:step".
std::vector<double> parse_threshold_range(std::string_view text);

}  // namespace propsel
