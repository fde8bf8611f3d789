#include "propsel/train.hpp"

#include "propsel/errors.hpp"
#include "propsel/optim.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>

namespace propsel {

using nlohmann::json;

json TrainingLog::to_json() const {
  json steps_j = json::array();
  for (const auto& s : steps)
    steps_j.push_back({{"step", s.step},
                       {"epoch", s.epoch},
                       {"loss_rank", s.loss_rank},
                       {"loss_attn", s.loss_attn},
                       {"total", s.total},
                       {"grad_norm", s.grad_norm},
                       {"clipped_norm", s.clipped_norm},
                       {"clipped", s.clipped}});
  json epochs_j = json::array();
  for (const auto& e : epochs)
    epochs_j.push_back({{"epoch", e.epoch},
                        {"mean_loss", e.mean_loss},
                        {"dev_map", e.dev_map},
                        {"dev_mrr", e.dev_mrr},
                        {"improved", e.improved}});
  return json{{"notices", notices}, {"steps", std::move(steps_j)}, {"epochs", std::move(epochs_j)}};
}

std::vector<std::string> resolve_effective_config(TrainConfig& config) {
  std::vector<std::string> notices;
  if (config.model.architecture == Architecture::propagate_selector && config.model.topology == TopologyKind::type3 &&
      config.model.attention_loss) {
    config.model.attention_loss = false;
    notices.emplace_back("attention loss disabled: the type3 topology leaves the question node without neighbours");
  }
  return notices;
}

std::vector<SentenceGraph> build_graphs(const std::vector<Example>& examples, TopologyKind kind) {
  std::vector<SentenceGraph> graphs;
  graphs.reserve(examples.size());
  for (const auto& ex : examples) graphs.push_back(build_graph(ex, kind));
  return graphs;
}

namespace {

EvalReport evaluate_with_graphs(const SentenceScorer& scorer, const std::vector<Example>& examples,
                                const std::vector<SentenceGraph>& graphs, const std::vector<double>& thresholds) {
  EvalReport report;
  std::vector<Labels> ranked;
  std::vector<Vector> confidences;
  ranked.reserve(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    Vector conf = scorer.confidences(ex, graphs[i]);
    QuestionRanking q;
    q.id = ex.id;
    q.order = rank_order(conf);
    q.confidences.assign(conf.data(), conf.data() + conf.size());
    q.labels = ex.labels;
    Labels r;
    for (auto idx : q.order) r.push_back(ex.labels[idx]);
    q.average_precision = average_precision(r);
    q.reciprocal_rank = reciprocal_rank(r);
    ranked.push_back(std::move(r));
    report.questions.push_back(std::move(q));
    confidences.push_back(std::move(conf));
  }
  const RankingMetrics m = compute_map_mrr(ranked);
  report.map = m.map;
  report.mrr = m.mrr;
  report.skipped_questions = m.skipped;
  if (!thresholds.empty()) {
    std::vector<Labels> labels;
    for (const auto& ex : examples) labels.push_back(ex.labels);
    report.thresholds = threshold_metrics(confidences, labels, thresholds);
  }
  return report;
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  std::shared_ptr<const Vocabulary> vocab, const TrainOptions& options) {
  if (train_set.empty()) throw DataError("training set is empty");
  if (dev_set.empty()) throw DataError("dev set is empty");

  TrainResult result;
  result.effective_config = config;
  validate(result.effective_config);
  result.log.notices = resolve_effective_config(result.effective_config);
  const TrainConfig& cfg = result.effective_config;
  const std::string vocab_hash = vocab ? vocab->hash() : std::string();

  Rng init_rng(cfg.seed);
  Rng shuffle_rng(cfg.seed + 1);
  Rng dropout_rng(cfg.seed + 2);

  auto model = make_scorer(cfg.model, vocab, init_rng);
  const ParameterRefs params = model->parameters();
  Adam adam(cfg.learning_rate);

  const auto train_graphs = build_graphs(train_set, cfg.model.topology);
  const auto dev_graphs = build_graphs(dev_set, cfg.model.topology);

  result.best = snapshot(cfg, params, vocab_hash);
  result.best_dev_map = -1.0;

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  long step = 0;
  int since_best = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    try {
      for (std::size_t start = 0; start < order.size(); start += batch) {
        const std::size_t end = std::min(order.size(), start + batch);
        zero_grads(params);
        StepRecord rec;
        rec.step = ++step;
        rec.epoch = epoch;
        for (std::size_t k = start; k < end; ++k) {
          const std::size_t i = order[k];
          const LossBreakdown b = model->accumulate_gradients(train_set[i], train_graphs[i], &dropout_rng);
          rec.loss_rank += b.loss_rank;
          rec.loss_attn += b.loss_attn;
          rec.total += b.total;
        }
        const double n = static_cast<double>(end - start);
        rec.loss_rank /= n;
        rec.loss_attn /= n;
        rec.total /= n;
        scale_grads(params, 1.0 / n);
        const ClipResult clip = clip_by_global_norm(params, cfg.clip_norm);
        rec.grad_norm = clip.norm_before;
        rec.clipped_norm = clip.norm_after;
        rec.clipped = clip.clipped;
        if (!std::isfinite(rec.total) || !std::isfinite(rec.grad_norm))
          throw NumericError("non-finite loss or gradient at step " + std::to_string(rec.step), -1, -1);
        adam.step(params);
        epoch_loss += rec.total * n;
        if (options.record_steps) result.log.steps.push_back(rec);
      }
    } catch (const NumericError& e) {
      result.aborted = true;
      result.abort_reason = e.what();
      break;
    }

    EpochRecord er;
    er.epoch = epoch;
    er.mean_loss = epoch_loss / static_cast<double>(train_set.size());
    const EvalReport dev = evaluate_with_graphs(*model, dev_set, dev_graphs, {});
    er.dev_map = dev.map;
    er.dev_mrr = dev.mrr;
    if (std::any_of(params.begin(), params.end(), [](const Parameter* p) { return !all_finite(p->value); })) {
      result.aborted = true;
      result.abort_reason = "non-finite parameters after epoch " + std::to_string(epoch);
      result.log.epochs.push_back(er);
      break;
    }
    if (er.dev_map > result.best_dev_map) {
      er.improved = true;
      result.best = snapshot(cfg, params, vocab_hash);
      result.best_dev_map = er.dev_map;
      result.best_epoch = epoch;
      since_best = 0;
    } else {
      ++since_best;
    }
    result.log.epochs.push_back(er);
    if (options.on_epoch) options.on_epoch(er);
    if (since_best >= cfg.patience) break;
  }
  if (result.best_dev_map < 0) result.best_dev_map = 0.0;
  return result;
}

std::unique_ptr<SentenceScorer> load_scorer(const Checkpoint& checkpoint, std::shared_ptr<const Vocabulary> vocab) {
  if (vocab && !checkpoint.vocab_hash.empty() && vocab->hash() != checkpoint.vocab_hash)
    throw DataError("vocabulary does not match the checkpoint (hash mismatch)");
  Rng rng(checkpoint.config.seed);
  auto model = make_scorer(checkpoint.config.model, std::move(vocab), rng);
  restore(checkpoint, model->parameters());
  return model;
}

EvalReport evaluate(const SentenceScorer& scorer, const std::vector<Example>& examples, TopologyKind topology,
                    const std::vector<double>& thresholds) {
  return evaluate_with_graphs(scorer, examples, build_graphs(examples, topology), thresholds);
}

json EvalReport::to_json() const {
  json th = json::array();
  for (const auto& r : thresholds)
    th.push_back({{"threshold", r.threshold},
                  {"em", r.em},
                  {"precision", r.precision},
                  {"recall", r.recall},
                  {"f1", r.f1},
                  {"no_predictions", r.no_predictions}});
  json qs = json::array();
  for (const auto& q : questions)
    qs.push_back({{"id", q.id},
                  {"ranking", q.order},
                  {"confidences", q.confidences},
                  {"labels", q.labels},
                  {"average_precision", q.average_precision},
                  {"reciprocal_rank", q.reciprocal_rank}});
  return json{{"map", map},
              {"mrr", mrr},
              {"skipped_questions", skipped_questions},
              {"thresholds", std::move(th)},
              {"questions", std::move(qs)}};
}

std::string EvalReport::thresholds_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "threshold,em,precision,recall,f1,no_predictions\n";
  for (const auto& r : thresholds)
    out << r.threshold << ',' << r.em << ',' << r.precision << ',' << r.recall << ',' << r.f1 << ','
        << (r.no_predictions ? 1 : 0) << '\n';
  return out.str();
}

json attention_trace(const PropagateSelector& model, const Example& example, TopologyKind topology) {
  const SentenceGraph graph = build_graph(example, topology);
  const auto fwd = model.forward(example, graph, nullptr);
  const int q = graph.question_node();
  const auto nb = graph.neighbors(q);
  json hops = json::object();
  for (std::size_t k = 0; k < fwd.propagation.attention.hops.size(); ++k) {
    json weights = json::object();
    const auto& row = fwd.propagation.attention.hops[k][static_cast<std::size_t>(q)];
    for (std::size_t j = 0; j < nb.size(); ++j)
      weights[std::to_string(graph.sentence_index(nb[j]))] = row[j];
    hops[std::to_string(k + 1)] = std::move(weights);
  }
  std::vector<std::size_t> gold;
  for (std::size_t i = 0; i < example.labels.size(); ++i)
    if (example.labels[i]) gold.push_back(i);
  return json{{"id", example.id}, {"sentence_count", example.sentence_count()}, {"gold", gold}, {"hops", std::move(hops)}};
}

json SweepTable::to_json() const {
  json rows_j = json::array();
  for (const auto& r : rows)
    rows_j.push_back({{parameter, r.label},
                      {"dev_map", r.dev_map},
                      {"dev_mrr", r.dev_mrr},
                      {"train_map", r.train_map},
                      {"train_mrr", r.train_mrr},
                      {"best_epoch", r.best_epoch},
                      {"epochs_run", r.epochs_run},
                      {"aborted", r.aborted}});
  return json{{"parameter", parameter}, {"rows", std::move(rows_j)}};
}

std::string SweepTable::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << parameter << ",dev_map,dev_mrr,train_map,train_mrr\n";
  for (const auto& r : rows)
    out << r.label << ',' << r.dev_map << ',' << r.dev_mrr << ',' << r.train_map << ',' << r.train_mrr << '\n';
  return out.str();
}

namespace {

SweepRow run_cell(const SweepCell& cell, const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                  const std::shared_ptr<const Vocabulary>& vocab) {
  TrainOptions opts;
  opts.record_steps = false;
  const TrainResult tr = train(cell.config, train_set, dev_set, vocab, opts);
  auto model = load_scorer(tr.best, vocab);
  const TopologyKind topo = tr.effective_config.model.topology;
  const EvalReport dev = evaluate(*model, dev_set, topo);
  const EvalReport trn = evaluate(*model, train_set, topo);
  SweepRow row;
  row.label = cell.label;
  row.dev_map = dev.map;
  row.dev_mrr = dev.mrr;
  row.train_map = trn.map;
  row.train_mrr = trn.mrr;
  row.best_epoch = tr.best_epoch;
  row.epochs_run = static_cast<int>(tr.log.epochs.size());
  row.aborted = tr.aborted;
  return row;
}

}  // namespace

SweepTable run_sweep(const std::string& parameter, const std::vector<SweepCell>& cells,
                     const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                     std::shared_ptr<const Vocabulary> vocab, const SweepOptions& options) {
  if (cells.empty()) throw ConfigError(std::vector<std::string>{"sweep: no cells to run"});
  SweepTable table;
  table.parameter = parameter;
  if (options.parallel) {
    std::vector<std::future<SweepRow>> futures;
    for (const auto& cell : cells)
      futures.push_back(std::async(std::launch::async, [&, cell] { return run_cell(cell, train_set, dev_set, vocab); }));
    for (auto& f : futures) table.rows.push_back(f.get());
  } else {
    for (const auto& cell : cells) table.rows.push_back(run_cell(cell, train_set, dev_set, vocab));
  }
  return table;
}

SweepTable sweep_hops(const TrainConfig& base, const std::vector<int>& hops, const std::vector<Example>& train_set,
                      const std::vector<Example>& dev_set, std::shared_ptr<const Vocabulary> vocab,
                      const SweepOptions& options) {
  std::vector<SweepCell> cells;
  for (int k : hops) {
    SweepCell c{std::to_string(k), base};
    c.config.model.hops = k;
    cells.push_back(std::move(c));
  }
  return run_sweep("hops", cells, train_set, dev_set, std::move(vocab), options);
}

SweepTable sweep_topologies(const TrainConfig& base, const std::vector<Example>& train_set,
                            const std::vector<Example>& dev_set, std::shared_ptr<const Vocabulary> vocab,
                            const SweepOptions& options) {
  std::vector<SweepCell> cells;
  for (TopologyKind t : kAllTopologies) {
    SweepCell c{std::string(to_string(t)), base};
    c.config.model.topology = t;
    cells.push_back(std::move(c));
  }
  return run_sweep("topology", cells, train_set, dev_set, std::move(vocab), options);
}

SweepTable sweep_encoders(const TrainConfig& base, const std::vector<EncoderVariant>& variants,
                          const std::vector<Example>& train_set, const std::vector<Example>& dev_set,
                          std::shared_ptr<const Vocabulary> vocab, const SweepOptions& options) {
  std::vector<SweepCell> cells;
  for (const auto& v : variants) {
    SweepCell c{v.label, base};
    c.config.model.embedder = v.embedder;
    c.config.model.encoder = v.encoder;
    cells.push_back(std::move(c));
  }
  return run_sweep("encoder", cells, train_set, dev_set, std::move(vocab), options);
}

}  // namespace propsel
