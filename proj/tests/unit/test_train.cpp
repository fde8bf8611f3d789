#include "propsel/checkpoint.hpp"
#include "propsel/errors.hpp"
#include "propsel/optim.hpp"
#include "propsel/synthetic.hpp"
#include "propsel/train.hpp"

#include "gradcheck.hpp"

#include <doctest.h>

#include <filesystem>

using namespace propsel;
using propsel::testing::check_gradients;

namespace {

struct SmallCorpus {
  std::vector<Example> train, dev;
  std::shared_ptr<const Vocabulary> vocab;
};

SmallCorpus small_corpus(int questions = 40) {
  SyntheticOptions o;
  o.questions = questions;
  o.seed = 21;
  auto all = ingest(generate_synthetic(o)).examples;
  SmallCorpus c;
  const auto cut = static_cast<std::ptrdiff_t>(all.size() * 3 / 4);
  c.train.assign(all.begin(), all.begin() + cut);
  c.dev.assign(all.begin() + cut, all.end());
  c.vocab = std::make_shared<const Vocabulary>(Vocabulary::build(c.train, 1));
  return c;
}

TrainConfig small_config() {
  TrainConfig c;
  c.model.embedder.dim = 8;
  c.model.encoder.hidden = 8;
  c.model.hops = 2;
  c.batch_size = 5;
  c.learning_rate = 5e-3;
  c.max_epochs = 4;
  c.patience = 10;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_SUITE("train") {
  TEST_CASE("Adam takes a bias-corrected first step of size lr") {
    Parameter p("p", Matrix::Constant(1, 2, 1.0));
    p.grad << 0.5, -2.0;
    Adam adam(0.1);
    adam.step({&p});
    CHECK(p.value(0, 0) == doctest::Approx(0.9).epsilon(1e-6));
    CHECK(p.value(0, 1) == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(adam.steps() == 1);
  }

  TEST_CASE("global norm clipping") {
    Parameter a("a", Matrix::Zero(1, 2)), b("b", Matrix::Zero(2, 1));
    a.grad << 6.0, 0.0;
    b.grad << 0.0, 8.0;
    const auto r = clip_by_global_norm({&a, &b}, 5.0);
    CHECK(r.clipped);
    CHECK(r.norm_before == doctest::Approx(10.0));
    CHECK(r.norm_after == doctest::Approx(5.0));
    CHECK(a.grad(0, 0) == doctest::Approx(3.0));
    const auto again = clip_by_global_norm({&a, &b}, 5.0);
    CHECK(again.norm_before <= 5.0 + 1e-9);
  }

  TEST_CASE("full model gradients for the encoder and loss variants") {
    const auto corpus = small_corpus(4);
    const Example& ex = corpus.train.front();
    struct Variant {
      EncoderKind encoder;
      RankLossKind loss;
      bool tied;
    };
    for (const Variant v : {Variant{EncoderKind::recurrent, RankLossKind::sigmoid, false},
                            Variant{EncoderKind::average, RankLossKind::softmax, true}}) {
      ModelConfig m;
      m.embedder.dim = 4;
      m.encoder.kind = v.encoder;
      m.encoder.hidden = 4;
      m.hops = 2;
      m.tied_weights = v.tied;
      m.rank_loss = v.loss;
      m.alpha = 0.7;
      Rng rng(5);
      auto model = make_scorer(m, corpus.vocab, rng);
      const SentenceGraph g = build_graph(ex, TopologyKind::full);
      const auto r = check_gradients(model->parameters(), [&] { return model->loss(ex, g).total; },
                                     [&] { model->accumulate_gradients(ex, g, nullptr); });
      INFO("worst ", r.worst_parameter, " analytic ", r.analytic, " numeric ", r.numeric);
      CHECK(r.max_relative_error < 1e-4);
    }
  }

  TEST_CASE("patience 0 runs exactly one epoch") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.patience = 0;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    CHECK(r.log.epochs.size() == 1);
    CHECK(r.best_epoch == 1);
  }

  TEST_CASE("best checkpoint carries the best dev MAP and clipping holds") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.clip_norm = 0.5;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    double best = 0.0;
    for (const auto& e : r.log.epochs) best = std::max(best, e.dev_map);
    CHECK(r.best_dev_map == best);
    auto model = load_scorer(r.best, corpus.vocab);
    CHECK(evaluate(*model, corpus.dev, TopologyKind::full).map == doctest::Approx(best).epsilon(1e-12));
    bool any_clipped = false;
    for (const auto& s : r.log.steps) {
      if (!s.clipped) continue;
      any_clipped = true;
      CHECK(s.clipped_norm <= c.clip_norm + 1e-9);
    }
    CHECK(any_clipped);
  }

  TEST_CASE("type3 disables the attention loss with a notice") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.max_epochs = 1;
    c.model.topology = TopologyKind::type3;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    REQUIRE(r.log.notices.size() == 1);
    CHECK(r.log.notices[0].find("attention loss disabled") != std::string::npos);
    CHECK_FALSE(r.effective_config.model.attention_loss);
    for (const auto& s : r.log.steps) CHECK(s.loss_attn == 0.0);
  }

  TEST_CASE("CompAggr trains through the same loop") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.model.architecture = Architecture::compaggr_kmax;
    c.model.compaggr.feature_maps = 4;
    c.max_epochs = 2;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    CHECK(r.log.epochs.size() == 2);
    CHECK_FALSE(r.aborted);
  }

  TEST_CASE("checkpoints round-trip through disk and check parameter shapes") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.max_epochs = 1;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    const auto path = std::filesystem::temp_directory_path() / "propsel_unit_checkpoint.json";
    save_checkpoint(r.best, path);
    const Checkpoint back = load_checkpoint(path);
    std::filesystem::remove(path);
    CHECK(back.vocab_hash == corpus.vocab->hash());
    CHECK(back.parameters.size() == r.best.parameters.size());
    for (const auto& [name, m] : r.best.parameters) CHECK(back.parameters.at(name) == m);

    Checkpoint broken = back;
    broken.parameters.begin()->second.resize(1, 1);
    auto model = load_scorer(back, corpus.vocab);
    CHECK_THROWS_AS(restore(broken, model->parameters()), DataError);
    const auto other = std::make_shared<const Vocabulary>(Vocabulary::from_frequencies({{"x", 3}}, 1));
    CHECK_THROWS_AS(load_scorer(back, other), DataError);
  }

  TEST_CASE("evaluation report carries thresholds and per-question rankings") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.max_epochs = 1;
    const TrainResult r = train(c, corpus.train, corpus.dev, corpus.vocab);
    auto model = load_scorer(r.best, corpus.vocab);
    const EvalReport rep = evaluate(*model, corpus.dev, TopologyKind::full, parse_threshold_range("0.3:0.6:0.05"));
    CHECK(rep.thresholds.size() == 7);
    CHECK(rep.questions.size() == corpus.dev.size());
    const auto j = rep.to_json();
    CHECK(j.at("questions").at(0).at("ranking").size() == corpus.dev[0].sentence_count());
    CHECK(rep.thresholds_csv().rfind("threshold,em,precision,recall,f1", 0) == 0);
  }

  TEST_CASE("sweeps produce one populated row per cell") {
    const auto corpus = small_corpus();
    TrainConfig c = small_config();
    c.max_epochs = 1;
    const SweepTable hops = sweep_hops(c, {1, 2}, corpus.train, corpus.dev, corpus.vocab);
    REQUIRE(hops.rows.size() == 2);
    CHECK(hops.rows[1].label == "2");
    const SweepTable topo = sweep_topologies(c, corpus.train, corpus.dev, corpus.vocab, {true});
    REQUIRE(topo.rows.size() == 4);
    CHECK(topo.rows[3].label == "type3");
    for (const auto& row : topo.rows)
      for (double v : {row.dev_map, row.dev_mrr, row.train_map, row.train_mrr}) CHECK((v > 0.0 && v <= 1.0));
    const std::string csv = topo.to_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  }

  TEST_CASE("config parsing reports every problem at once") {
    const nlohmann::json bad = {{"model", {{"hops", 0}, {"topology", "ring"}, {"colour", "red"}}},
                                {"training", {{"batch_size", "many"}}}};
    try {
      train_config_from_json(bad);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(e.problems().size() == 4);
    }
    const TrainConfig c = small_config();
    const TrainConfig back = train_config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
  }

  TEST_CASE("synthetic generator is deterministic and well formed") {
    SyntheticOptions o;
    o.questions = 12;
    const auto a = generate_synthetic(o);
    CHECK(a == generate_synthetic(o));
    const auto exs = ingest(a).examples;
    REQUIRE(exs.size() == 12);
    for (const auto& ex : exs) {
      CHECK(ex.sentence_count() == 9);
      CHECK(ex.positive_count() == 2);
    }
    o.seed = 8;
    CHECK(a != generate_synthetic(o));
  }
}
