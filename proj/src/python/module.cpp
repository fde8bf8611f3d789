#include "propsel/cli.hpp"
#include "propsel/corpus.hpp"
#include "propsel/errors.hpp"
#include "propsel/graph.hpp"
#include "propsel/metrics.hpp"
#include "propsel/objective.hpp"
#include "propsel/synthetic.hpp"
#include "propsel/train.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using nlohmann::json;

namespace {

propsel::Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const propsel::Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<propsel::Example> examples_from_records(const std::string& records_json, bool strict) {
  propsel::IngestOptions opts;
  opts.strict = strict;
  return propsel::ingest(json::parse(records_json), opts).examples;
}

}  // namespace

PYBIND11_MODULE(_propsel, m) {
  m.doc() = "Propagate-Selector core bindings";

  py::register_exception<propsel::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<propsel::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<propsel::NumericError>(m, "NumericError", PyExc_ArithmeticError);

  m.def("tokenize", [](const std::string& text) { return propsel::tokenize(text); }, py::arg("text"));

  m.def(
      "ingest",
      [](const std::string& records_json, bool strict) {
        propsel::IngestOptions opts;
        opts.strict = strict;
        const auto r = propsel::ingest(json::parse(records_json), opts);
        json out = json::array();
        for (const auto& ex : r.examples) out.push_back(propsel::example_to_json(ex));
        return py::make_tuple(out.dump(), r.warnings);
      },
      py::arg("records_json"), py::arg("strict") = true,
      "Ingests a JSON array of raw records; returns (examples_json, warnings).");

  m.def(
      "build_graph",
      [](const std::vector<std::size_t>& sizes, const std::string& topology) {
        const auto g = propsel::build_graph(sizes, propsel::parse_topology(topology));
        std::vector<py::tuple> edges;
        for (const auto& e : g.edges()) edges.push_back(py::make_tuple(e.a, e.b, std::string(propsel::to_string(e.cls))));
        return py::make_tuple(g.node_count(), edges);
      },
      py::arg("passage_sizes"), py::arg("topology") = "full", "Returns (node_count, [(a, b, edge_class)]).");

  m.def(
      "edge_count_formula",
      [](const std::vector<std::size_t>& sizes, const std::string& topology) {
        return propsel::edge_count_formula(sizes, propsel::parse_topology(topology));
      },
      py::arg("passage_sizes"), py::arg("topology") = "full");

  m.def(
      "rank_loss",
      [](const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
        propsel::Vector grad;
        const double loss = propsel::rank_loss(to_vector(scores), labels, &grad);
        return py::make_tuple(loss, std::vector<double>(grad.data(), grad.data() + grad.size()));
      },
      py::arg("scores"), py::arg("labels"), "Softmax cross-entropy rank loss; returns (loss, grad).");

  m.def("average_precision", &propsel::average_precision, py::arg("ranked_labels"));
  m.def("reciprocal_rank", &propsel::reciprocal_rank, py::arg("ranked_labels"));
  m.def(
      "compute_map_mrr",
      [](const std::vector<propsel::Labels>& ranked) {
        const auto r = propsel::compute_map_mrr(ranked);
        return py::make_tuple(r.map, r.mrr);
      },
      py::arg("ranked_labels_per_question"));

  m.def(
      "threshold_metrics",
      [](const std::vector<std::vector<double>>& scores, const std::vector<propsel::Labels>& labels,
         const std::vector<double>& thresholds) {
        std::vector<propsel::Vector> s;
        for (const auto& v : scores) s.push_back(to_vector(v));
        std::vector<py::dict> rows;
        for (const auto& r : propsel::threshold_metrics(s, labels, thresholds)) {
          py::dict d;
          d["threshold"] = r.threshold;
          d["em"] = r.em;
          d["precision"] = r.precision;
          d["recall"] = r.recall;
          d["f1"] = r.f1;
          d["no_predictions"] = r.no_predictions;
          rows.push_back(d);
        }
        return rows;
      },
      py::arg("scores"), py::arg("labels"), py::arg("thresholds"));

  m.def(
      "generate_synthetic",
      [](int questions, std::uint64_t seed, int marker_pairs) {
        propsel::SyntheticOptions o;
        o.questions = questions;
        o.seed = seed;
        o.marker_pairs = marker_pairs;
        return propsel::generate_synthetic(o).dump();
      },
      py::arg("questions") = 200, py::arg("seed") = 7, py::arg("marker_pairs") = 10,
      "Returns a JSON array of HotpotQA-format records.");

  m.def(
      "train_and_evaluate",
      [](const std::string& config_json, const std::string& train_json, const std::string& dev_json,
         std::size_t min_freq) {
        const auto cfg = propsel::train_config_from_json(json::parse(config_json));
        const auto train_set = examples_from_records(train_json, true);
        const auto dev_set = examples_from_records(dev_json, true);
        auto vocab = std::make_shared<const propsel::Vocabulary>(propsel::Vocabulary::build(train_set, min_freq));
        json out;
        {
          py::gil_scoped_release release;
          const auto result = propsel::train(cfg, train_set, dev_set, vocab);
          auto model = propsel::load_scorer(result.best, vocab);
          const auto topo = result.effective_config.model.topology;
          out = json{{"best_epoch", result.best_epoch},
                     {"best_dev_map", result.best_dev_map},
                     {"aborted", result.aborted},
                     {"log", result.log.to_json()},
                     {"train", propsel::evaluate(*model, train_set, topo).to_json()},
                     {"dev", propsel::evaluate(*model, dev_set, topo).to_json()}};
        }
        return out.dump();
      },
      py::arg("config_json"), py::arg("train_records_json"), py::arg("dev_records_json"), py::arg("min_freq") = 1,
      "Trains on raw records and returns a JSON summary with the training log and both evaluations.");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"propsel"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = propsel::cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs a CLI command in-process; returns (exit_code, stdout, stderr).");
}
