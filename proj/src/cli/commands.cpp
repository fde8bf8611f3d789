#include "propsel/cli.hpp"

#include "propsel/checkpoint.hpp"
#include "propsel/config.hpp"
#include "propsel/corpus.hpp"
#include "propsel/errors.hpp"
#include "propsel/hash.hpp"
#include "propsel/synthetic.hpp"
#include "propsel/train.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

namespace propsel::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path default_data_dir() {
  if (const char* env = std::getenv("PROPSEL_CACHE_DIR"); env && *env) return env;
  return "propsel-cache";
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError(path.string() + " is not valid JSON");
  return j;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

fs::path split_path(const fs::path& data_dir, const std::string& split) {
  return data_dir / (split + ".examples.jsonl");
}

std::vector<Example> load_split(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open prepared split " + path.string() + " (run `propsel prepare` first)");
  return read_example_cache(in);
}

std::shared_ptr<const Vocabulary> load_vocab(const fs::path& path) {
  return std::make_shared<const Vocabulary>(Vocabulary::from_json(read_json_file(path)));
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  try {
    if (auto dots = text.find(".."); dots != std::string::npos) {
      const int lo = std::stoi(text.substr(0, dots)), hi = std::stoi(text.substr(dots + 2));
      for (int k = lo; k <= hi; ++k) out.push_back(k);
    } else {
      std::istringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) out.push_back(std::stoi(item));
    }
  } catch (const std::logic_error&) {
    throw ConfigError("cannot parse integer list '" + text + "' (expected lo..hi or a,b,c)");
  }
  if (out.empty()) throw ConfigError("integer list '" + text + "' is empty");
  return out;
}

/// Flags shared by train and sweep that override config-file values.
struct ConfigFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> hops, epochs, patience, batch_size, embed_dim, hidden;
  std::optional<double> lr, alpha;
  std::optional<std::string> topology, architecture;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file ({\"model\": ..., \"training\": ...})");
    cmd->add_option("--seed", seed, "Random seed");
    cmd->add_option("--hops", hops, "Propagation hops K");
    cmd->add_option("--epochs", epochs, "Maximum epochs");
    cmd->add_option("--patience", patience, "Early-stopping patience in epochs");
    cmd->add_option("--batch-size", batch_size, "Questions per batch");
    cmd->add_option("--embed-dim", embed_dim, "Word embedding width");
    cmd->add_option("--hidden", hidden, "Node representation width");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--alpha", alpha, "Rank loss weight");
    cmd->add_option("--topology", topology, "full|type1|type2|type3");
    cmd->add_option("--architecture", architecture, "propagate_selector|compaggr|compaggr_kmax");
  }

  TrainConfig resolve() const {
    json base = config_path.empty() ? json::object() : read_json_file(config_path);
    json over = json::object();
    if (seed) over["training"]["seed"] = *seed;
    if (epochs) over["training"]["max_epochs"] = *epochs;
    if (patience) over["training"]["patience"] = *patience;
    if (batch_size) over["training"]["batch_size"] = *batch_size;
    if (lr) over["training"]["learning_rate"] = *lr;
    if (hops) over["model"]["hops"] = *hops;
    if (alpha) over["model"]["alpha"] = *alpha;
    if (topology) over["model"]["topology"] = *topology;
    if (architecture) over["model"]["architecture"] = *architecture;
    if (embed_dim) over["model"]["embedder"]["dim"] = *embed_dim;
    if (hidden) over["model"]["encoder"]["hidden"] = *hidden;
    return merge_train_config(train_config_from_json(base), over);
  }
};

/// Starts a manifest in `out_dir` and finalises it when the command ends.
class ManifestScope {
 public:
  ManifestScope(const std::string& command, std::vector<std::string> argv, const fs::path& out_dir)
      : path_(out_dir / (command + ".manifest.json")) {
    manifest_.command = command;
    manifest_.argv = std::move(argv);
    manifest_.started_at = utc_timestamp();
  }
  RunManifest& get() { return manifest_; }
  void begin() {
    fs::create_directories(path_.parent_path());
    manifest_.write(path_);
  }
  void output(const fs::path& p) { manifest_.outputs.push_back(p.string()); }
  void finish(int code) {
    manifest_.finished_at = utc_timestamp();
    manifest_.exit_code = code;
    manifest_.write(path_);
  }

 private:
  fs::path path_;
  RunManifest manifest_;
};

void print_stats_table(std::ostream& out, const std::vector<std::pair<std::string, CorpusStats>>& rows) {
  out << std::left << std::setw(12) << "split" << std::right << std::setw(10) << "questions" << std::setw(11)
      << "sentences" << std::setw(10) << "psg/q" << std::setw(10) << "sent/psg" << std::setw(10) << "sent/q"
      << std::setw(10) << "supp/q" << std::setw(10) << "tok/q" << std::setw(10) << "tok/sent" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& [name, s] : rows)
    out << std::left << std::setw(12) << name << std::right << std::setw(10) << s.n_questions << std::setw(11)
        << s.n_sentences << std::setw(10) << s.passages_per_question << std::setw(10) << s.sentences_per_passage
        << std::setw(10) << s.sentences_per_question << std::setw(10) << s.supporting_per_question << std::setw(10)
        << s.avg_tokens_question << std::setw(10) << s.avg_tokens_sentence << '\n';
  out << std::defaultfloat << std::setprecision(6);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  CLI::App app{"Propagate-Selector: graph-based supporting sentence selection"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Ingest raw HotpotQA-format files into cached examples");
  std::vector<std::string> raw_paths;
  std::string prepare_out;
  std::size_t min_freq = Vocabulary::kDefaultMinFrequency;
  bool lenient = false;
  std::string vocab_from;
  prepare->add_option("raw", raw_paths, "Raw JSON files; the file stem names the split")->required();
  prepare->add_option("--out", prepare_out, "Output directory (default $PROPSEL_CACHE_DIR)");
  prepare->add_option("--min-freq", min_freq, "Minimum token frequency for the vocabulary");
  prepare->add_flag("--lenient", lenient, "Skip malformed records with a warning instead of failing");
  prepare->add_option("--vocab-from", vocab_from, "Split whose tokens build the vocabulary (default: first file)");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model on a prepared corpus");
  ConfigFlags train_flags;
  train_flags.attach(train_cmd);
  std::string data_dir, train_split = "train", dev_split = "dev", out_dir = "runs/train";
  auto add_data = [&](CLI::App* cmd) {
    cmd->add_option("--data", data_dir, "Prepared corpus directory (default $PROPSEL_CACHE_DIR)");
  };
  add_data(train_cmd);
  train_cmd->add_option("--train-split", train_split, "Training split name");
  train_cmd->add_option("--dev-split", dev_split, "Split used for early stopping");
  train_cmd->add_option("--out", out_dir, "Run directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint: MAP, MRR and threshold metrics");
  std::string checkpoint_path, eval_split = "dev", thresholds_spec = "0.3:0.6:0.05", eval_out = "runs/eval";
  eval_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  add_data(eval_cmd);
  eval_cmd->add_option("--split", eval_split, "Split to evaluate");
  eval_cmd->add_option("--thresholds", thresholds_spec, "Threshold range lo:hi:step");
  eval_cmd->add_option("--out", eval_out, "Report directory");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Train one model per setting and tabulate MAP/MRR");
  ConfigFlags sweep_flags;
  std::string sweep_kind, sweep_out = "runs/sweep", hop_list = "1..6", variants_path;
  bool parallel = false;
  sweep_cmd->add_option("kind", sweep_kind, "hops|topology|encoder")
      ->required()
      ->check(CLI::IsMember({"hops", "topology", "encoder"}));
  // The shared --hops override makes no sense for a hop sweep; it takes a list here.
  sweep_cmd->add_option("--config", sweep_flags.config_path, "JSON config file");
  sweep_cmd->add_option("--seed", sweep_flags.seed, "Random seed shared by all cells");
  sweep_cmd->add_option("--epochs", sweep_flags.epochs, "Maximum epochs");
  sweep_cmd->add_option("--patience", sweep_flags.patience, "Early-stopping patience");
  sweep_cmd->add_option("--batch-size", sweep_flags.batch_size, "Questions per batch");
  sweep_cmd->add_option("--lr", sweep_flags.lr, "Adam learning rate");
  sweep_cmd->add_option("--topology", sweep_flags.topology, "Topology for hop and encoder sweeps");
  sweep_cmd->add_option("--hops", hop_list, "Hop values for the hop sweep (lo..hi or a,b,c)");
  sweep_cmd->add_option("--variants", variants_path, "JSON list of encoder variants for the encoder sweep");
  sweep_cmd->add_flag("--parallel", parallel, "Run sweep cells concurrently");
  add_data(sweep_cmd);
  sweep_cmd->add_option("--train-split", train_split, "Training split name");
  sweep_cmd->add_option("--dev-split", dev_split, "Dev split name");
  sweep_cmd->add_option("--out", sweep_out, "Report directory");

  // plot
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG charts from an attention trace or threshold CSV");
  std::string plot_kind, plot_input, plot_out = "plots";
  plot_cmd->add_option("kind", plot_kind, "attention|threshold")->required();
  plot_cmd->add_option("--input", plot_input, "Attention trace JSON or thresholds CSV")->required();
  plot_cmd->add_option("--out", plot_out, "Directory for the SVG files");

  // export-attention
  auto* export_cmd = app.add_subcommand("export-attention", "Write the per-hop question attention of one example");
  std::string export_split = "dev", export_id, export_out = "attention.json";
  int export_index = 0;
  export_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  add_data(export_cmd);
  export_cmd->add_option("--split", export_split, "Split containing the example");
  export_cmd->add_option("--id", export_id, "Example id (default: use --index)");
  export_cmd->add_option("--index", export_index, "Example position in the split");
  export_cmd->add_option("--out", export_out, "Output JSON file");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic marker corpus in HotpotQA format");
  SyntheticOptions synth;
  std::string synth_out = "synthetic", synth_split = "150,25,25";
  synth_cmd->add_option("--out", synth_out, "Directory for train.json, dev.json and test.json");
  synth_cmd->add_option("--questions", synth.questions, "Number of questions");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--split", synth_split, "Question counts for train,dev,test");
  synth_cmd->add_option("--marker-pairs", synth.marker_pairs, "Number of cue/marker pairs");

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Re-run a command from its manifest after checking input hashes");
  std::string replay_manifest, replay_out;
  replay_cmd->add_option("manifest", replay_manifest, "Manifest file")->required();
  replay_cmd->add_option("--out", replay_out, "Redirect the run's --out to this path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  const fs::path data = data_dir.empty() ? default_data_dir() : fs::path(data_dir);

  try {
    if (*prepare) {
      const fs::path dir = prepare_out.empty() ? default_data_dir() : fs::path(prepare_out);
      ManifestScope manifest("prepare", args, dir);
      manifest.get().config = {{"min_freq", min_freq}, {"lenient", lenient}, {"vocab_from", vocab_from}};
      std::vector<std::pair<std::string, IngestResult>> splits;
      for (const auto& raw : raw_paths) {
        manifest.get().add_input(raw);
        std::ifstream in(raw);
        if (!in) throw DataError("cannot open " + raw);
        IngestOptions opts;
        opts.strict = !lenient;
        IngestResult r = ingest(in, opts);
        for (const auto& w : r.warnings) err << "warning: " << raw << ": " << w << '\n';
        if (r.examples.empty()) throw DataError(raw + ": no usable examples");
        splits.emplace_back(fs::path(raw).stem().string(), std::move(r));
      }
      const std::string vocab_split = vocab_from.empty() ? splits.front().first : vocab_from;
      const auto vit = std::find_if(splits.begin(), splits.end(), [&](const auto& s) { return s.first == vocab_split; });
      if (vit == splits.end()) throw ConfigError("--vocab-from: no input file has the stem '" + vocab_split + "'");
      const Vocabulary vocab = Vocabulary::build(vit->second.examples, min_freq);

      // Everything parsed; only now touch the output directory.
      manifest.begin();
      std::vector<std::pair<std::string, CorpusStats>> table;
      for (const auto& [name, r] : splits) {
        const fs::path cache = split_path(dir, name);
        std::ofstream c(cache);
        if (!c) throw DataError("cannot write " + cache.string());
        write_example_cache(c, r.examples);
        manifest.output(cache);
        const CorpusStats stats = compute_stats(r.examples);
        const fs::path stats_path = dir / (name + ".stats.json");
        write_text_file(stats_path, stats_to_json(stats).dump(2) + "\n");
        manifest.output(stats_path);
        table.emplace_back(name, stats);
      }
      write_text_file(dir / "vocab.json", vocab.to_json().dump() + "\n");
      manifest.output(dir / "vocab.json");
      print_stats_table(out, table);
      out << "vocabulary: " << vocab.size() << " tokens (min frequency " << min_freq << ", from " << vocab_split
          << ")\n";
      manifest.finish(kOk);
      return kOk;
    }

    if (*train_cmd) {
      const TrainConfig cfg = train_flags.resolve();
      const fs::path dir(out_dir);
      ManifestScope manifest("train", args, dir);
      manifest.get().config = to_json(cfg);
      manifest.get().seed = cfg.seed;
      if (!train_flags.config_path.empty()) manifest.get().add_input(train_flags.config_path);
      for (const fs::path& p : {split_path(data, train_split), split_path(data, dev_split), data / "vocab.json"})
        manifest.get().add_input(p);
      manifest.begin();

      const auto train_set = load_split(split_path(data, train_split));
      const auto dev_set = load_split(split_path(data, dev_split));
      const auto vocab = load_vocab(data / "vocab.json");
      TrainOptions opts;
      opts.on_epoch = [&](const EpochRecord& e) {
        out << "epoch " << e.epoch << "  loss " << e.mean_loss << "  dev MAP " << e.dev_map << "  dev MRR " << e.dev_mrr
            << (e.improved ? "  *" : "") << '\n';
      };
      const TrainResult result = train(cfg, train_set, dev_set, vocab, opts);
      for (const auto& n : result.log.notices) out << "notice: " << n << '\n';

      save_checkpoint(result.best, dir / "checkpoint.json");
      manifest.output(dir / "checkpoint.json");
      write_text_file(dir / "training_log.json", result.log.to_json().dump(2) + "\n");
      manifest.output(dir / "training_log.json");
      write_text_file(dir / "config.resolved.json", to_json(result.effective_config).dump(2) + "\n");
      manifest.output(dir / "config.resolved.json");

      auto model = load_scorer(result.best, vocab);
      const EvalReport dev = evaluate(*model, dev_set, result.effective_config.model.topology);
      write_text_file(dir / "dev_report.json", dev.to_json().dump(2) + "\n");
      manifest.output(dir / "dev_report.json");
      out << "best epoch " << result.best_epoch << "  dev MAP " << dev.map << "  dev MRR " << dev.mrr << '\n';
      if (result.aborted) {
        err << "error: training aborted: " << result.abort_reason << " (best checkpoint kept)\n";
        manifest.finish(kNumeric);
        return kNumeric;
      }
      manifest.finish(kOk);
      return kOk;
    }

    if (*eval_cmd) {
      const fs::path dir(eval_out);
      const auto thresholds = parse_threshold_range(thresholds_spec);
      ManifestScope manifest("eval", args, dir);
      manifest.get().config = {{"split", eval_split}, {"thresholds", thresholds}};
      for (const fs::path& p : {fs::path(checkpoint_path), split_path(data, eval_split), data / "vocab.json"})
        manifest.get().add_input(p);
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      manifest.get().seed = ckpt.config.seed;
      manifest.begin();

      const auto examples = load_split(split_path(data, eval_split));
      auto model = load_scorer(ckpt, load_vocab(data / "vocab.json"));
      const EvalReport report = evaluate(*model, examples, ckpt.config.model.topology, thresholds);
      write_text_file(dir / "report.json", report.to_json().dump(2) + "\n");
      write_text_file(dir / "thresholds.csv", report.thresholds_csv());
      manifest.output(dir / "report.json");
      manifest.output(dir / "thresholds.csv");
      out << "MAP " << report.map << "  MRR " << report.mrr << "  questions " << report.questions.size() << '\n';
      if (report.skipped_questions) err << "warning: " << report.skipped_questions << " questions without positives skipped\n";
      out << report.thresholds_csv();
      manifest.finish(kOk);
      return kOk;
    }

    if (*sweep_cmd) {
      const TrainConfig cfg = sweep_flags.resolve();
      const fs::path dir(sweep_out);
      ManifestScope manifest("sweep", args, dir);
      manifest.get().config = to_json(cfg);
      manifest.get().seed = cfg.seed;
      if (!sweep_flags.config_path.empty()) manifest.get().add_input(sweep_flags.config_path);
      if (!variants_path.empty()) manifest.get().add_input(variants_path);
      for (const fs::path& p : {split_path(data, train_split), split_path(data, dev_split), data / "vocab.json"})
        manifest.get().add_input(p);
      const std::vector<int> hop_values = sweep_kind == "hops" ? parse_int_list(hop_list) : std::vector<int>{};
      std::vector<EncoderVariant> variants;
      if (sweep_kind == "encoder") {
        if (variants_path.empty()) {
          EncoderVariant rec{"recurrent", cfg.model.embedder, cfg.model.encoder};
          rec.encoder.kind = EncoderKind::recurrent;
          EncoderVariant avg{"average", cfg.model.embedder, cfg.model.encoder};
          avg.encoder.kind = EncoderKind::average;
          variants = {rec, avg};
        } else {
          for (const auto& v : read_json_file(variants_path)) {
            json model = to_json(cfg.model);
            if (v.contains("embedder")) model["embedder"].update(v.at("embedder"));
            if (v.contains("encoder")) model["encoder"].update(v.at("encoder"));
            const TrainConfig vc = merge_train_config(cfg, json{{"model", model}});
            variants.push_back({v.at("label").get<std::string>(), vc.model.embedder, vc.model.encoder});
          }
        }
      }
      manifest.begin();

      const auto train_set = load_split(split_path(data, train_split));
      const auto dev_set = load_split(split_path(data, dev_split));
      const auto vocab = load_vocab(data / "vocab.json");
      SweepOptions opts;
      opts.parallel = parallel;
      SweepTable table;
      if (sweep_kind == "hops") table = sweep_hops(cfg, hop_values, train_set, dev_set, vocab, opts);
      else if (sweep_kind == "topology") table = sweep_topologies(cfg, train_set, dev_set, vocab, opts);
      else table = sweep_encoders(cfg, variants, train_set, dev_set, vocab, opts);

      const fs::path json_path = dir / ("sweep_" + sweep_kind + ".json");
      const fs::path csv_path = dir / ("sweep_" + sweep_kind + ".csv");
      write_text_file(json_path, table.to_json().dump(2) + "\n");
      write_text_file(csv_path, table.to_csv());
      manifest.output(json_path);
      manifest.output(csv_path);
      out << table.to_csv();
      const bool aborted = std::any_of(table.rows.begin(), table.rows.end(), [](const SweepRow& r) { return r.aborted; });
      manifest.finish(aborted ? kNumeric : kOk);
      return aborted ? kNumeric : kOk;
    }

    if (*plot_cmd) {
      if (plot_kind == "attention") {
        for (const auto& f : plot_attention(read_json_file(plot_input), plot_out)) out << f.string() << '\n';
      } else if (plot_kind == "threshold") {
        out << plot_thresholds(read_text_file(plot_input), plot_out).string() << '\n';
      } else {
        err << "error: unknown plot kind '" << plot_kind << "' (expected attention|threshold)\n";
        return kUsage;
      }
      return kOk;
    }

    if (*export_cmd) {
      const Checkpoint ckpt = load_checkpoint(checkpoint_path);
      if (ckpt.config.model.architecture != Architecture::propagate_selector)
        throw ConfigError("export-attention needs a propagate_selector checkpoint");
      const auto examples = load_split(split_path(data, export_split));
      const Example* ex = nullptr;
      if (!export_id.empty()) {
        for (const auto& e : examples)
          if (e.id == export_id) ex = &e;
        if (!ex) throw DataError("no example with id " + export_id + " in split " + export_split);
      } else {
        if (export_index < 0 || static_cast<std::size_t>(export_index) >= examples.size())
          throw DataError("--index out of range for split " + export_split);
        ex = &examples[static_cast<std::size_t>(export_index)];
      }
      auto model = load_scorer(ckpt, load_vocab(data / "vocab.json"));
      const auto& ps = dynamic_cast<const PropagateSelector&>(*model);
      const json trace = attention_trace(ps, *ex, ckpt.config.model.topology);
      if (fs::path(export_out).has_parent_path()) fs::create_directories(fs::path(export_out).parent_path());
      write_text_file(export_out, trace.dump(2) + "\n");
      out << export_out << '\n';
      return kOk;
    }

    if (*synth_cmd) {
      const std::vector<int> counts = parse_int_list(synth_split);
      int total = 0;
      for (int c : counts) total += c;
      if (counts.size() != 3 || total != synth.questions)
        throw ConfigError("--split must list three counts summing to --questions");
      const json records = generate_synthetic(synth);
      fs::create_directories(synth_out);
      const char* names[] = {"train", "dev", "test"};
      std::size_t at = 0;
      for (std::size_t s = 0; s < 3; ++s) {
        json part = json::array();
        for (int i = 0; i < counts[s]; ++i) part.push_back(records[at++]);
        const fs::path p = fs::path(synth_out) / (std::string(names[s]) + ".json");
        write_text_file(p, part.dump() + "\n");
        out << p.string() << '\n';
      }
      return kOk;
    }

    if (*replay_cmd) {
      const RunManifest m = RunManifest::from_json(read_json_file(replay_manifest));
      for (const auto& [path, hash] : m.inputs) {
        if (!fs::exists(path)) throw DataError("replay: input " + path + " is missing");
        if (sha256_file(path) != hash) throw DataError("replay: input " + path + " changed since the recorded run");
      }
      std::vector<std::string> rerun = m.argv;
      if (!replay_out.empty()) {
        bool replaced = false;
        for (std::size_t i = 0; i + 1 < rerun.size(); ++i)
          if (rerun[i] == "--out") {
            rerun[i + 1] = replay_out;
            replaced = true;
          }
        if (!replaced) {
          rerun.push_back("--out");
          rerun.push_back(replay_out);
        }
      }
      std::vector<const char*> cargv{"propsel"};
      for (const auto& a : rerun) cargv.push_back(a.c_str());
      return run_cli(static_cast<int>(cargv.size()), cargv.data(), out, err);
    }
  } catch (const ConfigError& e) {
    err << "error: invalid configuration\n";
    for (const auto& p : e.problems()) err << "  " << p << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: parse failure at record " << e.record_index() << ": " << e.what() << '\n';
    return kData;
  } catch (const IngestError& e) {
    err << "error: record " << e.record_id() << ": " << e.what() << '\n';
    return kData;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const NumericError& e) {
    err << "error: numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace propsel::cli
