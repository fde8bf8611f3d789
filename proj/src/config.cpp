#include "propsel/config.hpp"

#include "propsel/errors.hpp"

#include <functional>
#include <stdexcept>

namespace propsel {

using nlohmann::json;

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::propagate_selector: return "propagate_selector";
    case Architecture::compaggr: return "compaggr";
    case Architecture::compaggr_kmax: return "compaggr_kmax";
  }
  return "?";
}

Architecture parse_architecture(std::string_view name) {
  for (auto a : {Architecture::propagate_selector, Architecture::compaggr, Architecture::compaggr_kmax})
    if (to_string(a) == name) return a;
  throw std::invalid_argument("unknown architecture '" + std::string(name) +
                              "' (expected propagate_selector|compaggr|compaggr_kmax)");
}

int ModelConfig::node_dim() const {
  switch (encoder.kind) {
    case EncoderKind::recurrent: return encoder.hidden;
    case EncoderKind::average: return embedder.dim;
    case EncoderKind::precomputed_sentence: return encoder.hidden;
  }
  return encoder.hidden;
}

json to_json(const ModelConfig& c) {
  return json{{"architecture", to_string(c.architecture)},
              {"embedder", {{"kind", to_string(c.embedder.kind)}, {"dim", c.embedder.dim}, {"path", c.embedder.path}}},
              {"encoder", {{"kind", to_string(c.encoder.kind)}, {"hidden", c.encoder.hidden}, {"path", c.encoder.path}}},
              {"hops", c.hops},
              {"tied_weights", c.tied_weights},
              {"topology", to_string(c.topology)},
              {"alpha", c.alpha},
              {"rank_loss", to_string(c.rank_loss)},
              {"attention_loss", c.attention_loss},
              {"normalize_attention_targets", c.normalize_attention_targets},
              {"encoder_dropout", c.encoder_dropout},
              {"attention_dropout", c.attention_dropout},
              {"head_width", c.head_width},
              {"compaggr",
               {{"filter_widths", c.compaggr.filter_widths},
                {"feature_maps", c.compaggr.feature_maps},
                {"k", c.compaggr.k}}}};
}

json to_json(const TrainConfig& c) {
  return json{{"model", to_json(c.model)},
              {"training",
               {{"batch_size", c.batch_size},
                {"learning_rate", c.learning_rate},
                {"clip_norm", c.clip_norm},
                {"max_epochs", c.max_epochs},
                {"patience", c.patience},
                {"seed", c.seed}}}};
}

namespace {

// Reads fields out of a JSON object, recording a problem for every unknown
// key or type mismatch instead of stopping at the first.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path, std::vector<std::string>& problems)
      : obj_(obj), path_(std::move(path)), problems_(problems) {
    if (!obj_.is_object()) problem("", "expected an object");
  }

  ~FieldReader() {
    if (!obj_.is_object()) return;
    for (const auto& [key, value] : obj_.items())
      if (!known_.count(key)) problem(key, "unknown field");
  }

  template <typename T>
  void read(const char* key, T& out) {
    known_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    const json& v = obj_[key];
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) return problem(key, "expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) return problem(key, "expected an integer");
        if constexpr (std::is_unsigned_v<T>)
          if (v.get<long long>() < 0) return problem(key, "expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) return problem(key, "expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) return problem(key, "expected a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      problem(key, e.what());
    }
  }

  template <typename Enum>
  void read_enum(const char* key, Enum& out, Enum (*parse)(std::string_view)) {
    known_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    if (!obj_[key].is_string()) return problem(key, "expected a string");
    try {
      out = parse(obj_[key].get<std::string>());
    } catch (const std::invalid_argument& e) {
      problem(key, e.what());
    }
  }

  void section(const char* key, const std::function<void(FieldReader&)>& body) {
    known_.insert(key);
    if (!obj_.is_object() || !obj_.contains(key)) return;
    FieldReader sub(obj_[key], join(key), problems_);
    body(sub);
  }

  void allow(const std::string& key) { known_.insert(key); }

 private:
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  void problem(const std::string& key, const std::string& what) {
    problems_.push_back((key.empty() ? path_ : join(key)) + ": " + what);
  }

  const json& obj_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> known_;
};

void read_model(FieldReader& r, ModelConfig& m) {
  r.read_enum("architecture", m.architecture, &parse_architecture);
  r.section("embedder", [&](FieldReader& e) {
    e.read_enum("kind", m.embedder.kind, &parse_embedder_kind);
    e.read("dim", m.embedder.dim);
    e.read("path", m.embedder.path);
  });
  r.section("encoder", [&](FieldReader& e) {
    e.read_enum("kind", m.encoder.kind, &parse_encoder_kind);
    e.read("hidden", m.encoder.hidden);
    e.read("path", m.encoder.path);
  });
  r.read("hops", m.hops);
  r.read("tied_weights", m.tied_weights);
  r.read_enum("topology", m.topology, &parse_topology);
  r.read("alpha", m.alpha);
  r.read_enum("rank_loss", m.rank_loss, &parse_rank_loss);
  r.read("attention_loss", m.attention_loss);
  r.read("normalize_attention_targets", m.normalize_attention_targets);
  r.read("encoder_dropout", m.encoder_dropout);
  r.read("attention_dropout", m.attention_dropout);
  r.read("head_width", m.head_width);
  r.section("compaggr", [&](FieldReader& c) {
    c.read("filter_widths", m.compaggr.filter_widths);
    c.read("feature_maps", m.compaggr.feature_maps);
    c.read("k", m.compaggr.k);
  });
  m.compaggr.kmax = m.architecture == Architecture::compaggr_kmax;
}

void read_config(const json& j, TrainConfig& c, const std::set<std::string>& extra_keys) {
  std::vector<std::string> problems;
  {
    FieldReader top(j, "", problems);
    for (const auto& k : extra_keys) top.allow(k);
    top.section("model", [&](FieldReader& m) { read_model(m, c.model); });
    top.section("training", [&](FieldReader& t) {
      t.read("batch_size", c.batch_size);
      t.read("learning_rate", c.learning_rate);
      t.read("clip_norm", c.clip_norm);
      t.read("max_epochs", c.max_epochs);
      t.read("patience", c.patience);
      t.read("seed", c.seed);
    });
  }
  try {
    validate(c);
  } catch (const ConfigError& e) {
    problems.insert(problems.end(), e.problems().begin(), e.problems().end());
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
}

}  // namespace

TrainConfig train_config_from_json(const json& j, const std::set<std::string>& extra_keys) {
  TrainConfig c;
  read_config(j, c, extra_keys);
  return c;
}

TrainConfig merge_train_config(const TrainConfig& base, const json& overrides, const std::set<std::string>& extra_keys) {
  TrainConfig c = base;
  read_config(overrides, c, extra_keys);
  return c;
}

void validate(const TrainConfig& c) {
  std::vector<std::string> p;
  const auto& m = c.model;
  if (m.embedder.dim < 1) p.push_back("model.embedder.dim: must be >= 1");
  if (m.encoder.hidden < 1) p.push_back("model.encoder.hidden: must be >= 1");
  if (m.embedder.kind != EmbedderKind::trainable_lookup && m.embedder.path.empty())
    p.push_back("model.embedder.path: required for static and contextual embedders");
  if (m.encoder.kind == EncoderKind::precomputed_sentence && m.encoder.path.empty())
    p.push_back("model.encoder.path: required for the precomputed encoder");
  if (m.hops < 1) p.push_back("model.hops: must be >= 1");
  if (m.alpha < 0) p.push_back("model.alpha: must be >= 0");
  if (m.encoder_dropout < 0 || m.encoder_dropout >= 1) p.push_back("model.encoder_dropout: must be in [0, 1)");
  if (m.attention_dropout < 0 || m.attention_dropout >= 1) p.push_back("model.attention_dropout: must be in [0, 1)");
  if (m.head_width < 0) p.push_back("model.head_width: must be >= 0");
  if (m.compaggr.filter_widths.empty()) p.push_back("model.compaggr.filter_widths: must not be empty");
  for (int w : m.compaggr.filter_widths)
    if (w < 1) p.push_back("model.compaggr.filter_widths: widths must be >= 1");
  if (m.compaggr.feature_maps < 1) p.push_back("model.compaggr.feature_maps: must be >= 1");
  if (m.compaggr.k < 1) p.push_back("model.compaggr.k: must be >= 1");
  if (c.batch_size < 1) p.push_back("training.batch_size: must be >= 1");
  if (!(c.learning_rate > 0)) p.push_back("training.learning_rate: must be > 0");
  if (!(c.clip_norm > 0)) p.push_back("training.clip_norm: must be > 0");
  if (c.max_epochs < 1) p.push_back("training.max_epochs: must be >= 1");
  if (c.patience < 0) p.push_back("training.patience: must be >= 0");
  if (!p.empty()) throw ConfigError(std::move(p));
}

}  // namespace propsel
