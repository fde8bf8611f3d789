#include "propsel/checkpoint.hpp"

#include "propsel/errors.hpp"

#include <fstream>

namespace propsel {

using nlohmann::json;

Checkpoint snapshot(const TrainConfig& config, const ParameterRefs& params, const std::string& vocab_hash) {
  Checkpoint c;
  c.config = config;
  c.vocab_hash = vocab_hash;
  for (const auto* p : params) c.parameters[p->name] = p->value;
  return c;
}

void restore(const Checkpoint& checkpoint, const ParameterRefs& params) {
  for (auto* p : params) {
    auto it = checkpoint.parameters.find(p->name);
    if (it == checkpoint.parameters.end()) throw DataError("checkpoint has no parameter " + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw DataError("checkpoint parameter " + p->name + " has the wrong shape");
    p->value = it->second;
  }
}

json checkpoint_to_json(const Checkpoint& c) {
  json params = json::object();
  for (const auto& [name, m] : c.parameters) {
    std::vector<double> data(m.data(), m.data() + m.size());
    params[name] = {{"rows", m.rows()}, {"cols", m.cols()}, {"order", "column_major"}, {"data", std::move(data)}};
  }
  return json{{"format_version", c.format_version},
              {"kind", "propsel_checkpoint"},
              {"config", to_json(c.config)},
              {"vocab_hash", c.vocab_hash},
              {"parameters", std::move(params)}};
}

Checkpoint checkpoint_from_json(const json& j) {
  if (j.value("kind", "") != "propsel_checkpoint") throw DataError("not a checkpoint file");
  Checkpoint c;
  c.format_version = j.at("format_version").get<int>();
  if (c.format_version != kCheckpointFormatVersion)
    throw DataError("unsupported checkpoint format version " + std::to_string(c.format_version));
  c.config = train_config_from_json(j.at("config"));
  c.vocab_hash = j.at("vocab_hash").get<std::string>();
  for (const auto& [name, t] : j.at("parameters").items()) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DataError("checkpoint tensor " + name + " truncated");
    c.parameters[name] = Eigen::Map<const Matrix>(data.data(), rows, cols);
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(c).dump() << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("checkpoint " + path.string() + " is not valid JSON");
  return checkpoint_from_json(j);
}

}  // namespace propsel
