#include "propsel/cli.hpp"

#include "propsel/errors.hpp"
#include "propsel/hash.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

namespace propsel::cli {

using nlohmann::json;

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), sha256_file(path));
}

json RunManifest::to_json() const {
  json in = json::array();
  for (const auto& [path, hash] : inputs) in.push_back({{"path", path}, {"sha256", hash}});
  return json{{"command", command},   {"argv", argv},     {"config", config},
              {"inputs", in},         {"outputs", outputs}, {"seed", seed},
              {"started_at", started_at}, {"finished_at", finished_at}, {"exit_code", exit_code}};
}

RunManifest RunManifest::from_json(const json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.at("argv").get<std::vector<std::string>>();
  m.config = j.value("config", json::object());
  for (const auto& in : j.at("inputs")) m.inputs.emplace_back(in.at("path").get<std::string>(), in.at("sha256").get<std::string>());
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  m.exit_code = j.value("exit_code", -1);
  return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << to_json().dump(2) << '\n';
}

}  // namespace propsel::cli
