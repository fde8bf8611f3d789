#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace propsel::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

/// Record of one command invocation, written before the command does any
/// work and completed when it finishes.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::pair<std::string, std::string>> inputs;  // path, sha256
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  int exit_code = -1;

  void add_input(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  void write(const std::filesystem::path& path) const;
};

std::string utc_timestamp();

/// Renders one bar chart per hop from an attention trace; returns the files.
std::vector<std::filesystem::path> plot_attention(const nlohmann::json& trace, const std::filesystem::path& out_dir);

/// Renders EM/precision/recall/F1 against the threshold from a thresholds CSV.
std::filesystem::path plot_thresholds(const std::string& csv, const std::filesystem::path& out_dir);

/// Entry point behind the `propsel` executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace propsel::cli
