#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nanolaser/config.hpp"

namespace nanolaser::cli {

enum class Experiment { Bifurcation, Stationary, Ramp, BetaSweep, Trajectory };

std::optional<Experiment> experiment_from_name(std::string_view name);
const char* experiment_name(Experiment e);

struct RunConfig {
  Experiment experiment = Experiment::Bifurcation;
  std::string params_path;  // empty: built-in defaults
  std::vector<std::pair<std::string, std::string>> overrides;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;
  std::size_t lanes = 0;
  Settings settings;  // fully resolved
};

/// Resolves defaults <- parameter file <- overrides <- --seed. Throws
/// ConfigError on unknown keys or malformed values.
RunConfig parse_config(Experiment experiment, const std::string& params_path, const std::vector<std::string>& overrides,
                       std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir,
                       std::optional<std::size_t> lanes);

struct RunOutcome {
  std::vector<std::string> files;  // written artifacts, relative to out_dir
  nlohmann::json summary;
};

/// Runs the driver and writes its CSV tables, the config echo and
/// manifest.json into out_dir.
RunOutcome run(const RunConfig& cfg);

/// Command-line entry point; returns the process exit status.
int main_entry(int argc, char** argv);

}  // namespace nanolaser::cli
