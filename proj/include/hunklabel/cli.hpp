#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "hunklabel/llm_client.hpp"
#include "hunklabel/prompting.hpp"

namespace hunklabel {

enum class BackendKind { Oracle, Scripted, Http };

struct RunConfig {
  LabelerMode mode = LabelerMode::File;
  BackendKind backend = BackendKind::Scripted;
  std::size_t context_lines = kDefaultContextWidth;
  std::size_t parallel = 4;
  std::optional<std::filesystem::path> diff;
  std::optional<std::filesystem::path> files_dir;
  std::optional<std::filesystem::path> ground_truth;
  std::optional<std::filesystem::path> labels;      // refine: labeler output
  std::optional<std::filesystem::path> prediction;  // evaluate
  std::optional<std::filesystem::path> scripts;     // scripted backend replies
  std::optional<std::filesystem::path> templates;   // prompt resource directory
  std::filesystem::path out = "out";
  bool dry_run = false;
  bool skip_refiner = false;
  BackendConfig http;
};

// Settings as strings, keyed like the long flags without dashes
// ("context-lines"). Later layers override earlier ones.
using ConfigLayer = std::map<std::string, std::string>;

// HUNKLABEL_MODE, HUNKLABEL_CONTEXT_LINES, ... from the environment.
ConfigLayer config_from_env();
// A JSON object with the same keys (dashes or underscores); an "http" member
// holds backend settings. Throws ConfigError.
ConfigLayer config_from_file(const std::filesystem::path& path, BackendConfig& http);
// Applies one layer onto `cfg`. Throws ConfigError for bad values.
void apply_layer(RunConfig& cfg, const ConfigLayer& layer);

// Entry point for the hunklabel executable: subcommands label, refine, run
// and evaluate. Returns the process exit status.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace hunklabel
