#ifndef TBSPEC_CLI_HPP
#define TBSPEC_CLI_HPP

#include "tbspec/config.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace tbspec {

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

constexpr int kSummarySchemaVersion = 1;

struct RunOptions {
  std::optional<std::string> out_dir;  // overrides [output] dir
  std::optional<int> threads;          // overrides TBSPEC_THREADS
};

const std::vector<std::string>& commands();

// Thread count: explicit option, else TBSPEC_THREADS, else 0 (runtime default).
int resolve_threads(const std::optional<int>& requested);

// Runs one command and writes its tables and summary.json into the output
// directory. Faults are reported in the summary and through the exit code.
int run(const std::string& command, const ExperimentConfig& cfg, const RunOptions& opts, std::ostream& log);

// Same, starting from config text; parse diagnostics give exit code 1.
int run_text(const std::string& command, const std::string& config_text, const RunOptions& opts, std::ostream& log);

}  // namespace tbspec

#endif
