#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mdobf/report.hpp"
#include "mdobf/scenario.hpp"

namespace mdobf {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,     // bad flags, invalid scenario, unknown metric in a threshold
  kExitRuntime = 3,    // I/O failure or simulation error
  kExitThreshold = 4,  // compare: a threshold flag was violated
};

enum class OutputFormat { kCsv, kBin, kPgm };

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::filesystem::path> baseline_report;
  bool auto_baseline = false;  // simulate the unobfuscated scenario in memory
  std::vector<OutputFormat> formats{OutputFormat::kCsv, OutputFormat::kPgm};
  bool dump_iq = false;
  std::string scenario_label;  // echoed as run.scenario_file
};

// Runs the pipeline, writes every artifact plus report.txt into out_dir and
// returns the report.
RunReport run_scenario(const ScenarioConfig& cfg, const RunOptions& opt);

int cli_main(int argc, char** argv);

}  // namespace mdobf
