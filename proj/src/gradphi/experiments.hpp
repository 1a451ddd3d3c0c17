#pragma once

#include <string>
#include <vector>

#include "gradphi/config.hpp"

namespace gradphi {

struct RunResult {
  std::string directory;
  std::string summary_json;
  std::vector<std::string> files;  // relative to directory, in write order
  bool passed = true;              // every check the experiment makes held
};

// "<potential>_N<N>_seed<seed>_<hash>", keyed on the canonical config text.
std::string run_directory_name(const ExperimentConfig& config, const std::string& canonical);

// Runs the configured experiment and writes config.ini, CSVs and
// summary.json under <output_dir>/<experiment>/<run name>/.
RunResult run_experiment(const ExperimentConfig& config, const std::string& canonical);

}  // namespace gradphi
