#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gradphi/dynamics.hpp"
#include "gradphi/equilibrium.hpp"
#include "gradphi/estimators.hpp"

namespace gradphi {

// Flat "section.key" -> value view of an INI-style file.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap read_config_file(const std::string& path);
ConfigMap parse_config_text(const std::string& text);
// Every recognised key with its default value.
const ConfigMap& config_defaults();

struct ExperimentConfig {
  std::string experiment;
  std::string potential = "gaussian";
  int n = 16;
  std::vector<int> n_list;
  double tilt = 0.0;
  std::vector<double> epsilons;
  std::size_t replicas = 1000;
  double horizon = 0.0;  // 0: experiment default
  int time_points = 40;
  std::uint64_t seed = 0;
  std::string output_dir = "results";
  AssertionLevel assertion_level = AssertionLevel::kSampled;
  int threads = 1;
  std::string start = "tent";
  SwitchRule rule;
  std::size_t lower_replicas = 2000;
  std::size_t upper_replicas = 200;
  std::size_t equilibrium_count = 4000;
  EquilibriumOptions eq;
  std::vector<int> censor_sites;
  double censor_t = 0.0;
  bool emit_plot_data = false;
  bool trajectory = false;
};

// Validates every field and throws one kConfig error listing all problems.
ExperimentConfig build_config(const ConfigMap& values);

// Sorted "section.key = value" lines without execution-only keys (threads,
// output directory); used for the echo file and the output-name hash.
std::string canonical_config(const ConfigMap& values);

std::string to_string(AssertionLevel level);

}  // namespace gradphi
