#pragma once

// Experiment configuration: a text file of [section] headers followed by
// `key = value` lines. `#` starts a comment. Unknown sections or keys are
// rejected. See README.md for the full key list.

#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "divmkt/model.hpp"
#include "divmkt/simulate.hpp"

namespace divmkt {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSection {
  int n = 2;
  double delta = 0.0;
  std::string family = "power_law";  // power_law | patched_power_law | custom
  double p = 0.0;
  double q = 1.0;
  double c = 0.5;
  double x_switch = 0.1;
  std::string g;  // expression in x, custom family only
  std::optional<std::vector<double>> initial_weights;
};

struct OutputsSection {
  std::string directory = "divmkt_out";
  std::optional<std::set<std::string>> formats;  // subset of {csv, json, svg}
  std::size_t plot_paths = 5;
};

struct VerifySection {
  std::vector<int> n;
  std::vector<double> delta;
  std::vector<double> p;
  std::vector<double> q;
  std::string family = "auto";  // auto: power_law for n = 2, patched_power_law otherwise
  double c = 0.5;
  double x_switch = 0.1;
  bool ito_check = false;
  double ito_horizon = 1.0;
  double ito_dt = 1e-3;
  std::size_t ito_paths = 16;
};

struct FellerSection {
  std::string process = "weight";  // weight | custom
  std::string drift;
  std::string diffusion_sq;
  double alpha = 0.0;
  double beta = 1.0;
  double x0 = 0.5;
};

struct ExperimentConfig {
  std::optional<ModelSection> model;
  SimParams sim;
  OutputsSection outputs;
  std::optional<VerifySection> verify;
  std::optional<FellerSection> feller;
};

// Throws ConfigError with the offending line on any syntax error, unknown
// key, missing required key or out-of-range value.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Drift spec described by a model section (ConfigError on bad parameters).
DriftSpec make_spec(const ModelSection& model);
ModelConfig make_model_config(const ModelSection& model);

// "csv,json" -> {"csv", "json"}; ConfigError on unknown formats.
std::set<std::string> parse_formats(std::string_view list);

}  // namespace divmkt
