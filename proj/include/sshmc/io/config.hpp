#pragma once

#include <cstdint>
#include <optional>
#include <vector>
#include <string>

#include "sshmc/sample.hpp"

namespace sshmc::io {

// Experiment description parsed from `key = value` text ('#' comments).
// Unknown keys are rejected by name; missing keys fall back to per-model
// presets. render() emits the fully resolved canonical form, and
// parse_config(render(cfg)) == cfg.
struct ExperimentConfig {
  std::string model;  // funnel | hblr | sv | lgcpp

  // model parameters
  std::size_t funnel_n = 100;
  double hblr_lambda = 1.0;
  double sv_nu = 10.0;
  double sv_tau2 = 0.05;
  double sv_beta_a = 20.0;
  double sv_beta_b = 1.5;
  std::size_t lgcpp_d = 16;
  double lgcpp_mu = 0.0;
  double lgcpp_prior_sd = 1.5;

  // data source: explicit path, or generator settings with their own seed
  std::string data_path;  // empty means generate (or n/a for funnel)
  std::uint64_t data_seed = 1;
  std::size_t sv_T = 200;
  double sv_true_beta = 0.65;
  double sv_true_sigma = 0.15;
  double sv_true_phi = 0.98;
  double lgcpp_true_sigma = 1.9;
  double lgcpp_true_beta = 0.03;

  SamplerConfig sampler;

  // outputs
  bool emit_trace = true;
  bool emit_summary = true;
  bool emit_energy_trace = false;
  std::string emit_histogram;  // column name, empty = off
  int histogram_bins = 40;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string render(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical rendered text, as fixed-width hex.
std::string config_hash(const ExperimentConfig& cfg);

// Apply "key=value" overrides as one batch (the CLI's --override flag):
// the config is re-validated once, after every override has landed.
void apply_overrides(ExperimentConfig& cfg,
                     const std::vector<std::string>& key_values);
void apply_override(ExperimentConfig& cfg, const std::string& key_value);

}  // namespace sshmc::io
