#pragma once

#include <memory>
#include <optional>
#include <string>

#include "sshmc/diagnostics.hpp"
#include "sshmc/io/config.hpp"
#include "sshmc/target.hpp"

namespace sshmc::io {

struct BuiltExperiment {
  std::unique_ptr<SemiSeparableSystem> system;
  BlockState init;
  std::vector<MomentTruth> truths;              // known moments, may be empty
  std::vector<std::pair<std::string, double>> true_values;  // for summaries
};

// Construct the model, mass, initial state and known truths for a config,
// loading or generating data as requested.
BuiltExperiment build_experiment(const ExperimentConfig& cfg);

struct ExperimentResult {
  ChainTrace trace;
  DiagnosticsReport report;
  std::vector<std::string> written_files;
};

// Run the chain and write the requested artifacts into out_dir. Files are
// written atomically; on error nothing is left behind. Every output begins
// with '# config_hash = ...' and '# seed = ...' comments plus the full
// canonical config, so a run is reproducible from any one of its outputs.
ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir);

// Finite-difference audit of a built model: checks grad_theta, grad_phi,
// grad_aux_theta and grad_aux_phi at `points` random interior points.
// Returns the worst relative error seen.
struct GradCheckReport {
  double worst_rel_err = 0.0;
  std::string worst_site;
  bool passed(double tol = 1e-5) const { return worst_rel_err < tol; }
};
GradCheckReport gradcheck(const SemiSeparableSystem& sys, int points,
                          std::uint64_t seed);

}  // namespace sshmc::io
