#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sshmc/integrate.hpp"
#include "sshmc/target.hpp"

namespace sshmc {

enum class SamplerKind { Hmc, HmcGibbs, Sshmc };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

struct SamplerConfig {
  SamplerKind kind = SamplerKind::Sshmc;
  // hmc: joint-space leapfrog; mass is diagonal with one scale per block
  // (identity by default).
  LeapfrogSpec hmc;
  double hmc_mass_theta = 1.0;
  double hmc_mass_phi = 1.0;
  // hmc-gibbs: one leapfrog spec per block.
  LeapfrogSpec gibbs_theta;
  LeapfrogSpec gibbs_phi;
  // sshmc
  AblaSpec abla;

  long n_iter = 1000;
  long burn_in = 0;
  long thin = 1;
  std::uint64_t seed = 1;

  void validate() const;
  std::size_t retained() const {
    return static_cast<std::size_t>((n_iter - burn_in) / thin);
  }
  bool operator==(const SamplerConfig&) const = default;
};

// Chain output. `samples` holds the retained positions row-major
// (retained x dim); the per-iteration records cover every iteration
// including burn-in. For hmc-gibbs `accepted[t]` is the fraction of blocks
// accepted that iteration (0, 0.5 or 1) and the h columns hold sums of the
// per-block restricted Hamiltonians.
struct ChainTrace {
  std::vector<std::string> column_names;
  std::size_t dim = 0;
  std::size_t retained = 0;
  std::vector<double> samples;
  std::vector<double> accepted;
  std::vector<double> h_before;
  std::vector<double> h_after;
  std::uint64_t gradient_evaluations = 0;
  double elapsed_seconds = 0.0;
  long n_iter = 0;
  long burn_in = 0;
  long thin = 0;

  CSpan row(std::size_t i) const {
    return CSpan(samples.data() + i * dim, dim);
  }
  double acceptance_rate() const;
  std::vector<double> column(std::size_t j) const;
};

// Expected gradient-evaluation count for a config (unfused half-kicks, so
// every leapfrog step evaluates its block gradient twice):
//   hmc:       2 * L * n_iter
//   hmc-gibbs: (2 * L_theta + 2 * L_phi) * n_iter
//   sshmc:     abla_steps * (2 * L_theta + 2 * L_phi) * n_iter
std::uint64_t expected_gradient_evaluations(const SamplerConfig& cfg);

// min(1, exp(-delta_h)) with +/-inf handled exactly.
double mh_accept_probability(double delta_h);
bool mh_accept(double delta_h, RngStream& rng);

struct StepResult {
  bool accepted = false;
  double h_before = 0.0;
  double h_after = 0.0;
};

struct GibbsStepResult {
  bool accepted_theta = false;
  bool accepted_phi = false;
  double dh_theta = 0.0;
  double dh_phi = 0.0;
  double h_before_sum = 0.0;
  double h_after_sum = 0.0;
};

// One SSHMC transition: refresh both momenta, run the ABLA proposal, and
// accept on the full joint Hamiltonian (both auxiliary potentials and both
// log-determinants). Divergence means rejection, never an exception.
StepResult sshmc_step(const SemiSeparableSystem& sys, BlockState& s,
                      const AblaSpec& spec, RngStream& rng,
                      Counters* counters = nullptr);

// Standard HMC on the joint (theta, phi) space with a constant diagonal
// mass (two per-block scales).
StepResult hmc_step(const SemiSeparableSystem& sys, BlockState& s,
                    const LeapfrogSpec& spec, double mass_theta_scale,
                    double mass_phi_scale, RngStream& rng,
                    Counters* counters = nullptr);

// HMC within Gibbs: block 1 updates theta against -log p(theta | y, phi),
// block 2 updates phi against -log p(phi | theta). Each block's MH test
// uses only that block's restricted Hamiltonian; the cross-block auxiliary
// potentials and log-determinant terms are deliberately left out (that
// omission is exactly what separates this baseline from SSHMC).
GibbsStepResult hmc_gibbs_step(const SemiSeparableSystem& sys, BlockState& s,
                               const LeapfrogSpec& theta_spec,
                               const LeapfrogSpec& phi_spec, RngStream& rng,
                               Counters* counters = nullptr);

// Run a full chain from `init`, discard burn_in, keep every thin-th state.
// Reproducible: a given (config, init) pair always yields the same trace.
ChainTrace run_chain(const SemiSeparableSystem& sys, const SamplerConfig& cfg,
                     const BlockState& init);

}  // namespace sshmc
