#include "sshmc/sample.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sshmc/energy.hpp"
#include "sshmc/error.hpp"

namespace sshmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::Hmc:
      return "hmc";
    case SamplerKind::HmcGibbs:
      return "hmc-gibbs";
    case SamplerKind::Sshmc:
      return "sshmc";
  }
  return "?";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "hmc") return SamplerKind::Hmc;
  if (name == "hmc-gibbs") return SamplerKind::HmcGibbs;
  if (name == "sshmc") return SamplerKind::Sshmc;
  throw ConfigError("unknown sampler kind: " + name);
}

void SamplerConfig::validate() const {
  if (n_iter < 1) throw ConfigError("sampler: n_iter must be >= 1");
  if (burn_in < 0 || burn_in >= n_iter)
    throw ConfigError("sampler: burn_in must be in [0, n_iter)");
  if (thin < 1) throw ConfigError("sampler: thin must be >= 1");
  switch (kind) {
    case SamplerKind::Hmc:
      hmc.validate();
      if (!(hmc_mass_theta > 0.0) || !(hmc_mass_phi > 0.0))
        throw ConfigError("sampler: hmc mass scales must be > 0");
      break;
    case SamplerKind::HmcGibbs:
      gibbs_theta.validate();
      gibbs_phi.validate();
      break;
    case SamplerKind::Sshmc:
      abla.validate();
      break;
  }
}

double ChainTrace::acceptance_rate() const {
  if (accepted.empty()) return 0.0;
  double acc = 0.0;
  for (double a : accepted) acc += a;
  return acc / static_cast<double>(accepted.size());
}

std::vector<double> ChainTrace::column(std::size_t j) const {
  std::vector<double> out(retained);
  for (std::size_t i = 0; i < retained; ++i) out[i] = samples[i * dim + j];
  return out;
}

std::uint64_t expected_gradient_evaluations(const SamplerConfig& cfg) {
  const auto iters = static_cast<std::uint64_t>(cfg.n_iter);
  switch (cfg.kind) {
    case SamplerKind::Hmc:
      return 2ull * cfg.hmc.steps * iters;
    case SamplerKind::HmcGibbs:
      return (2ull * cfg.gibbs_theta.steps + 2ull * cfg.gibbs_phi.steps) *
             iters;
    case SamplerKind::Sshmc:
      return static_cast<std::uint64_t>(cfg.abla.abla_steps) *
             (2ull * cfg.abla.steps_theta + 2ull * cfg.abla.steps_phi) * iters;
  }
  return 0;
}

double mh_accept_probability(double delta_h) {
  if (std::isnan(delta_h) || delta_h == kInf) return 0.0;
  if (delta_h <= 0.0) return 1.0;
  return std::exp(-delta_h);
}

bool mh_accept(double delta_h, RngStream& rng) {
  // uniform() is in [0, 1), so p == 1 always accepts and p == 0 never does.
  return rng.uniform() < mh_accept_probability(delta_h);
}

StepResult sshmc_step(const SemiSeparableSystem& sys, BlockState& s,
                      const AblaSpec& spec, RngStream& rng,
                      Counters* counters) {
  refresh_momenta(sys.mass(), s.theta, s.phi, rng, s.r_theta, s.r_phi);
  StepResult res;
  res.h_before = hamiltonian(sys, s);
  try {
    BlockState prop = abla_proposal(sys, s, spec, counters);
    res.h_after = hamiltonian(sys, prop);
    if (mh_accept(res.h_after - res.h_before, rng)) {
      res.accepted = true;
      s = std::move(prop);
    }
  } catch (const TrajectoryDivergence&) {
    res.h_after = kInf;
  }
  return res;
}

StepResult hmc_step(const SemiSeparableSystem& sys, BlockState& s,
                    const LeapfrogSpec& spec, double mass_theta_scale,
                    double mass_phi_scale, RngStream& rng,
                    Counters* counters) {
  const std::size_t n = sys.theta_dim();
  const std::size_t m = sys.phi_dim();
  std::vector<double> diag(n + m);
  std::fill(diag.begin(), diag.begin() + n, mass_theta_scale);
  std::fill(diag.begin() + n, diag.end(), mass_phi_scale);
  const MassOperator mass = MassOperator::diagonal(std::move(diag));

  Vec z(n + m), r(n + m);
  std::copy(s.theta.begin(), s.theta.end(), z.begin());
  std::copy(s.phi.begin(), s.phi.end(), z.begin() + n);
  mass.draw(rng, r);

  const HierarchicalTarget& target = sys.target();
  auto split_u = [&](CSpan zz) {
    return potential(target, zz.subspan(0, n), zz.subspan(n, m));
  };
  auto split_grad = [&](CSpan zz, Span out) {
    target.grad_theta(zz.subspan(0, n), zz.subspan(n, m), out.subspan(0, n));
    target.grad_phi(zz.subspan(0, n), zz.subspan(n, m), out.subspan(n, m));
    for (std::size_t i = 0; i < n + m; ++i) out[i] = -out[i];
  };

  StepResult res;
  res.h_before = split_u(z) + mass.quad_inv(r) + 0.5 * mass.log_det();
  try {
    Vec z_new = z, r_new = r;
    // A joint gradient costs one model sweep; count it once, not per block.
    Counters local;
    leapfrog(split_grad, split_u, mass, z_new, r_new, spec, &local);
    if (counters) {
      counters->gradient_evaluations += local.gradient_evaluations;
      counters->potential_evaluations += local.potential_evaluations;
    }
    res.h_after = split_u(z_new) + mass.quad_inv(r_new) + 0.5 * mass.log_det();
    if (mh_accept(res.h_after - res.h_before, rng)) {
      res.accepted = true;
      std::copy(z_new.begin(), z_new.begin() + n, s.theta.begin());
      std::copy(z_new.begin() + n, z_new.end(), s.phi.begin());
    }
  } catch (const TrajectoryDivergence&) {
    res.h_after = kInf;
  }
  return res;
}

GibbsStepResult hmc_gibbs_step(const SemiSeparableSystem& sys, BlockState& s,
                               const LeapfrogSpec& theta_spec,
                               const LeapfrogSpec& phi_spec, RngStream& rng,
                               Counters* counters) {
  const HierarchicalTarget& target = sys.target();
  GibbsStepResult res;

  // Block 1: theta | phi. Restricted Hamiltonian: conditional potential
  // plus this block's kinetic term only.
  {
    const MassOperator& mt = sys.mass().mass_theta(s.phi);
    mt.draw(rng, s.r_theta);
    auto u = [&](CSpan th) {
      const double lp =
          target.log_lik(th) + target.log_prior_theta(th, s.phi);
      return std::isnan(lp) ? kInf : -lp;
    };
    auto g = [&](CSpan th, Span out) {
      target.grad_theta(th, s.phi, out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i];
    };
    const double h0 = u(s.theta) + mt.quad_inv(s.r_theta);
    double h1 = kInf;
    try {
      Vec th = s.theta, r = s.r_theta;
      leapfrog(g, u, mt, th, r, theta_spec, counters);
      h1 = u(th) + mt.quad_inv(r);
      if (mh_accept(h1 - h0, rng)) {
        res.accepted_theta = true;
        s.theta = std::move(th);
      }
    } catch (const TrajectoryDivergence&) {
    }
    res.dh_theta = h1 - h0;
    res.h_before_sum += h0;
    res.h_after_sum += h1;
  }

  // Block 2: phi | theta.
  {
    const MassOperator& mp = sys.mass().mass_phi(s.theta);
    mp.draw(rng, s.r_phi);
    auto u = [&](CSpan ph) {
      const double lp =
          target.log_prior_theta(s.theta, ph) + target.log_hyperprior(ph);
      return std::isnan(lp) ? kInf : -lp;
    };
    auto g = [&](CSpan ph, Span out) {
      target.grad_phi(s.theta, ph, out);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i];
    };
    const double h0 = u(s.phi) + mp.quad_inv(s.r_phi);
    double h1 = kInf;
    try {
      Vec ph = s.phi, r = s.r_phi;
      leapfrog(g, u, mp, ph, r, phi_spec, counters);
      h1 = u(ph) + mp.quad_inv(r);
      if (mh_accept(h1 - h0, rng)) {
        res.accepted_phi = true;
        s.phi = std::move(ph);
      }
    } catch (const TrajectoryDivergence&) {
    }
    res.dh_phi = h1 - h0;
    res.h_before_sum += h0;
    res.h_after_sum += h1;
  }
  return res;
}

ChainTrace run_chain(const SemiSeparableSystem& sys, const SamplerConfig& cfg,
                     const BlockState& init) {
  cfg.validate();
  const std::size_t n = sys.theta_dim();
  const std::size_t m = sys.phi_dim();
  if (init.theta.size() != n || init.phi.size() != m)
    throw ConfigError("run_chain: initial state dimension mismatch");

  ChainTrace trace;
  trace.column_names = sys.target().parameter_names();
  trace.dim = n + m;
  trace.n_iter = cfg.n_iter;
  trace.burn_in = cfg.burn_in;
  trace.thin = cfg.thin;
  trace.retained = cfg.retained();
  trace.samples.reserve(trace.retained * trace.dim);
  trace.accepted.reserve(cfg.n_iter);
  trace.h_before.reserve(cfg.n_iter);
  trace.h_after.reserve(cfg.n_iter);

  RngStream rng(cfg.seed);
  Counters counters;
  BlockState s = init;

  const auto t0 = std::chrono::steady_clock::now();
  for (long iter = 1; iter <= cfg.n_iter; ++iter) {
    switch (cfg.kind) {
      case SamplerKind::Sshmc: {
        const StepResult r = sshmc_step(sys, s, cfg.abla, rng, &counters);
        trace.accepted.push_back(r.accepted ? 1.0 : 0.0);
        trace.h_before.push_back(r.h_before);
        trace.h_after.push_back(r.h_after);
        break;
      }
      case SamplerKind::Hmc: {
        const StepResult r = hmc_step(sys, s, cfg.hmc, cfg.hmc_mass_theta,
                                      cfg.hmc_mass_phi, rng, &counters);
        trace.accepted.push_back(r.accepted ? 1.0 : 0.0);
        trace.h_before.push_back(r.h_before);
        trace.h_after.push_back(r.h_after);
        break;
      }
      case SamplerKind::HmcGibbs: {
        const GibbsStepResult r =
            hmc_gibbs_step(sys, s, cfg.gibbs_theta, cfg.gibbs_phi, rng,
                           &counters);
        trace.accepted.push_back(
            0.5 * (static_cast<double>(r.accepted_theta) +
                   static_cast<double>(r.accepted_phi)));
        trace.h_before.push_back(r.h_before_sum);
        trace.h_after.push_back(r.h_after_sum);
        break;
      }
    }
    if (iter > cfg.burn_in && (iter - cfg.burn_in) % cfg.thin == 0) {
      trace.samples.insert(trace.samples.end(), s.theta.begin(),
                           s.theta.end());
      trace.samples.insert(trace.samples.end(), s.phi.begin(), s.phi.end());
    }
  }
  const auto t1 = std::chrono::steady_clock::now();
  trace.elapsed_seconds = std::chrono::duration<double>(t1 - t0).count();
  trace.gradient_evaluations = counters.gradient_evaluations;
  return trace;
}

}  // namespace sshmc
