#include "sshmc/models/funnel.hpp"

#include <cmath>

#include "sshmc/kernels.hpp"

namespace sshmc::models {

namespace {
const double kLog2Pi = std::log(2.0 * M_PI);

double sum_sq(CSpan v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}
}  // namespace

FunnelTarget::FunnelTarget(std::size_t n) : HierarchicalTarget(n, 1) {}

double FunnelTarget::log_lik(CSpan) const { return 0.0; }

double FunnelTarget::log_prior_theta(CSpan theta, CSpan phi) const {
  const double v = phi[0];
  const double n = static_cast<double>(theta_dim());
  const double quad = sum_sq(theta);
  // sum_i log N(x_i | 0, e^{-v})
  return -0.5 * n * kLog2Pi + 0.5 * n * v -
         (quad == 0.0 ? 0.0 : 0.5 * std::exp(v) * quad);
}

double FunnelTarget::log_hyperprior(CSpan phi) const {
  const double v = phi[0];
  return -0.5 * kLog2Pi - std::log(3.0) - v * v / 18.0;
}

void FunnelTarget::grad_theta(CSpan theta, CSpan phi, Span out) const {
  const double ev = std::exp(phi[0]);
  for (std::size_t i = 0; i < theta.size(); ++i) out[i] = -ev * theta[i];
}

void FunnelTarget::grad_phi(CSpan theta, CSpan phi, Span out) const {
  const double v = phi[0];
  const double n = static_cast<double>(theta_dim());
  const double quad = sum_sq(theta);
  out[0] = 0.5 * n - (quad == 0.0 ? 0.0 : 0.5 * std::exp(v) * quad) - v / 9.0;
}

std::vector<std::string> FunnelTarget::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(theta_dim() + 1);
  for (std::size_t i = 0; i < theta_dim(); ++i)
    names.push_back("x" + std::to_string(i + 1));
  names.push_back("v");
  return names;
}

// The v-block mass is the conditional precision n + 1/9 (likelihood-free
// Fisher curvature of the x-prior in v plus the hyperprior precision), the
// same recipe as the x-block mass e^v.
FunnelMass::FunnelMass(std::size_t n)
    : n_(n),
      mass_phi_(MassOperator::scalar(1, static_cast<double>(n) + 1.0 / 9.0)),
      mass_theta_cache_(MassOperator::scalar(n, 1.0)) {}

const MassOperator& FunnelMass::mass_theta(CSpan phi) {
  const double v = phi[0];
  if (!has_cached_ || v != cached_v_) {
    mass_theta_cache_ = MassOperator::scalar(n_, std::exp(v));
    cached_v_ = v;
    has_cached_ = true;
  }
  return mass_theta_cache_;
}

const MassOperator& FunnelMass::mass_phi(CSpan) { return mass_phi_; }

void FunnelMass::grad_aux_theta(CSpan phi, CSpan r_theta, Span out) {
  // d/dv [ e^{-v} |r|^2 / 2 + n v / 2 ]
  const double v = phi[0];
  out[0] = -0.5 * std::exp(-v) * kernels::dot(r_theta, r_theta) +
           0.5 * static_cast<double>(n_);
}

void FunnelMass::grad_aux_phi(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

std::unique_ptr<SemiSeparableMass> FunnelMass::clone() const {
  return std::make_unique<FunnelMass>(n_);
}

std::unique_ptr<SemiSeparableSystem> make_funnel(std::size_t n) {
  return std::make_unique<SemiSeparableSystem>(
      std::make_shared<FunnelTarget>(n), std::make_shared<FunnelMass>(n));
}

}  // namespace sshmc::models
