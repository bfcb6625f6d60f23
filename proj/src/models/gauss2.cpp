#include "sshmc/models/gauss2.hpp"

#include <cmath>

namespace sshmc::models {

namespace {
const double kLog2Pi = std::log(2.0 * M_PI);
}

Gauss2Target::Gauss2Target(Gauss2Spec spec)
    : HierarchicalTarget(spec.y.size(), 1), spec_(std::move(spec)) {}

double Gauss2Target::log_lik(CSpan theta) const {
  const double inv = 1.0 / (spec_.s_y * spec_.s_y);
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double d = spec_.y[i] - theta[i];
    acc += -0.5 * kLog2Pi - std::log(spec_.s_y) - 0.5 * d * d * inv;
  }
  return acc;
}

double Gauss2Target::log_prior_theta(CSpan theta, CSpan phi) const {
  const double inv = 1.0 / (spec_.s_t * spec_.s_t);
  const double mu = phi[0];
  double acc = 0.0;
  for (double t : theta) {
    const double d = t - mu;
    acc += -0.5 * kLog2Pi - std::log(spec_.s_t) - 0.5 * d * d * inv;
  }
  return acc;
}

double Gauss2Target::log_hyperprior(CSpan phi) const {
  const double mu = phi[0];
  return -0.5 * kLog2Pi - std::log(spec_.s_mu) -
         0.5 * mu * mu / (spec_.s_mu * spec_.s_mu);
}

void Gauss2Target::grad_theta(CSpan theta, CSpan phi, Span out) const {
  const double inv_y = 1.0 / (spec_.s_y * spec_.s_y);
  const double inv_t = 1.0 / (spec_.s_t * spec_.s_t);
  const double mu = phi[0];
  for (std::size_t i = 0; i < theta.size(); ++i)
    out[i] = (spec_.y[i] - theta[i]) * inv_y - (theta[i] - mu) * inv_t;
}

void Gauss2Target::grad_phi(CSpan theta, CSpan phi, Span out) const {
  const double inv_t = 1.0 / (spec_.s_t * spec_.s_t);
  const double mu = phi[0];
  double acc = 0.0;
  for (double t : theta) acc += (t - mu) * inv_t;
  out[0] = acc - mu / (spec_.s_mu * spec_.s_mu);
}

std::vector<std::string> Gauss2Target::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < theta_dim(); ++i)
    names.push_back("theta" + std::to_string(i + 1));
  names.push_back("mu");
  return names;
}

Gauss2Mass::Gauss2Mass(const Gauss2Spec& spec)
    : spec_(spec),
      mass_theta_(MassOperator::scalar(
          spec.y.size(),
          1.0 / (spec.s_y * spec.s_y) + 1.0 / (spec.s_t * spec.s_t))),
      mass_phi_(MassOperator::scalar(
          1, static_cast<double>(spec.y.size()) / (spec.s_t * spec.s_t) +
                 1.0 / (spec.s_mu * spec.s_mu))) {}

const MassOperator& Gauss2Mass::mass_theta(CSpan) { return mass_theta_; }
const MassOperator& Gauss2Mass::mass_phi(CSpan) { return mass_phi_; }

void Gauss2Mass::grad_aux_theta(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

void Gauss2Mass::grad_aux_phi(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

std::unique_ptr<SemiSeparableMass> Gauss2Mass::clone() const {
  return std::make_unique<Gauss2Mass>(spec_);
}

std::unique_ptr<SemiSeparableSystem> make_gauss2(Gauss2Spec spec) {
  auto target = std::make_shared<Gauss2Target>(std::move(spec));
  auto mass = std::make_shared<Gauss2Mass>(target->spec());
  return std::make_unique<SemiSeparableSystem>(target, mass);
}

}  // namespace sshmc::models
