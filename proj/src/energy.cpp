#include "sshmc/energy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sshmc {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double sanitize(double logp) { return std::isnan(logp) ? -kInf : logp; }
}  // namespace

bool BlockState::finite() const {
  auto ok = [](const Vec& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  return ok(theta) && ok(r_theta) && ok(phi) && ok(r_phi);
}

std::vector<std::string> HierarchicalTarget::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(n_ + m_);
  for (std::size_t i = 0; i < n_; ++i)
    names.push_back("theta" + std::to_string(i + 1));
  for (std::size_t j = 0; j < m_; ++j)
    names.push_back("phi" + std::to_string(j + 1));
  return names;
}

double log_joint(const HierarchicalTarget& target, CSpan theta, CSpan phi) {
  if (theta.size() != target.theta_dim() || phi.size() != target.phi_dim())
    throw std::invalid_argument("log_joint: dimension mismatch");
  return sanitize(target.log_lik(theta) + target.log_prior_theta(theta, phi) +
                  target.log_hyperprior(phi));
}

double potential(const HierarchicalTarget& target, CSpan theta, CSpan phi) {
  return -log_joint(target, theta, phi);
}

double hamiltonian(const HierarchicalTarget& target, SemiSeparableMass& mass,
                   const BlockState& s) {
  const double u = potential(target, s.theta, s.phi);
  if (!std::isfinite(u)) return kInf;
  const MassOperator& mt = mass.mass_theta(s.phi);
  const MassOperator& mp = mass.mass_phi(s.theta);
  return u + mt.quad_inv(s.r_theta) + mp.quad_inv(s.r_phi) +
         0.5 * mt.log_det() + 0.5 * mp.log_det();
}

double hamiltonian(const SemiSeparableSystem& sys, const BlockState& s) {
  return hamiltonian(sys.target(), sys.mass(), s);
}

std::pair<double, double> h1_energy(const HierarchicalTarget& target,
                                    SemiSeparableMass& mass,
                                    const BlockState& s) {
  const double nll = -sanitize(target.log_lik(s.theta) +
                               target.log_prior_theta(s.theta, s.phi));
  const MassOperator& mp = mass.mass_phi(s.theta);
  const double u1 = nll + mp.quad_inv(s.r_phi) + 0.5 * mp.log_det();
  const double k1 = mass.mass_theta(s.phi).quad_inv(s.r_theta);
  return {u1, k1};
}

std::pair<double, double> h2_energy(const HierarchicalTarget& target,
                                    SemiSeparableMass& mass,
                                    const BlockState& s) {
  const double nlp = -sanitize(target.log_prior_theta(s.theta, s.phi) +
                               target.log_hyperprior(s.phi));
  const MassOperator& mt = mass.mass_theta(s.phi);
  const double u2 = nlp + mt.quad_inv(s.r_theta) + 0.5 * mt.log_det();
  const double k2 = mass.mass_phi(s.theta).quad_inv(s.r_phi);
  return {u2, k2};
}

void refresh_momenta(SemiSeparableMass& mass, CSpan theta, CSpan phi,
                     RngStream& rng, Span r_theta, Span r_phi) {
  mass.mass_theta(phi).draw(rng, r_theta);
  mass.mass_phi(theta).draw(rng, r_phi);
}

// ---------------------------------------------------------------------------
// Default block-potential assembly.
// ---------------------------------------------------------------------------

double SemiSeparableSystem::theta_potential(CSpan theta, CSpan phi,
                                            CSpan r_phi) const {
  const double lp = sanitize(target_->log_lik(theta) +
                             target_->log_prior_theta(theta, phi));
  if (!std::isfinite(lp)) return kInf;
  const MassOperator& mp = mass_->mass_phi(theta);
  return -lp + mp.quad_inv(r_phi) + 0.5 * mp.log_det();
}

void SemiSeparableSystem::theta_potential_grad(CSpan theta, CSpan phi,
                                               CSpan r_phi, Span out) const {
  target_->grad_theta(theta, phi, out);
  std::vector<double> aux(theta.size());
  mass_->grad_aux_phi(theta, r_phi, aux);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] + aux[i];
}

double SemiSeparableSystem::phi_potential(CSpan theta, CSpan phi,
                                          CSpan r_theta) const {
  const double lp = sanitize(target_->log_prior_theta(theta, phi) +
                             target_->log_hyperprior(phi));
  if (!std::isfinite(lp)) return kInf;
  const MassOperator& mt = mass_->mass_theta(phi);
  return -lp + mt.quad_inv(r_theta) + 0.5 * mt.log_det();
}

void SemiSeparableSystem::phi_potential_grad(CSpan theta, CSpan phi,
                                             CSpan r_theta, Span out) const {
  target_->grad_phi(theta, phi, out);
  std::vector<double> aux(phi.size());
  mass_->grad_aux_theta(phi, r_theta, aux);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -out[j] + aux[j];
}

std::unique_ptr<SemiSeparableSystem> SemiSeparableSystem::clone() const {
  auto mass_copy = mass_->clone();
  return std::make_unique<SemiSeparableSystem>(
      target_, std::shared_ptr<SemiSeparableMass>(std::move(mass_copy)));
}

}  // namespace sshmc
