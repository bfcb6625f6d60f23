#pragma once

#include <memory>

#include "sshmc/target.hpp"

namespace sshmc::models {

// Two-level conjugate Gaussian toy:
//   y_i | theta_i ~ N(theta_i, s_y^2),  theta_i | mu ~ N(mu, s_t^2),
//   mu ~ N(0, s_mu^2),  i = 1..n,  phi = (mu).
// Everything is jointly Gaussian, so posterior moments are available in
// closed form; the sampler exactness tests are built around that.
//
// Masses: M_theta = (1/s_y^2 + 1/s_t^2) I and M_mu = n/s_t^2 + 1/s_mu^2,
// both constant (the exact conditional precisions).
struct Gauss2Spec {
  std::vector<double> y;
  double s_y = 1.0;
  double s_t = 1.0;
  double s_mu = 2.0;
};

class Gauss2Target final : public HierarchicalTarget {
 public:
  explicit Gauss2Target(Gauss2Spec spec);

  double log_lik(CSpan theta) const override;
  double log_prior_theta(CSpan theta, CSpan phi) const override;
  double log_hyperprior(CSpan phi) const override;
  void grad_theta(CSpan theta, CSpan phi, Span out) const override;
  void grad_phi(CSpan theta, CSpan phi, Span out) const override;
  std::vector<std::string> parameter_names() const override;

  const Gauss2Spec& spec() const { return spec_; }

 private:
  Gauss2Spec spec_;
};

class Gauss2Mass final : public SemiSeparableMass {
 public:
  explicit Gauss2Mass(const Gauss2Spec& spec);

  const MassOperator& mass_theta(CSpan phi) override;
  const MassOperator& mass_phi(CSpan theta) override;
  void grad_aux_theta(CSpan, CSpan, Span out) override;
  void grad_aux_phi(CSpan, CSpan, Span out) override;
  std::unique_ptr<SemiSeparableMass> clone() const override;

 private:
  Gauss2Spec spec_;
  MassOperator mass_theta_;
  MassOperator mass_phi_;
};

std::unique_ptr<SemiSeparableSystem> make_gauss2(Gauss2Spec spec);

}  // namespace sshmc::models
