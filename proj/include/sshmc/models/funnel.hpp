#pragma once

#include <memory>

#include "sshmc/target.hpp"

namespace sshmc::models {

// Gaussian funnel: x_i ~ N(0, e^{-v}) for i = 1..n, v ~ N(0, 9).
// theta = x, phi = (v). There is no data term. Log densities keep every
// (x, v)-dependent normalizer and also keep the absolute 2*pi constants.
//
// Conditional masses: M_x(v) = e^v * I (scalar representation) and
// M_v = (n + 1/9)^{-1} (constant scalar).
class FunnelTarget final : public HierarchicalTarget {
 public:
  explicit FunnelTarget(std::size_t n);

  double log_lik(CSpan theta) const override;  // identically zero
  double log_prior_theta(CSpan theta, CSpan phi) const override;
  double log_hyperprior(CSpan phi) const override;
  void grad_theta(CSpan theta, CSpan phi, Span out) const override;
  void grad_phi(CSpan theta, CSpan phi, Span out) const override;
  std::vector<std::string> parameter_names() const override;
};

class FunnelMass final : public SemiSeparableMass {
 public:
  explicit FunnelMass(std::size_t n);

  const MassOperator& mass_theta(CSpan phi) override;
  const MassOperator& mass_phi(CSpan theta) override;
  void grad_aux_theta(CSpan phi, CSpan r_theta, Span out) override;
  void grad_aux_phi(CSpan theta, CSpan r_phi, Span out) override;
  std::unique_ptr<SemiSeparableMass> clone() const override;

 private:
  std::size_t n_;
  MassOperator mass_phi_;
  double cached_v_ = 0.0;
  bool has_cached_ = false;
  MassOperator mass_theta_cache_;
};

std::unique_ptr<SemiSeparableSystem> make_funnel(std::size_t n);

}  // namespace sshmc::models
