#pragma once

#include <memory>

#include "sshmc/target.hpp"

namespace sshmc::models {

// Stochastic volatility:
//   y_t = eps_t * beta * exp(x_t / 2),        eps_t ~ N(0, 1)
//   x_1 ~ N(0, sigma^2 / (1 - phi^2)),        x_{t+1} = phi x_t + eta_{t+1},
//   eta ~ N(0, sigma^2)
// Priors: p(beta) ~ 1/beta, sigma^2 ~ Inv-chi^2(nu, tau2),
// (phi+1)/2 ~ Beta(a, b).
//
// The chain runs in transformed coordinates phi_vec = (alpha, s, t) with
//   alpha = log beta, s = log sigma^2, t = atanh(phi),
// log-Jacobians included (so the alpha prior is exactly flat). theta = x.
// The observation density depends on both x and alpha, so it lives in
// log_prior_theta; log_lik is identically zero. All 2*pi constants and the
// full Inv-chi^2 / Beta normalizers are kept.
//
// Conditional masses: M_x(phi_vec) is the tridiagonal I/2 + Q(phi, sigma)
// with Q the stationary AR(1) precision; M_phi is the 3x3 identity.
struct SvPriors {
  double nu = 10.0;
  double tau2 = 0.05;
  double beta_a = 20.0;
  double beta_b = 1.5;
};

struct SvHypers {
  double beta = 0.65;
  double sigma = 0.15;
  double phi_ar = 0.98;

  Vec transformed() const;                 // (alpha, s, t)
  static SvHypers from_transformed(CSpan phi_vec);
};

class SvTarget final : public HierarchicalTarget {
 public:
  SvTarget(Vec y, SvPriors priors);

  double log_lik(CSpan theta) const override;  // identically zero
  double log_prior_theta(CSpan theta, CSpan phi) const override;
  double log_hyperprior(CSpan phi) const override;
  void grad_theta(CSpan theta, CSpan phi, Span out) const override;
  void grad_phi(CSpan theta, CSpan phi, Span out) const override;
  std::vector<std::string> parameter_names() const override;

  const Vec& y() const { return y_; }
  const SvPriors& priors() const { return priors_; }

 private:
  Vec y_;
  SvPriors priors_;
};

// Per-hyperparameter prior slices in transformed coordinates, exposed so
// the quadrature tests can check the log-Jacobians term by term.
double sv_log_prior_sigma2_transformed(double s, const SvPriors& priors);
double sv_log_prior_phi_transformed(double t, const SvPriors& priors);
double sv_log_prior_sigma2(double sigma2, const SvPriors& priors);
double sv_log_prior_phi(double phi_ar, const SvPriors& priors);

class SvMass final : public SemiSeparableMass {
 public:
  SvMass(std::size_t T);

  const MassOperator& mass_theta(CSpan phi) override;
  const MassOperator& mass_phi(CSpan theta) override;
  void grad_aux_theta(CSpan phi, CSpan r_theta, Span out) override;
  void grad_aux_phi(CSpan theta, CSpan r_phi, Span out) override;
  std::unique_ptr<SemiSeparableMass> clone() const override;

 private:
  struct Entry {
    bool used = false;
    double s = 0.0, t = 0.0;
    Vec diag, off;     // raw tridiagonal of M
    Vec d, l;          // its LDL^T
    MassOperator op = MassOperator::scalar(1, 1.0);
  };
  Entry& entry_at(CSpan phi);

  std::size_t T_;
  MassOperator mass_phi_;
  Entry slots_[2];
  int next_victim_ = 0;
};

std::unique_ptr<SemiSeparableSystem> make_sv(Vec y, SvPriors priors);

struct SvSimulation {
  Vec y;
  Vec x_true;
};

// Simulate T observations from the generating process (stationary AR(1)
// start). Deterministic in the seed.
SvSimulation gen_sv_data(std::size_t T, const SvHypers& hypers,
                         std::uint64_t seed);

}  // namespace sshmc::models
