#pragma once

#include <limits>
#include <memory>

#include "sshmc/target.hpp"

namespace sshmc::models {

// Log-Gaussian Cox process on a d x d grid:
//   y_ij ~ Poisson(m exp(x_ij)),  m = 1/d^2,
//   x ~ N(mu 1, Sigma),  Sigma_ab = sigma^2 exp(-dist(a, b) / (beta d)),
// with dist the Euclidean grid distance. Hyperparameters are sampled as
// phi = (log sigma, log beta) with independent N(0, prior_sd^2) priors.
// theta = vec(x). The likelihood drops the constant -log(y!) terms; the GP
// prior keeps everything including its 2*pi constant.
//
// Conditional masses: M_x(phi) = Sigma(phi)^{-1} held in inverse form (one
// factorization of Sigma per distinct phi, cached), M_phi = I.
//
// The phi-block potential U2 contains the GP normalizer +log det Sigma / 2
// and the mass term  +log det M_x / 2 = -log det Sigma / 2. LgcppSystem
// overrides the phi-block assembly so the pair cancels symbolically: that
// code path never computes a log determinant or a trace at all (the
// MassOperator::log_det_calls counter plus the kernel's query counter make
// this checkable).
struct LgcppConfig {
  std::size_t d = 16;
  double mu = 0.0;
  double prior_sd = 1.5;
  // Hyperprior centers for (log sigma, log beta). A NaN log-beta center
  // resolves to log(1/d), i.e. a one-cell correlation range: centering the
  // prior on multi-grid-length ranges puts its bulk where the covariance
  // is numerically singular.
  double prior_mean_log_sigma = 0.0;
  double prior_mean_log_beta = std::numeric_limits<double>::quiet_NaN();

  double resolved_prior_mean_log_beta() const;
};

// Shared factorization cache: covariance, Cholesky factor, log det and the
// inverse-form mass operator per distinct (log sigma, log beta), two slots.
// One instance per chain; the grid distance table is shared and immutable.
class LgcppKernel {
 public:
  explicit LgcppKernel(std::size_t d);
  LgcppKernel(std::size_t d, std::shared_ptr<const Vec> dist);

  struct Entry {
    bool used = false;
    double log_sigma = 0.0;
    double log_beta = 0.0;
    Vec cov;            // n x n
    Vec chol;           // upper factor of cov
    double log_det = 0.0;
    MassOperator op = MassOperator::scalar(1, 1.0);  // Sigma^{-1}, inverse form
    Vec inv;            // lazily filled full inverse (gradcheck / Gibbs path)
  };

  Entry& at(double log_sigma, double log_beta);
  const Vec& ensure_inverse(Entry& e);

  std::size_t n() const { return n_; }
  std::size_t d() const { return d_; }
  const Vec& dist() const { return *dist_; }
  std::shared_ptr<const Vec> dist_ptr() const { return dist_; }

  // Incremented whenever a caller reads a cached log det from this kernel.
  std::uint64_t log_det_queries = 0;
  // Number of covariance factorizations performed (cache misses).
  std::uint64_t factorizations = 0;

 private:
  std::size_t d_;
  std::size_t n_;
  std::shared_ptr<const Vec> dist_;
  Entry slots_[2];
  int next_victim_ = 0;
};

class LgcppTarget final : public HierarchicalTarget {
 public:
  LgcppTarget(LgcppConfig cfg, Vec counts, std::shared_ptr<LgcppKernel> kernel);

  double log_lik(CSpan theta) const override;
  double log_prior_theta(CSpan theta, CSpan phi) const override;
  double log_hyperprior(CSpan phi) const override;
  void grad_theta(CSpan theta, CSpan phi, Span out) const override;
  void grad_phi(CSpan theta, CSpan phi, Span out) const override;
  std::vector<std::string> parameter_names() const override;

  const LgcppConfig& config() const { return cfg_; }
  const Vec& counts() const { return counts_; }
  LgcppKernel& kernel() const { return *kernel_; }

 private:
  LgcppConfig cfg_;
  Vec counts_;
  double cell_weight_;  // m = 1/d^2
  std::shared_ptr<LgcppKernel> kernel_;
};

class LgcppMass final : public SemiSeparableMass {
 public:
  LgcppMass(std::shared_ptr<LgcppKernel> kernel);

  const MassOperator& mass_theta(CSpan phi) override;
  const MassOperator& mass_phi(CSpan theta) override;
  void grad_aux_theta(CSpan phi, CSpan r_theta, Span out) override;
  void grad_aux_phi(CSpan theta, CSpan r_phi, Span out) override;
  std::unique_ptr<SemiSeparableMass> clone() const override;

 private:
  std::shared_ptr<LgcppKernel> kernel_;
  MassOperator mass_phi_;
};

// System with the symbolically cancelled phi-block potential and gradient.
class LgcppSystem final : public SemiSeparableSystem {
 public:
  LgcppSystem(std::shared_ptr<const LgcppTarget> target,
              std::shared_ptr<LgcppMass> mass);

  double phi_potential(CSpan theta, CSpan phi, CSpan r_theta) const override;
  void phi_potential_grad(CSpan theta, CSpan phi, CSpan r_theta,
                          Span out) const override;
  std::unique_ptr<SemiSeparableSystem> clone() const override;

  const LgcppTarget& lgcpp_target() const { return *target_; }

 private:
  std::shared_ptr<const LgcppTarget> target_;
};

std::unique_ptr<LgcppSystem> make_lgcpp(const LgcppConfig& cfg, Vec counts);

struct LgcppSimulation {
  Vec counts;
  Vec x_true;
};

// Draw a latent field from the GP prior and Poisson counts from it.
// Deterministic in the seed.
LgcppSimulation gen_lgcpp_data(std::size_t d, double sigma, double beta,
                               double mu, std::uint64_t seed);

}  // namespace sshmc::models
