#pragma once

#include <memory>

#include "sshmc/target.hpp"

namespace sshmc::models {

// One data group: row-major feature matrix (rows x d) and +/-1 labels.
struct HblrGroup {
  std::size_t rows = 0;
  std::size_t d = 0;
  std::vector<double> x;  // rows * d
  std::vector<int> y;     // +1 / -1
};

struct HblrData {
  std::vector<HblrGroup> groups;
  std::vector<std::string> group_names;  // optional, for trace columns
  std::size_t total_rows() const;
};

// Hierarchical Bayesian logistic regression with a shared variance
// hyperparameter:
//   y_ij | w_i ~ logistic(y_ij w_i^T x_ij),  w_i ~ N(0, v I),
//   v ~ Exp(lambda), sampled as gamma = log v (log-Jacobian included).
// theta concatenates the group weights; phi = (gamma). The likelihood
// keeps all terms; the Gaussian prior keeps its (gamma-dependent)
// normalizer and drops only the 2*pi constant-free part (none).
//
// Conditional masses: per-group dense blocks X_i^T X_i / 4 + e^{-gamma} I
// (logistic curvature bound plus the prior precision); the gamma-block
// mass is the constant scalar 1.
class HblrTarget final : public HierarchicalTarget {
 public:
  HblrTarget(HblrData data, double lambda);

  double log_lik(CSpan theta) const override;
  double log_prior_theta(CSpan theta, CSpan phi) const override;
  double log_hyperprior(CSpan phi) const override;
  void grad_theta(CSpan theta, CSpan phi, Span out) const override;
  void grad_phi(CSpan theta, CSpan phi, Span out) const override;
  std::vector<std::string> parameter_names() const override;

  const HblrData& data() const { return data_; }
  double lambda() const { return lambda_; }

 private:
  HblrData data_;
  double lambda_;
};

class HblrMass final : public SemiSeparableMass {
 public:
  explicit HblrMass(std::shared_ptr<const HblrTarget> target);

  const MassOperator& mass_theta(CSpan phi) override;
  const MassOperator& mass_phi(CSpan theta) override;
  void grad_aux_theta(CSpan phi, CSpan r_theta, Span out) override;
  void grad_aux_phi(CSpan theta, CSpan r_phi, Span out) override;
  std::unique_ptr<SemiSeparableMass> clone() const override;

 private:
  const MassOperator& operator_at(double gamma);

  std::shared_ptr<const HblrTarget> target_;
  std::vector<std::vector<double>> xtx_quarter_;  // per-group X^T X / 4
  std::vector<std::size_t> block_dims_;
  MassOperator mass_phi_;
  // Two-slot cache so a rejected proposal's revert is free.
  struct Slot {
    bool used = false;
    double gamma = 0.0;
    MassOperator op = MassOperator::scalar(1, 1.0);
  };
  Slot slots_[2];
  int next_victim_ = 0;
};

std::unique_ptr<SemiSeparableSystem> make_hblr(HblrData data, double lambda);

// Small synthetic data set for tests: `sizes[i]` rows per group, d features
// drawn N(0,1), labels from a logistic model with per-group weights drawn
// N(0, 1). Deterministic in the seed.
HblrData gen_hblr_data(const std::vector<std::size_t>& sizes, std::size_t d,
                       std::uint64_t seed);

}  // namespace sshmc::models
