#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "sshmc/mass.hpp"

namespace sshmc {

using Vec = std::vector<double>;
using CSpan = std::span<const double>;
using Span = std::span<double>;

// Phase-space point for the two-block system.
struct BlockState {
  Vec theta;
  Vec r_theta;
  Vec phi;
  Vec r_phi;

  static BlockState zeros(std::size_t n, std::size_t m) {
    return BlockState{Vec(n, 0.0), Vec(n, 0.0), Vec(m, 0.0), Vec(m, 0.0)};
  }
  bool finite() const;
};

// A hierarchical posterior split into its three log-density terms. Each term
// must honor its argument list exactly: log_lik sees only theta,
// log_hyperprior only phi, and every term coupling the two blocks lives in
// log_prior_theta. Terms may drop additive absolute constants (powers of
// 2*pi); every model documents which ones it drops. Out-of-support or
// overflowed evaluations return -inf, never NaN.
class HierarchicalTarget {
 public:
  virtual ~HierarchicalTarget() = default;

  std::size_t theta_dim() const { return n_; }
  std::size_t phi_dim() const { return m_; }

  virtual double log_lik(CSpan theta) const = 0;
  virtual double log_prior_theta(CSpan theta, CSpan phi) const = 0;
  virtual double log_hyperprior(CSpan phi) const = 0;
  // d/dtheta [log_lik + log_prior_theta]
  virtual void grad_theta(CSpan theta, CSpan phi, Span out) const = 0;
  // d/dphi [log_prior_theta + log_hyperprior]
  virtual void grad_phi(CSpan theta, CSpan phi, Span out) const = 0;

  virtual std::vector<std::string> parameter_names() const;

 protected:
  HierarchicalTarget(std::size_t n, std::size_t m) : n_(n), m_(m) {}

 private:
  std::size_t n_;
  std::size_t m_;
};

// The conditional mass pair: the theta-block operator depends only on phi
// and the phi-block operator only on theta. Implementations memoize the
// factorizations keyed by the conditioning vector; the caches are plain
// mutable state, so one instance must never be shared across chains running
// concurrently (clone() hands each chain its own).
class SemiSeparableMass {
 public:
  virtual ~SemiSeparableMass() = default;

  virtual const MassOperator& mass_theta(CSpan phi) = 0;
  virtual const MassOperator& mass_phi(CSpan theta) = 0;

  // d/dphi [ A(r_theta | phi) + log det M_theta(phi) / 2 ], length m.
  virtual void grad_aux_theta(CSpan phi, CSpan r_theta, Span out) = 0;
  // d/dtheta [ A(r_phi | theta) + log det M_phi(theta) / 2 ], length n.
  virtual void grad_aux_phi(CSpan theta, CSpan r_phi, Span out) = 0;

  virtual std::unique_ptr<SemiSeparableMass> clone() const = 0;
};

// Bundles a target with its mass pair and assembles block potentials for the
// integrators. The default assembly is straight from the parts; a model may
// override the phi-block pair when terms cancel algebraically (exponential-
// family normalizers against the mass log-determinant) so the cancelled
// quantities are never computed at all.
class SemiSeparableSystem {
 public:
  SemiSeparableSystem(std::shared_ptr<const HierarchicalTarget> target,
                      std::shared_ptr<SemiSeparableMass> mass)
      : target_(std::move(target)), mass_(std::move(mass)) {}
  virtual ~SemiSeparableSystem() = default;

  const HierarchicalTarget& target() const { return *target_; }
  SemiSeparableMass& mass() const { return *mass_; }
  std::size_t theta_dim() const { return target_->theta_dim(); }
  std::size_t phi_dim() const { return target_->phi_dim(); }

  // U1(theta) with (phi, r_phi) frozen:
  //   -log_lik - log_prior_theta + A(r_phi|theta) + log det M_phi(theta)/2
  virtual double theta_potential(CSpan theta, CSpan phi, CSpan r_phi) const;
  virtual void theta_potential_grad(CSpan theta, CSpan phi, CSpan r_phi,
                                    Span out) const;

  // U2(phi) with (theta, r_theta) frozen:
  //   -log_prior_theta - log_hyperprior + A(r_theta|phi)
  //   + log det M_theta(phi)/2
  virtual double phi_potential(CSpan theta, CSpan phi, CSpan r_theta) const;
  virtual void phi_potential_grad(CSpan theta, CSpan phi, CSpan r_theta,
                                  Span out) const;

  // Fresh copy with independent mass caches for another chain.
  virtual std::unique_ptr<SemiSeparableSystem> clone() const;

 private:
  std::shared_ptr<const HierarchicalTarget> target_;
  std::shared_ptr<SemiSeparableMass> mass_;
};

}  // namespace sshmc
