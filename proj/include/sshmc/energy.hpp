#pragma once

#include <utility>

#include "sshmc/target.hpp"

namespace sshmc {

// Unnormalized log posterior: log_lik + log_prior_theta + log_hyperprior.
// Returns -inf outside the support.
double log_joint(const HierarchicalTarget& target, CSpan theta, CSpan phi);

// U(theta, phi) = -log_joint; +inf outside the support.
double potential(const HierarchicalTarget& target, CSpan theta, CSpan phi);

// Full joint Hamiltonian:
//   U + A(r_theta|phi) + A(r_phi|theta)
//     + log det M_theta(phi)/2 + log det M_phi(theta)/2
// where A(r|.) = r^T M^{-1} r / 2. The (n+m)/2 log(2*pi) momentum constant is
// dropped everywhere, so Hamiltonian differences are exact.
double hamiltonian(const HierarchicalTarget& target, SemiSeparableMass& mass,
                   const BlockState& s);
double hamiltonian(const SemiSeparableSystem& sys, const BlockState& s);

// Separable sub-Hamiltonian for the theta block: returns (U1, K1) with
//   U1 = -log_lik - log_prior_theta + A(r_phi|theta) + log det M_phi(theta)/2
//   K1 = A(r_theta|phi)
// H - (U1 + K1) depends only on (phi, r_phi).
std::pair<double, double> h1_energy(const HierarchicalTarget& target,
                                    SemiSeparableMass& mass,
                                    const BlockState& s);

// Symmetric pair for the phi block: returns (U2, K2) with
//   U2 = -log_prior_theta - log_hyperprior + A(r_theta|phi)
//        + log det M_theta(phi)/2
//   K2 = A(r_phi|theta)
// H - (U2 + K2) depends only on (theta, r_theta).
std::pair<double, double> h2_energy(const HierarchicalTarget& target,
                                    SemiSeparableMass& mass,
                                    const BlockState& s);

// r_theta ~ N(0, M_theta(phi)), then r_phi ~ N(0, M_phi(theta)), in that
// order, so a fixed seed reproduces the draws exactly.
void refresh_momenta(SemiSeparableMass& mass, CSpan theta, CSpan phi,
                     RngStream& rng, Span r_theta, Span r_phi);

}  // namespace sshmc
