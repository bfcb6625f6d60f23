#pragma once

#include <cstdint>
#include <functional>

#include "sshmc/target.hpp"

namespace sshmc {

struct LeapfrogSpec {
  double epsilon = 0.1;
  int steps = 1;
  double divergence_cap = 1000.0;
  void validate() const;
  bool operator==(const LeapfrogSpec&) const = default;
};

struct AblaSpec {
  double eps_theta = 0.1;
  double eps_phi = 0.1;
  int steps_theta = 1;   // leapfrog steps on the theta block per composite
  int steps_phi = 1;     // leapfrog steps on the phi block per composite
  int abla_steps = 1;    // composite steps per proposal
  double divergence_cap = 1000.0;
  // Execution is always palindromic: each composite runs
  // ceil(steps_theta/2) theta steps, all phi steps, then the remaining
  // theta steps; with odd steps_theta the split mirrors on alternate
  // composites, which requires an even abla_steps. validate() enforces it.
  void validate() const;
  bool operator==(const AblaSpec&) const = default;
};

// Work counters threaded through the integrators. A "gradient evaluation"
// is one evaluation of a model gradient (joint or single block).
struct Counters {
  std::uint64_t gradient_evaluations = 0;
  std::uint64_t potential_evaluations = 0;
};

using GradFn = std::function<void(CSpan, Span)>;
using PotentialFn = std::function<double(CSpan)>;

// Explicit leapfrog on one block, in place: `steps` iterations of
// half-kick / drift / half-kick with the two half-kicks kept separate.
// After every position update the potential is re-evaluated; a non-finite
// value or |H - H0| above the cap throws TrajectoryDivergence.
// NonPositiveDefiniteError from the callbacks is converted to
// TrajectoryDivergence as well.
void leapfrog(const GradFn& grad_u, const PotentialFn& u,
              const MassOperator& mass, Vec& z, Vec& r,
              const LeapfrogSpec& spec, Counters* counters = nullptr);

// One SSHMC proposal: abla_steps palindromic composites alternating
// leapfrog on the theta block (potential U1, kinetic metric M_theta(phi))
// and the phi block (potential U2, kinetic metric M_phi(theta)). No
// momentum refresh happens inside the trajectory. Throws
// TrajectoryDivergence, which callers treat as a rejection.
BlockState abla_proposal(const SemiSeparableSystem& sys, const BlockState& s,
                         const AblaSpec& spec, Counters* counters = nullptr);

// Determinant of the central-finite-difference Jacobian of a phase-space
// map at s. Intended for small systems (total position dimension <= 8).
double jacobian_probe(const std::function<BlockState(const BlockState&)>& map,
                      const BlockState& s, double h);

// Central finite-difference gradient of f at x with per-coordinate relative
// step h (test oracle; also backs the gradcheck CLI subcommand).
Vec fd_gradient(const std::function<double(CSpan)>& f, CSpan x,
                double h = 1e-5);

}  // namespace sshmc
