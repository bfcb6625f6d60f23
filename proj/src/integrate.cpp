#include "sshmc/integrate.hpp"

#include <cmath>
#include <stdexcept>

#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"

namespace sshmc {

void LeapfrogSpec::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("leapfrog: epsilon must be > 0");
  if (steps < 1) throw ConfigError("leapfrog: steps must be >= 1");
  if (!(divergence_cap > 0.0))
    throw ConfigError("leapfrog: divergence cap must be > 0");
}

void AblaSpec::validate() const {
  if (!(eps_theta > 0.0) || !(eps_phi > 0.0))
    throw ConfigError("abla: step sizes must be > 0");
  if (steps_theta < 1 || steps_phi < 1 || abla_steps < 1)
    throw ConfigError("abla: step counts must be >= 1");
  if (!(divergence_cap > 0.0))
    throw ConfigError("abla: divergence cap must be > 0");
  if (steps_theta % 2 == 1 && abla_steps % 2 == 1)
    throw ConfigError(
        "abla: odd steps_theta needs an even abla_steps so the mirrored "
        "composites pair up");
}

namespace {

bool all_finite(CSpan v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

// Shared body. The potential/gradient callbacks may throw
// NonPositiveDefiniteError for unfactorizable points; that is a divergence.
void leapfrog_impl(const GradFn& grad_u, const PotentialFn& u,
                   const MassOperator& mass, Vec& z, Vec& r, double epsilon,
                   int steps, double cap, Counters* counters) {
  const std::size_t dim = z.size();
  Vec grad(dim), vel(dim);
  auto eval_u = [&](CSpan zz) {
    if (counters) ++counters->potential_evaluations;
    return u(zz);
  };
  auto eval_grad = [&](CSpan zz, Span out) {
    if (counters) ++counters->gradient_evaluations;
    grad_u(zz, out);
  };

  try {
    double h0 = eval_u(z) + mass.quad_inv(r);
    if (!std::isfinite(h0))
      throw TrajectoryDivergence("leapfrog started outside support");
    for (int step = 0; step < steps; ++step) {
      eval_grad(z, grad);
      const double half = 0.5 * epsilon;
      for (std::size_t i = 0; i < dim; ++i) r[i] -= half * grad[i];
      mass.solve(r, vel);
      for (std::size_t i = 0; i < dim; ++i) z[i] += epsilon * vel[i];
      if (!all_finite(z))
        throw TrajectoryDivergence("position became non-finite");
      const double u_new = eval_u(z);
      if (!std::isfinite(u_new))
        throw TrajectoryDivergence("left the support");
      eval_grad(z, grad);
      for (std::size_t i = 0; i < dim; ++i) r[i] -= half * grad[i];
      if (!all_finite(r))
        throw TrajectoryDivergence("momentum became non-finite");
      const double h = u_new + mass.quad_inv(r);
      if (!std::isfinite(h) || std::abs(h - h0) > cap)
        throw TrajectoryDivergence("energy error exceeded the cap");
    }
  } catch (const NonPositiveDefiniteError& e) {
    throw TrajectoryDivergence(std::string("mass factorization failed: ") +
                               e.what());
  }
}

}  // namespace

void leapfrog(const GradFn& grad_u, const PotentialFn& u,
              const MassOperator& mass, Vec& z, Vec& r,
              const LeapfrogSpec& spec, Counters* counters) {
  spec.validate();
  if (z.size() != r.size() || z.size() != mass.dim())
    throw std::invalid_argument("leapfrog: dimension mismatch");
  leapfrog_impl(grad_u, u, mass, z, r, spec.epsilon, spec.steps,
                spec.divergence_cap, counters);
}

BlockState abla_proposal(const SemiSeparableSystem& sys, const BlockState& s,
                         const AblaSpec& spec, Counters* counters) {
  spec.validate();
  if (s.theta.size() != sys.theta_dim() || s.phi.size() != sys.phi_dim() ||
      s.r_theta.size() != sys.theta_dim() || s.r_phi.size() != sys.phi_dim())
    throw std::invalid_argument("abla_proposal: dimension mismatch");

  BlockState cur = s;
  const int lead_default = (spec.steps_theta + 1) / 2;
  const int tail_default = spec.steps_theta / 2;

  auto run_theta = [&](int steps) {
    if (steps == 0) return;
    GradFn g = [&](CSpan th, Span out) {
      sys.theta_potential_grad(th, cur.phi, cur.r_phi, out);
    };
    PotentialFn u = [&](CSpan th) {
      return sys.theta_potential(th, cur.phi, cur.r_phi);
    };
    try {
      const MassOperator& mt = sys.mass().mass_theta(cur.phi);
      leapfrog_impl(g, u, mt, cur.theta, cur.r_theta, spec.eps_theta, steps,
                    spec.divergence_cap, counters);
    } catch (const NonPositiveDefiniteError& e) {
      throw TrajectoryDivergence(std::string("theta mass failed: ") +
                                 e.what());
    }
  };
  auto run_phi = [&]() {
    GradFn g = [&](CSpan ph, Span out) {
      sys.phi_potential_grad(cur.theta, ph, cur.r_theta, out);
    };
    PotentialFn u = [&](CSpan ph) {
      return sys.phi_potential(cur.theta, ph, cur.r_theta);
    };
    try {
      const MassOperator& mp = sys.mass().mass_phi(cur.theta);
      leapfrog_impl(g, u, mp, cur.phi, cur.r_phi, spec.eps_phi,
                    spec.steps_phi, spec.divergence_cap, counters);
    } catch (const NonPositiveDefiniteError& e) {
      throw TrajectoryDivergence(std::string("phi mass failed: ") + e.what());
    }
  };

  for (int k = 0; k < spec.abla_steps; ++k) {
    const bool mirrored = (k % 2 == 1);
    const int lead = mirrored ? tail_default : lead_default;
    const int tail = mirrored ? lead_default : tail_default;
    run_theta(lead);
    run_phi();
    run_theta(tail);
  }
  return cur;
}

double jacobian_probe(const std::function<BlockState(const BlockState&)>& map,
                      const BlockState& s, double h) {
  const std::size_t n = s.theta.size();
  const std::size_t m = s.phi.size();
  const std::size_t dim = 2 * (n + m);

  auto pack = [&](const BlockState& b) {
    Vec v;
    v.reserve(dim);
    v.insert(v.end(), b.theta.begin(), b.theta.end());
    v.insert(v.end(), b.r_theta.begin(), b.r_theta.end());
    v.insert(v.end(), b.phi.begin(), b.phi.end());
    v.insert(v.end(), b.r_phi.begin(), b.r_phi.end());
    return v;
  };
  auto unpack = [&](const Vec& v) {
    BlockState b = BlockState::zeros(n, m);
    std::copy(v.begin(), v.begin() + n, b.theta.begin());
    std::copy(v.begin() + n, v.begin() + 2 * n, b.r_theta.begin());
    std::copy(v.begin() + 2 * n, v.begin() + 2 * n + m, b.phi.begin());
    std::copy(v.begin() + 2 * n + m, v.end(), b.r_phi.begin());
    return b;
  };

  const Vec base = pack(s);
  std::vector<double> jac(dim * dim);
  for (std::size_t k = 0; k < dim; ++k) {
    Vec lo = base, hi = base;
    hi[k] += h;
    lo[k] -= h;
    const Vec fhi = pack(map(unpack(hi)));
    const Vec flo = pack(map(unpack(lo)));
    for (std::size_t i = 0; i < dim; ++i) {
      const double diff = (fhi[i] - flo[i]) / (2.0 * h);
      if (!std::isfinite(diff))
        throw std::runtime_error(
            "jacobian_probe: perturbed evaluations diverged");
      jac[i * dim + k] = diff;
    }
  }
  return kernels::lu_determinant(std::move(jac), dim);
}

Vec fd_gradient(const std::function<double(CSpan)>& f, CSpan x, double h) {
  Vec g(x.size());
  Vec xp(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    const double orig = xp[i];
    xp[i] = orig + step;
    const double fhi = f(xp);
    xp[i] = orig - step;
    const double flo = f(xp);
    xp[i] = orig;
    g[i] = (fhi - flo) / (2.0 * step);
  }
  return g;
}

}  // namespace sshmc
