#include <cmath>
#include <vector>

#include "doctest.h"
#include "sshmc/energy.hpp"
#include "sshmc/error.hpp"
#include "sshmc/integrate.hpp"
#include "sshmc/models/funnel.hpp"
#include "sshmc/models/gauss2.hpp"
#include "sshmc/models/hblr.hpp"
#include "sshmc/models/lgcpp.hpp"
#include "test_util.hpp"

using namespace sshmc;

namespace {

// Standard quadratic bowl U = z^2/2.
const GradFn kQuadGrad = [](CSpan z, Span out) {
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i];
};
const PotentialFn kQuadU = [](CSpan z) {
  double acc = 0.0;
  for (double x : z) acc += 0.5 * x * x;
  return acc;
};

BlockState random_state(const SemiSeparableSystem& sys, RngStream& rng,
                        double scale = 1.0) {
  BlockState s = BlockState::zeros(sys.theta_dim(), sys.phi_dim());
  for (auto& x : s.theta) x = scale * rng.normal();
  for (auto& x : s.phi) x = scale * rng.normal();
  refresh_momenta(sys.mass(), s.theta, s.phi, rng, s.r_theta, s.r_phi);
  return s;
}

double max_abs_diff(const Vec& a, const Vec& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

TEST_CASE("single leapfrog step on the quadratic bowl, hand-evaluated") {
  // eps = 0.1, (z, r) = (1, 0):
  //   r half-kick: -0.05; drift: z = 1 + 0.1*(-0.05) = 0.995;
  //   r half-kick: -0.05 - 0.05*0.995 = -0.09975
  Vec z = {1.0}, r = {0.0};
  const auto mass = MassOperator::scalar(1, 1.0);
  leapfrog(kQuadGrad, kQuadU, mass, z, r, {.epsilon = 0.1, .steps = 1});
  CHECK(z[0] == doctest::Approx(0.995).epsilon(1e-14));
  CHECK(r[0] == doctest::Approx(-0.09975).epsilon(1e-14));
}

TEST_CASE("free particle drifts linearly") {
  const GradFn zero_grad = [](CSpan, Span out) {
    for (double& x : out) x = 0.0;
  };
  const PotentialFn zero_u = [](CSpan) { return 0.0; };
  Vec z = {1.0, -2.0}, r = {0.5, 0.25};
  const auto mass = MassOperator::diagonal({2.0, 0.5});
  leapfrog(zero_grad, zero_u, mass, z, r, {.epsilon = 0.3, .steps = 7});
  // z' = z + L eps M^{-1} r, r unchanged.
  CHECK(z[0] == doctest::Approx(1.0 + 7 * 0.3 * 0.5 / 2.0).epsilon(1e-14));
  CHECK(z[1] == doctest::Approx(-2.0 + 7 * 0.3 * 0.25 / 0.5).epsilon(1e-14));
  CHECK(r[0] == 0.5);
  CHECK(r[1] == 0.25);
}

TEST_CASE("leapfrog is an involution up to momentum negation") {
  RngStream rng(12);
  const auto mass = MassOperator::diagonal({1.0, 2.5, 0.7});
  for (int rep = 0; rep < 25; ++rep) {
    Vec z(3), r(3);
    for (auto& x : z) x = rng.normal();
    for (auto& x : r) x = rng.normal();
    const Vec z0 = z, r0 = r;
    const LeapfrogSpec spec{.epsilon = 0.2, .steps = 8};
    leapfrog(kQuadGrad, kQuadU, mass, z, r, spec);
    for (auto& x : r) x = -x;
    leapfrog(kQuadGrad, kQuadU, mass, z, r, spec);
    for (auto& x : r) x = -x;
    CHECK(max_abs_diff(z, z0) < 1e-12);
    CHECK(max_abs_diff(r, r0) < 1e-12);
  }
}

TEST_CASE("leapfrog divergence cap fires on an explosive trajectory") {
  // U = -100 z^2 (inverted bowl): energy error grows without bound.
  const GradFn grad = [](CSpan z, Span out) {
    for (std::size_t i = 0; i < z.size(); ++i) out[i] = -200.0 * z[i];
  };
  const PotentialFn u = [](CSpan z) { return -100.0 * z[0] * z[0]; };
  Vec z = {1.0}, r = {0.0};
  const auto mass = MassOperator::scalar(1, 1.0);
  CHECK_THROWS_AS(
      leapfrog(grad, u, mass, z, r,
               {.epsilon = 1.0, .steps = 60, .divergence_cap = 1000.0}),
      TrajectoryDivergence);
}



TEST_CASE("abla free-particle limit moves both blocks linearly") {
  // Zero gradients + identity masses: theta' = theta + L*L1*eps1*r_theta,
  // phi' = phi + L*L2*eps2*r_phi, momenta unchanged.
  auto sys = testutil::flat_system(2, 1);
  BlockState s = BlockState::zeros(2, 1);
  s.r_theta = {0.5, -0.25};
  s.r_phi = {1.0};
  AblaSpec abla{.eps_theta = 0.125,
                .eps_phi = 0.25,
                .steps_theta = 2,
                .steps_phi = 3,
                .abla_steps = 4};
  const BlockState out = abla_proposal(sys, s, abla);
  CHECK(out.theta[0] == doctest::Approx(4 * 2 * 0.125 * 0.5).epsilon(1e-14));
  CHECK(out.theta[1] == doctest::Approx(4 * 2 * 0.125 * -0.25).epsilon(1e-14));
  CHECK(out.phi[0] == doctest::Approx(4 * 3 * 0.25 * 1.0).epsilon(1e-14));
  CHECK(out.r_theta[0] == 0.5);
  CHECK(out.r_theta[1] == -0.25);
  CHECK(out.r_phi[0] == 1.0);
}

TEST_CASE("abla conserves H exactly in the constant-mass zero-gradient limit") {
  auto sys = testutil::flat_system(3, 2);
  BlockState s = BlockState::zeros(3, 2);
  s.r_theta = {0.5, -0.25, 0.1};
  s.r_phi = {1.0, -2.0};
  const double h0 = hamiltonian(sys, s);
  const BlockState out = abla_proposal(
      sys, s,
      {.eps_theta = 0.3, .eps_phi = 0.7, .steps_theta = 2, .steps_phi = 1,
       .abla_steps = 6});
  const double h1 = hamiltonian(sys, out);
  CHECK(h1 == h0);  // exact: nothing that enters H changes
}

TEST_CASE("abla proposal is an involution up to momentum negation") {
  auto sys = models::make_funnel(5);
  RngStream rng(2024);
  AblaSpec spec{.eps_theta = 0.15,
                .eps_phi = 0.15,
                .steps_theta = 2,
                .steps_phi = 1,
                .abla_steps = 5};
  for (int rep = 0; rep < 30; ++rep) {
    const BlockState s0 = random_state(*sys, rng);
    BlockState fwd = abla_proposal(*sys, s0, spec);
    for (auto& x : fwd.r_theta) x = -x;
    for (auto& x : fwd.r_phi) x = -x;
    BlockState back = abla_proposal(*sys, fwd, spec);
    for (auto& x : back.r_theta) x = -x;
    for (auto& x : back.r_phi) x = -x;
    CHECK(max_abs_diff(back.theta, s0.theta) < 1e-8);
    CHECK(max_abs_diff(back.phi, s0.phi) < 1e-8);
    CHECK(max_abs_diff(back.r_theta, s0.r_theta) < 1e-8);
    CHECK(max_abs_diff(back.r_phi, s0.r_phi) < 1e-8);
  }
}

TEST_CASE("abla with odd theta steps mirrors composites and stays reversible") {
  auto sys = models::make_funnel(3);
  RngStream rng(5150);
  AblaSpec spec{.eps_theta = 0.1,
                .eps_phi = 0.1,
                .steps_theta = 3,
                .steps_phi = 2,
                .abla_steps = 4};
  for (int rep = 0; rep < 10; ++rep) {
    const BlockState s0 = random_state(*sys, rng);
    BlockState fwd = abla_proposal(*sys, s0, spec);
    for (auto& x : fwd.r_theta) x = -x;
    for (auto& x : fwd.r_phi) x = -x;
    BlockState back = abla_proposal(*sys, fwd, spec);
    CHECK(max_abs_diff(back.theta, s0.theta) < 1e-8);
    CHECK(max_abs_diff(back.phi, s0.phi) < 1e-8);
  }
}

TEST_CASE("odd theta steps with odd abla steps is rejected as a config") {
  AblaSpec spec{.eps_theta = 0.1,
                .eps_phi = 0.1,
                .steps_theta = 1,
                .steps_phi = 1,
                .abla_steps = 3};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec.abla_steps = 4;
  CHECK_NOTHROW(spec.validate());
}

TEST_CASE("jacobian probe: identity and single leapfrog step") {
  const auto id = [](const BlockState& s) { return s; };
  BlockState s = BlockState::zeros(2, 1);
  s.theta = {0.3, -0.2};
  s.phi = {0.1};
  CHECK(jacobian_probe(id, s, 1e-5) == doctest::Approx(1.0).epsilon(1e-10));

  // One leapfrog step on U = |theta|^2/2 moving only (theta, r_theta).
  const auto mass = MassOperator::scalar(2, 1.0);
  const auto step = [&](const BlockState& in) {
    BlockState out = in;
    leapfrog(kQuadGrad, kQuadU, mass, out.theta, out.r_theta,
             {.epsilon = 0.37, .steps = 1});
    return out;
  };
  CHECK(jacobian_probe(step, s, 1e-5) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("jacobian probe: abla proposal on a small funnel preserves volume") {
  auto sys = models::make_funnel(2);
  AblaSpec spec{.eps_theta = 0.12,
                .eps_phi = 0.12,
                .steps_theta = 2,
                .steps_phi = 1,
                .abla_steps = 3};
  RngStream rng(99);
  BlockState s = random_state(*sys, rng, 0.5);
  const auto map = [&](const BlockState& in) {
    return abla_proposal(*sys, in, spec);
  };
  CHECK(jacobian_probe(map, s, 1e-5) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("abla energy error scales as eps^2 on the funnel") {
  // Fixed trajectory length: halving eps doubles abla_steps. In that regime
  // |dH| behaves like eps^2, so halving eps should quarter the mean error.
  auto sys = models::make_funnel(3);
  RngStream rng(661);
  std::vector<BlockState> starts;
  for (int k = 0; k < 100; ++k) starts.push_back(random_state(*sys, rng, 0.8));

  auto mean_abs_dh = [&](double eps, int abla_steps) {
    double acc = 0.0;
    for (const auto& s : starts) {
      AblaSpec spec{.eps_theta = eps,
                    .eps_phi = eps,
                    .steps_theta = 2,
                    .steps_phi = 1,
                    .abla_steps = abla_steps};
      const double h0 = hamiltonian(*sys, s);
      const BlockState out = abla_proposal(*sys, s, spec);
      const double h1 = hamiltonian(*sys, out);
      acc += std::abs(h1 - h0);
    }
    return acc / static_cast<double>(starts.size());
  };

  const double e_full = mean_abs_dh(0.08, 8);
  const double e_half = mean_abs_dh(0.04, 16);
  const double ratio = e_full / e_half;
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
  const double exponent = std::log2(ratio);
  CHECK(exponent > 1.7);
  CHECK(exponent < 2.3);
}

TEST_CASE("fd_gradient on a cubic") {
  const auto f = [](CSpan x) {
    return x[0] * x[0] * x[0] + 2.0 * x[1] * x[0];
  };
  const Vec x = {1.2, -0.7};
  const Vec g = fd_gradient(f, x);
  CHECK(g[0] == doctest::Approx(3.0 * 1.44 - 1.4).epsilon(1e-7));
  CHECK(g[1] == doctest::Approx(2.4).epsilon(1e-7));
}

TEST_CASE("funnel theta-block leapfrog is an involution up to negation") {
  auto sys = models::make_funnel(3);
  RngStream rng(77);
  for (int rep = 0; rep < 20; ++rep) {
    Vec phi = {0.7 * rng.normal()};
    Vec r_phi = {rng.normal()};
    Vec z(3), r(3);
    for (auto& x : z) x = rng.normal();
    const MassOperator mass = sys->mass().mass_theta(phi);
    mass.draw(rng, r);
    const Vec z0 = z, r0 = r;
    GradFn g = [&](CSpan th, Span out) {
      sys->theta_potential_grad(th, phi, r_phi, out);
    };
    PotentialFn u = [&](CSpan th) {
      return sys->theta_potential(th, phi, r_phi);
    };
    const LeapfrogSpec spec{.epsilon = 0.15, .steps = 6};
    leapfrog(g, u, mass, z, r, spec);
    for (auto& x : r) x = -x;
    leapfrog(g, u, mass, z, r, spec);
    for (auto& x : r) x = -x;
    CHECK(max_abs_diff(z, z0) < 1e-12);
    CHECK(max_abs_diff(r, r0) < 1e-12);
  }
}

TEST_CASE("abla volume preservation holds for the cached-mass models too") {
  // Small hblr and lgcpp instances (total position dimension <= 8): the
  // determinant probe also flushes out any state leaking through the
  // factorization caches.
  {
    auto data = models::gen_hblr_data({5}, 4, 13);  // n + m = 5
    auto sys = models::make_hblr(std::move(data), 1.0);
    RngStream rng(3);
    BlockState s = BlockState::zeros(4, 1);
    for (auto& x : s.theta) x = 0.4 * rng.normal();
    s.phi[0] = 0.3 * rng.normal();
    refresh_momenta(sys->mass(), s.theta, s.phi, rng, s.r_theta, s.r_phi);
    const AblaSpec spec{0.2, 0.3, 2, 1, 3, 1000.0};
    const double det = jacobian_probe(
        [&](const BlockState& in) { return abla_proposal(*sys, in, spec); },
        s, 1e-5);
    CHECK(std::abs(det - 1.0) < 1e-5);
  }
  {
    const double mu = std::log(4.0) - 0.5;
    const auto sim = models::gen_lgcpp_data(2, 1.0, 0.4, mu, 5);
    models::LgcppConfig c;
    c.d = 2;  // n + m = 6
    c.mu = mu;
    auto sys = models::make_lgcpp(c, sim.counts);
    RngStream rng(7);
    BlockState s = BlockState::zeros(4, 2);
    for (auto& x : s.theta) x = mu + 0.3 * rng.normal();
    s.phi = {0.2 * rng.normal(), -std::log(2.0) + 0.2 * rng.normal()};
    refresh_momenta(sys->mass(), s.theta, s.phi, rng, s.r_theta, s.r_phi);
    const AblaSpec spec{0.1, 0.05, 2, 1, 3, 1000.0};
    const double det = jacobian_probe(
        [&](const BlockState& in) { return abla_proposal(*sys, in, spec); },
        s, 1e-5);
    CHECK(std::abs(det - 1.0) < 1e-5);
  }
}
