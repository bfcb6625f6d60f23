#include <cmath>
#include <vector>

#include "doctest.h"
#include "sshmc/energy.hpp"
#include "sshmc/diagnostics.hpp"
#include "sshmc/models/funnel.hpp"
#include "sshmc/models/gauss2.hpp"
#include "sshmc/models/sv.hpp"
#include "sshmc/sample.hpp"
#include "test_util.hpp"

using namespace sshmc;

namespace {

// Closed-form posterior for the two-level Gaussian toy: with one datum per
// group the joint (theta, mu) posterior is Gaussian with precision
//   L_tt = (1/sy^2 + 1/st^2) I, L_tm = -1/st^2, L_mm = n/st^2 + 1/smu^2
// and linear term (y/sy^2, 0). Solved here by plain Gaussian elimination,
// independent of the library's linear algebra.
struct Gauss2Posterior {
  std::vector<double> mean;
  std::vector<double> cov;  // (n+1)^2 row-major
};

Gauss2Posterior gauss2_posterior(const models::Gauss2Spec& spec) {
  const std::size_t n = spec.y.size();
  const std::size_t d = n + 1;
  const double iy = 1.0 / (spec.s_y * spec.s_y);
  const double it = 1.0 / (spec.s_t * spec.s_t);
  const double im = 1.0 / (spec.s_mu * spec.s_mu);
  std::vector<double> prec(d * d, 0.0), rhs(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prec[i * d + i] = iy + it;
    prec[i * d + n] = prec[n * d + i] = -it;
    rhs[i] = spec.y[i] * iy;
  }
  prec[n * d + n] = static_cast<double>(n) * it + im;

  // Invert by Gauss-Jordan on [prec | I], then mean = cov * rhs.
  std::vector<double> aug(d * 2 * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) aug[i * 2 * d + j] = prec[i * d + j];
    aug[i * 2 * d + d + i] = 1.0;
  }
  for (std::size_t col = 0; col < d; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < d; ++r)
      if (std::abs(aug[r * 2 * d + col]) > std::abs(aug[piv * 2 * d + col]))
        piv = r;
    for (std::size_t j = 0; j < 2 * d; ++j)
      std::swap(aug[col * 2 * d + j], aug[piv * 2 * d + j]);
    const double p = aug[col * 2 * d + col];
    for (std::size_t j = 0; j < 2 * d; ++j) aug[col * 2 * d + j] /= p;
    for (std::size_t r = 0; r < d; ++r) {
      if (r == col) continue;
      const double f = aug[r * 2 * d + col];
      for (std::size_t j = 0; j < 2 * d; ++j)
        aug[r * 2 * d + j] -= f * aug[col * 2 * d + j];
    }
  }
  Gauss2Posterior post;
  post.cov.assign(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      post.cov[i * d + j] = aug[i * 2 * d + d + j];
  post.mean.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      post.mean[i] += post.cov[i * d + j] * rhs[j];
  return post;
}

SamplerConfig sshmc_config(long n_iter, std::uint64_t seed) {
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Sshmc;
  cfg.abla = {.eps_theta = 0.5,
              .eps_phi = 0.5,
              .steps_theta = 2,
              .steps_phi = 2,
              .abla_steps = 4};
  cfg.n_iter = n_iter;
  cfg.burn_in = n_iter / 10;
  cfg.thin = 1;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("mh acceptance probabilities") {
  CHECK(mh_accept_probability(0.0) == 1.0);
  CHECK(mh_accept_probability(std::log(2.0)) == doctest::Approx(0.5));
  CHECK(mh_accept_probability(std::numeric_limits<double>::infinity()) == 0.0);
  CHECK(mh_accept_probability(-std::numeric_limits<double>::infinity()) ==
        1.0);
  CHECK(mh_accept_probability(std::numeric_limits<double>::quiet_NaN()) ==
        0.0);

  RngStream rng(1);
  int accepted = 0;
  const int trials = 100000;
  for (int k = 0; k < trials; ++k)
    accepted += mh_accept(std::log(2.0), rng) ? 1 : 0;
  // 5 sigma band around 1/2
  const double se = std::sqrt(0.25 / trials);
  CHECK(std::abs(accepted / static_cast<double>(trials) - 0.5) < 5.0 * se);

  for (int k = 0; k < 100; ++k) {
    CHECK(mh_accept(0.0, rng));
    CHECK_FALSE(mh_accept(std::numeric_limits<double>::infinity(), rng));
  }
}

TEST_CASE("run_chain retention arithmetic") {
  models::Gauss2Spec spec;
  spec.y = {0.3, -0.6};
  auto sys = models::make_gauss2(spec);
  SamplerConfig cfg = sshmc_config(100, 7);
  cfg.burn_in = 0;
  cfg.thin = 2;
  const ChainTrace trace =
      run_chain(*sys, cfg, BlockState::zeros(2, 1));
  CHECK(trace.retained == 50);
  CHECK(trace.samples.size() == 50 * 3);
  CHECK(trace.accepted.size() == 100);
  CHECK(trace.column_names.size() == 3);
  CHECK(trace.column_names[2] == "mu");
}

TEST_CASE("same seed gives identical traces") {
  models::Gauss2Spec spec;
  spec.y = {1.0, 0.0, -1.0};
  auto sys = models::make_gauss2(spec);
  const SamplerConfig cfg = sshmc_config(200, 99);
  const ChainTrace a = run_chain(*sys, cfg, BlockState::zeros(3, 1));
  const ChainTrace b = run_chain(*sys, cfg, BlockState::zeros(3, 1));
  CHECK(a.samples == b.samples);
  CHECK(a.accepted == b.accepted);
  CHECK(a.h_before == b.h_before);
  CHECK(a.gradient_evaluations == b.gradient_evaluations);
}

TEST_CASE("gradient evaluation counters match the closed forms") {
  models::Gauss2Spec spec;
  spec.y = {0.5, -0.5};
  auto sys = models::make_gauss2(spec);
  const BlockState init = BlockState::zeros(2, 1);

  SamplerConfig cfg = sshmc_config(50, 3);
  ChainTrace t = run_chain(*sys, cfg, init);
  CHECK(t.gradient_evaluations == expected_gradient_evaluations(cfg));
  CHECK(t.gradient_evaluations ==
        50ull * cfg.abla.abla_steps *
            (2ull * cfg.abla.steps_theta + 2ull * cfg.abla.steps_phi));

  cfg.kind = SamplerKind::Hmc;
  cfg.hmc = {.epsilon = 0.3, .steps = 7};
  t = run_chain(*sys, cfg, init);
  CHECK(t.gradient_evaluations == expected_gradient_evaluations(cfg));
  CHECK(t.gradient_evaluations == 50ull * 2ull * 7ull);

  cfg.kind = SamplerKind::HmcGibbs;
  cfg.gibbs_theta = {.epsilon = 0.3, .steps = 4};
  cfg.gibbs_phi = {.epsilon = 0.3, .steps = 3};
  t = run_chain(*sys, cfg, init);
  CHECK(t.gradient_evaluations == expected_gradient_evaluations(cfg));
  CHECK(t.gradient_evaluations == 50ull * (2ull * 4 + 2ull * 3));
}

TEST_CASE("rejected iterations repeat the previous position row") {
  // Force heavy rejection with a huge step size.
  models::Gauss2Spec spec;
  spec.y = {0.5, -0.5};
  spec.s_y = 0.3;
  auto sys = models::make_gauss2(spec);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Sshmc;
  cfg.abla = {.eps_theta = 8.0,
              .eps_phi = 8.0,
              .steps_theta = 2,
              .steps_phi = 2,
              .abla_steps = 2};
  cfg.n_iter = 300;
  cfg.burn_in = 0;
  cfg.thin = 1;
  cfg.seed = 17;
  const ChainTrace t = run_chain(*sys, cfg, BlockState::zeros(2, 1));
  REQUIRE(t.acceptance_rate() < 0.5);
  bool saw_reject = false;
  for (std::size_t i = 1; i < t.retained; ++i) {
    if (t.accepted[i] == 0.0) {
      saw_reject = true;
      for (std::size_t j = 0; j < t.dim; ++j)
        CHECK(t.samples[i * t.dim + j] == t.samples[(i - 1) * t.dim + j]);
    }
  }
  CHECK(saw_reject);
}

TEST_CASE("zero-gradient target accepts every proposal") {
  // Flat-limit gauss2 is not exactly flat; instead check dH == 0 via the
  // funnel at machine scale: use sshmc on a target whose gradients vanish
  // identically -- the funnel with x = 0 and v = 0 is not flat, so instead
  // assert via mh_accept(0) = always true, covered above, and verify here
  // that a well-tuned chain accepts nearly always.
  auto sys = models::make_funnel(2);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Sshmc;
  cfg.abla = {.eps_theta = 0.01,
              .eps_phi = 0.01,
              .steps_theta = 2,
              .steps_phi = 1,
              .abla_steps = 2};
  cfg.n_iter = 200;
  cfg.seed = 5;
  const ChainTrace t = run_chain(*sys, cfg, BlockState::zeros(2, 1));
  CHECK(t.acceptance_rate() > 0.999);
}

TEST_CASE("all three samplers recover the gauss2 posterior moments") {
  models::Gauss2Spec spec;
  spec.y = {0.8, -0.3, 1.5, 0.2};
  spec.s_y = 0.7;
  spec.s_t = 1.1;
  spec.s_mu = 1.5;
  const Gauss2Posterior post = gauss2_posterior(spec);
  const std::size_t d = spec.y.size() + 1;

  auto check_sampler = [&](SamplerKind kind, std::uint64_t seed) {
    auto sys = models::make_gauss2(spec);
    SamplerConfig cfg;
    cfg.kind = kind;
    cfg.n_iter = 6000;
    cfg.burn_in = 500;
    cfg.thin = 1;
    cfg.seed = seed;
    cfg.abla = {.eps_theta = 0.6,
                .eps_phi = 0.6,
                .steps_theta = 2,
                .steps_phi = 2,
                .abla_steps = 3};
    cfg.hmc = {.epsilon = 0.25, .steps = 8};
    cfg.gibbs_theta = {.epsilon = 0.6, .steps = 4};
    cfg.gibbs_phi = {.epsilon = 0.4, .steps = 4};
    const ChainTrace t =
        run_chain(*sys, cfg, BlockState::zeros(spec.y.size(), 1));
    const DiagnosticsReport rep = summarize(t);
    INFO("sampler ", to_string(kind), " acceptance ", t.acceptance_rate());
    for (std::size_t j = 0; j < d; ++j) {
      const auto col = t.column(j);
      const double m = testutil::mean(col);
      const double sd_j = std::sqrt(post.cov[j * d + j]);
      const double se = sd_j / std::sqrt(rep.ess_per_dim[j]);
      INFO("dim ", j, " mean ", m, " want ", post.mean[j], " se ", se);
      CHECK(std::abs(m - post.mean[j]) < 3.0 * se);
      // Variance within 3 standard errors. The error bar uses the ESS of
      // the squared-deviation sequence: HMC position chains can be nearly
      // antithetic (high linear ESS) while their squares stay correlated.
      std::vector<double> sq(col.size());
      for (std::size_t i = 0; i < col.size(); ++i)
        sq[i] = (col[i] - m) * (col[i] - m);
      const double ess_sq = ess(sq);
      const double v = testutil::variance(col);
      const double se_var = sd_j * sd_j * std::sqrt(2.0 / ess_sq);
      INFO("dim ", j, " var ", v, " want ", post.cov[j * d + j], " se ",
           se_var);
      CHECK(std::abs(v - post.cov[j * d + j]) < 3.0 * se_var);
    }
  };

  check_sampler(SamplerKind::Sshmc, 1001);
  check_sampler(SamplerKind::Hmc, 1002);
  check_sampler(SamplerKind::HmcGibbs, 1003);
}

TEST_CASE("funnel hyperparameter marginal is N(0, 9) under sshmc") {
  auto sys = models::make_funnel(10);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Sshmc;
  cfg.abla = {.eps_theta = 0.15,
              .eps_phi = 0.5,
              .steps_theta = 2,
              .steps_phi = 1,
              .abla_steps = 20};
  cfg.n_iter = 8000;
  cfg.burn_in = 1000;
  cfg.seed = 31415;
  const ChainTrace t = run_chain(*sys, cfg, BlockState::zeros(10, 1));
  CHECK(t.acceptance_rate() > 0.5);

  const auto v = t.column(10);
  const double ess_v = ess(v);
  const double mean_v = testutil::mean(v);
  double second = 0.0;
  for (double x : v) second += x * x;
  second /= static_cast<double>(v.size());

  // E[v] = 0 within 3 * 3/sqrt(ESS); E[v^2] = 9 within 3 SE of the second
  // moment (Var(v^2) = 2 * 81 for a centered normal).
  INFO("ess_v ", ess_v, " mean ", mean_v, " second ", second);
  CHECK(std::abs(mean_v) < 3.0 * 3.0 / std::sqrt(ess_v));
  CHECK(std::abs(second - 9.0) <
        3.0 * std::sqrt(2.0 * 81.0) / std::sqrt(ess_v));
}

TEST_CASE("gibbs blocks accept in the small-step limit") {
  models::Gauss2Spec spec;
  spec.y = {0.2, -0.2};
  auto sys = models::make_gauss2(spec);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::HmcGibbs;
  cfg.gibbs_theta = {.epsilon = 1e-4, .steps = 2};
  cfg.gibbs_phi = {.epsilon = 1e-4, .steps = 2};
  cfg.n_iter = 200;
  cfg.seed = 2;
  const ChainTrace t = run_chain(*sys, cfg, BlockState::zeros(2, 1));
  CHECK(t.acceptance_rate() == doctest::Approx(1.0));
}

TEST_CASE("sshmc on a flat target accepts every step exactly") {
  // Zero gradients and constant unit masses: the proposal conserves H
  // exactly, so every MH test sees dH = 0.
  auto sys = testutil::flat_system(3, 2);
  RngStream rng(12);
  BlockState s = BlockState::zeros(3, 2);
  const AblaSpec spec{.eps_theta = 0.4,
                      .eps_phi = 0.7,
                      .steps_theta = 2,
                      .steps_phi = 1,
                      .abla_steps = 5};
  int accepted = 0;
  for (int k = 0; k < 100; ++k) {
    const StepResult r = sshmc_step(sys, s, spec, rng);
    CHECK(r.h_after == r.h_before);
    accepted += r.accepted;
  }
  CHECK(accepted == 100);
}

namespace {

// Independent standard normal blocks: theta ~ N(0, I_n), phi ~ N(0, I_m).
class StdNormalTarget final : public HierarchicalTarget {
 public:
  StdNormalTarget(std::size_t n, std::size_t m) : HierarchicalTarget(n, m) {}
  double log_lik(CSpan) const override { return 0.0; }
  double log_prior_theta(CSpan theta, CSpan) const override {
    double acc = 0.0;
    for (double x : theta) acc -= 0.5 * x * x;
    return acc;
  }
  double log_hyperprior(CSpan phi) const override {
    double acc = 0.0;
    for (double x : phi) acc -= 0.5 * x * x;
    return acc;
  }
  void grad_theta(CSpan theta, CSpan, Span out) const override {
    for (std::size_t i = 0; i < theta.size(); ++i) out[i] = -theta[i];
  }
  void grad_phi(CSpan, CSpan phi, Span out) const override {
    for (std::size_t j = 0; j < phi.size(); ++j) out[j] = -phi[j];
  }
};

}  // namespace

TEST_CASE("hmc on a standard normal recovers the mean") {
  // eps = 0.1, L = 10, 10^4 retained: |mean| within 0.05 of zero.
  auto sys = SemiSeparableSystem(
      std::make_shared<StdNormalTarget>(1, 1),
      std::make_shared<testutil::FlatMass>(1, 1));
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Hmc;
  cfg.hmc = {.epsilon = 0.1, .steps = 10};
  cfg.n_iter = 11000;
  cfg.burn_in = 1000;
  cfg.seed = 97;
  const ChainTrace t = run_chain(sys, cfg, BlockState::zeros(1, 1));
  CHECK(t.retained == 10000);
  CHECK(std::abs(testutil::mean(t.column(0))) < 0.05);
  CHECK(std::abs(testutil::mean(t.column(1))) < 0.05);
}

TEST_CASE("funnel preset acceptance sits in the published band") {
  // n = 100 preset: 2 theta steps + 1 phi step per composite; long-run
  // acceptance in [0.6, 0.95].
  auto sys = models::make_funnel(100);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Sshmc;
  cfg.abla = {.eps_theta = 0.2,
              .eps_phi = 0.75,
              .steps_theta = 2,
              .steps_phi = 1,
              .abla_steps = 25};
  cfg.n_iter = 2000;
  cfg.burn_in = 500;
  cfg.seed = 314;
  const ChainTrace t = run_chain(*sys, cfg, BlockState::zeros(100, 1));
  CHECK(t.acceptance_rate() >= 0.6);
  CHECK(t.acceptance_rate() <= 0.95);
}

TEST_CASE("gibbs mixes the funnel hyperparameter slower than sshmc") {
  // Qualitative ordering: lag-1 autocorrelation of the v chain.
  auto lag1 = [](const std::vector<double>& v) {
    const auto gamma = autocovariance(v, 1);
    return gamma[1] / gamma[0];
  };
  SamplerConfig cfg;
  cfg.n_iter = 4000;
  cfg.burn_in = 500;
  cfg.seed = 21;
  cfg.abla = {.eps_theta = 0.15,
              .eps_phi = 0.5,
              .steps_theta = 2,
              .steps_phi = 1,
              .abla_steps = 20};
  cfg.gibbs_theta = {.epsilon = 0.15, .steps = 10};
  cfg.gibbs_phi = {.epsilon = 0.1, .steps = 5};

  auto sys_a = models::make_funnel(10);
  cfg.kind = SamplerKind::Sshmc;
  const ChainTrace sshmc_t = run_chain(*sys_a, cfg, BlockState::zeros(10, 1));
  auto sys_b = models::make_funnel(10);
  cfg.kind = SamplerKind::HmcGibbs;
  const ChainTrace gibbs_t = run_chain(*sys_b, cfg, BlockState::zeros(10, 1));

  const double rho_sshmc = lag1(sshmc_t.column(10));
  const double rho_gibbs = lag1(gibbs_t.column(10));
  INFO("lag-1 autocorr: sshmc ", rho_sshmc, " gibbs ", rho_gibbs);
  CHECK(rho_gibbs > rho_sshmc);
}

TEST_CASE("concurrent chains from cloned systems match serial runs") {
  models::Gauss2Spec spec;
  spec.y = {0.4, -0.8, 1.2};
  auto base = models::make_gauss2(spec);
  SamplerConfig cfg = sshmc_config(400, 5);

  std::vector<ChainTrace> serial(4);
  for (int c = 0; c < 4; ++c) {
    auto sys = base->clone();
    SamplerConfig mine = cfg;
    mine.seed = 100 + c;
    serial[c] = run_chain(*sys, mine, BlockState::zeros(3, 1));
  }
  std::vector<ChainTrace> parallel(4);
#pragma omp parallel for num_threads(4)
  for (int c = 0; c < 4; ++c) {
    auto sys = base->clone();
    SamplerConfig mine = cfg;
    mine.seed = 100 + c;
    parallel[c] = run_chain(*sys, mine, BlockState::zeros(3, 1));
  }
  for (int c = 0; c < 4; ++c) {
    CHECK(serial[c].samples == parallel[c].samples);
    CHECK(serial[c].accepted == parallel[c].accepted);
  }
}

TEST_CASE("run_chain rejects a mismatched initial state") {
  models::Gauss2Spec spec;
  spec.y = {0.1, 0.2};
  auto sys = models::make_gauss2(spec);
  SamplerConfig cfg = sshmc_config(50, 1);
  CHECK_THROWS(run_chain(*sys, cfg, BlockState::zeros(3, 1)));
  CHECK_THROWS(run_chain(*sys, cfg, BlockState::zeros(2, 2)));
}

TEST_CASE("hmc diagonal mass override changes the dynamics deterministically") {
  auto sys = models::make_funnel(4);
  SamplerConfig cfg;
  cfg.kind = SamplerKind::Hmc;
  cfg.hmc = {.epsilon = 0.05, .steps = 10};
  cfg.n_iter = 300;
  cfg.burn_in = 50;
  cfg.seed = 8;
  const ChainTrace unit = run_chain(*sys, cfg, BlockState::zeros(4, 1));
  cfg.hmc_mass_theta = 2.0;
  cfg.hmc_mass_phi = 0.5;
  const ChainTrace scaled = run_chain(*sys, cfg, BlockState::zeros(4, 1));
  CHECK(unit.samples != scaled.samples);  // the override is live
  const ChainTrace scaled2 = run_chain(*sys, cfg, BlockState::zeros(4, 1));
  CHECK(scaled.samples == scaled2.samples);
}

TEST_CASE("sshmc and hmc agree on a small sv posterior") {
  // Two different dynamics targeting the same density: the hyperparameter
  // posterior means must agree within joint Monte Carlo error.
  const auto sim = models::gen_sv_data(30, {0.65, 0.25, 0.8}, 19);
  auto run_kind = [&](SamplerKind kind, std::uint64_t seed) {
    auto sys = models::make_sv(sim.y, {});
    SamplerConfig cfg;
    cfg.kind = kind;
    cfg.abla = {.eps_theta = 0.3,
                .eps_phi = 0.05,
                .steps_theta = 5,
                .steps_phi = 2,
                .abla_steps = 4};
    cfg.hmc = {.epsilon = 0.1, .steps = 20};
    cfg.n_iter = 9000;
    cfg.burn_in = 1500;
    cfg.seed = seed;
    BlockState init = BlockState::zeros(30, 3);
    init.phi = {0.0, std::log(10.0 * 0.05 / 8.0),
                std::atanh(2.0 * 20.0 / 21.5 - 1.0)};
    return run_chain(*sys, cfg, init);
  };
  const ChainTrace a = run_kind(SamplerKind::Sshmc, 5);
  const ChainTrace b = run_kind(SamplerKind::Hmc, 6);
  for (int j = 0; j < 3; ++j) {
    const auto ca = a.column(30 + j);
    const auto cb = b.column(30 + j);
    const double se_a =
        std::sqrt(testutil::variance(ca) / std::max(ess(ca), 4.0));
    const double se_b =
        std::sqrt(testutil::variance(cb) / std::max(ess(cb), 4.0));
    const double joint_se = std::sqrt(se_a * se_a + se_b * se_b);
    INFO("hyper ", j, ": ", testutil::mean(ca), " vs ", testutil::mean(cb),
         " joint se ", joint_se);
    CHECK(std::abs(testutil::mean(ca) - testutil::mean(cb)) <
          4.0 * joint_se);
  }
}
