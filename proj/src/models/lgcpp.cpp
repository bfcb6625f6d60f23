#include "sshmc/models/lgcpp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"
#include "sshmc/rng.hpp"

namespace sshmc::models {

namespace {
const double kLog2Pi = std::log(2.0 * M_PI);

std::shared_ptr<const Vec> build_dist(std::size_t d) {
  const std::size_t n = d * d;
  auto dist = std::make_shared<Vec>(n * n);
  Vec& m = *dist;
  for (std::size_t a = 0; a < n; ++a) {
    const double ia = static_cast<double>(a / d);
    const double ja = static_cast<double>(a % d);
    for (std::size_t b = 0; b < n; ++b) {
      const double ib = static_cast<double>(b / d);
      const double jb = static_cast<double>(b % d);
      m[a * n + b] = std::hypot(ia - ib, ja - jb);
    }
  }
  return dist;
}

// v^T D v with D = cov .* dist * scale, in one pass over the matrix.
double quad_with_scaled_cov(const Vec& cov, const Vec& dist, double scale,
                            CSpan v) {
  const std::size_t n = v.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* crow = cov.data() + i * n;
    const double* drow = dist.data() + i * n;
    double row_acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) row_acc += crow[j] * drow[j] * v[j];
    acc += v[i] * row_acc;
  }
  return acc * scale;
}
}  // namespace

double LgcppConfig::resolved_prior_mean_log_beta() const {
  if (std::isnan(prior_mean_log_beta))
    return -std::log(static_cast<double>(d));
  return prior_mean_log_beta;
}

LgcppKernel::LgcppKernel(std::size_t d) : LgcppKernel(d, build_dist(d)) {}

LgcppKernel::LgcppKernel(std::size_t d, std::shared_ptr<const Vec> dist)
    : d_(d), n_(d * d), dist_(std::move(dist)) {
  if (d_ < 2) throw std::invalid_argument("lgcpp: need d >= 2");
}

LgcppKernel::Entry& LgcppKernel::at(double log_sigma, double log_beta) {
  for (auto& slot : slots_)
    if (slot.used && slot.log_sigma == log_sigma &&
        slot.log_beta == log_beta)
      return slot;
  const double scale = std::exp(2.0 * log_sigma);
  const double inv_range =
      1.0 / (std::exp(log_beta) * static_cast<double>(d_));
  if (!std::isfinite(scale) || !std::isfinite(inv_range) || scale <= 0.0)
    throw NonPositiveDefiniteError("lgcpp covariance scale overflowed");
  ++factorizations;
  Entry& e = slots_[next_victim_];
  next_victim_ = 1 - next_victim_;
  e.used = false;
  e.cov.resize(n_ * n_);
  kernels::exp_covariance(dist_->data(), n_, scale, inv_range, e.cov.data());
  e.chol = e.cov;
  if (!kernels::cholesky_upper_inplace(e.chol.data(), n_))
    throw NonPositiveDefiniteError("lgcpp covariance not positive definite");
  // Long correlation ranges make the covariance numerically singular: the
  // factorization then "succeeds" with collapsed pivots and the phony log
  // determinant manufactures an energy sink at extreme beta. Treat a
  // condition estimate beyond ~1e14 as a failed factorization, which the
  // samplers turn into a rejection.
  double pivot_min = e.chol[0], pivot_max = e.chol[0];
  for (std::size_t k = 1; k < n_; ++k) {
    const double p = e.chol[k * n_ + k];
    pivot_min = std::min(pivot_min, p);
    pivot_max = std::max(pivot_max, p);
  }
  if (!(pivot_min > 1e-7 * pivot_max))
    throw NonPositiveDefiniteError("lgcpp covariance numerically singular");
  e.log_det = kernels::chol_logdet(e.chol.data(), n_);
  e.op = MassOperator::dense_inverse_from_factor(n_, e.chol);
  e.inv.clear();
  e.log_sigma = log_sigma;
  e.log_beta = log_beta;
  e.used = true;
  return e;
}

const Vec& LgcppKernel::ensure_inverse(Entry& e) {
  if (e.inv.empty()) {
    e.inv.resize(n_ * n_);
    kernels::chol_inverse(e.chol.data(), n_, e.inv.data());
  }
  return e.inv;
}

LgcppTarget::LgcppTarget(LgcppConfig cfg, Vec counts,
                         std::shared_ptr<LgcppKernel> kernel)
    : HierarchicalTarget(cfg.d * cfg.d, 2),
      cfg_(cfg),
      counts_(std::move(counts)),
      cell_weight_(1.0 / static_cast<double>(cfg.d * cfg.d)),
      kernel_(std::move(kernel)) {
  if (counts_.size() != theta_dim())
    throw std::invalid_argument("lgcpp: counts size mismatch");
  for (double y : counts_)
    if (y < 0.0) throw std::invalid_argument("lgcpp: negative count");
}

double LgcppTarget::log_lik(CSpan theta) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    acc += counts_[i] * theta[i] - cell_weight_ * std::exp(theta[i]);
  return acc;
}

double LgcppTarget::log_prior_theta(CSpan theta, CSpan phi) const {
  LgcppKernel::Entry& e = kernel_->at(phi[0], phi[1]);
  const std::size_t n = theta.size();
  Vec z(n), sol(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = theta[i] - cfg_.mu;
  kernels::chol_solve(e.chol.data(), n, z.data(), sol.data());
  ++kernel_->log_det_queries;
  return -0.5 * static_cast<double>(n) * kLog2Pi - 0.5 * e.log_det -
         0.5 * kernels::dot(z, sol);
}

double LgcppTarget::log_hyperprior(CSpan phi) const {
  const double isd2 = 1.0 / (cfg_.prior_sd * cfg_.prior_sd);
  const double du = phi[0] - cfg_.prior_mean_log_sigma;
  const double dw = phi[1] - cfg_.resolved_prior_mean_log_beta();
  return -kLog2Pi - 2.0 * std::log(cfg_.prior_sd) -
         0.5 * (du * du + dw * dw) * isd2;
}

void LgcppTarget::grad_theta(CSpan theta, CSpan phi, Span out) const {
  LgcppKernel::Entry& e = kernel_->at(phi[0], phi[1]);
  const std::size_t n = theta.size();
  Vec z(n), sol(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = theta[i] - cfg_.mu;
  kernels::chol_solve(e.chol.data(), n, z.data(), sol.data());
  for (std::size_t i = 0; i < n; ++i)
    out[i] = counts_[i] - cell_weight_ * std::exp(theta[i]) - sol[i];
}

void LgcppTarget::grad_phi(CSpan theta, CSpan phi, Span out) const {
  LgcppKernel::Entry& e = kernel_->at(phi[0], phi[1]);
  const std::size_t n = theta.size();
  const Vec& inv = kernel_->ensure_inverse(e);
  const Vec& dist = kernel_->dist();
  Vec z(n), a(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = theta[i] - cfg_.mu;
  kernels::chol_solve(e.chol.data(), n, z.data(), a.data());

  // d log prior / d log sigma: dSigma/du = 2 Sigma, so -n + z^T Sigma^{-1} z.
  const double quad = kernels::dot(z, a);
  double g_u = -static_cast<double>(n) + quad;

  // d log prior / d log beta with D = Sigma .* dist / (beta d):
  //   -tr(Sigma^{-1} D)/2 + a^T D a / 2.
  const double inv_range =
      1.0 / (std::exp(phi[1]) * static_cast<double>(kernel_->d()));
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* irow = inv.data() + i * n;
    const double* crow = e.cov.data() + i * n;
    const double* drow = dist.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += irow[j] * crow[j] * drow[j];
    tr += acc;
  }
  tr *= inv_range;
  const double quad_d = quad_with_scaled_cov(e.cov, dist, inv_range, a);
  double g_w = -0.5 * tr + 0.5 * quad_d;

  const double isd2 = 1.0 / (cfg_.prior_sd * cfg_.prior_sd);
  out[0] = g_u - (phi[0] - cfg_.prior_mean_log_sigma) * isd2;
  out[1] = g_w - (phi[1] - cfg_.resolved_prior_mean_log_beta()) * isd2;
}

std::vector<std::string> LgcppTarget::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(theta_dim() + 2);
  for (std::size_t i = 0; i < theta_dim(); ++i)
    names.push_back("x" + std::to_string(i + 1));
  names.push_back("log_sigma");
  names.push_back("log_beta");
  return names;
}

LgcppMass::LgcppMass(std::shared_ptr<LgcppKernel> kernel)
    : kernel_(std::move(kernel)), mass_phi_(MassOperator::scalar(2, 1.0)) {}

const MassOperator& LgcppMass::mass_theta(CSpan phi) {
  return kernel_->at(phi[0], phi[1]).op;
}

const MassOperator& LgcppMass::mass_phi(CSpan) { return mass_phi_; }

void LgcppMass::grad_aux_theta(CSpan phi, CSpan r_theta, Span out) {
  // aux = r^T Sigma r / 2 - log det Sigma / 2:
  //   d/du = r^T Sigma r - n
  //   d/dw = r^T D r / 2 - tr(Sigma^{-1} D) / 2
  LgcppKernel::Entry& e = kernel_->at(phi[0], phi[1]);
  const std::size_t n = kernel_->n();
  Vec sr(n);
  kernels::sym_matvec(e.cov.data(), n, r_theta.data(), sr.data());
  const double r_sigma_r = kernels::dot(r_theta, sr);
  out[0] = r_sigma_r - static_cast<double>(n);

  const Vec& inv = kernel_->ensure_inverse(e);
  const Vec& dist = kernel_->dist();
  const double inv_range =
      1.0 / (std::exp(phi[1]) * static_cast<double>(kernel_->d()));
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* irow = inv.data() + i * n;
    const double* crow = e.cov.data() + i * n;
    const double* drow = dist.data() + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += irow[j] * crow[j] * drow[j];
    tr += acc;
  }
  tr *= inv_range;
  out[1] =
      0.5 * quad_with_scaled_cov(e.cov, dist, inv_range, r_theta) - 0.5 * tr;
}

void LgcppMass::grad_aux_phi(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

std::unique_ptr<SemiSeparableMass> LgcppMass::clone() const {
  auto fresh =
      std::make_shared<LgcppKernel>(kernel_->d(), kernel_->dist_ptr());
  return std::make_unique<LgcppMass>(fresh);
}

LgcppSystem::LgcppSystem(std::shared_ptr<const LgcppTarget> target,
                         std::shared_ptr<LgcppMass> mass)
    : SemiSeparableSystem(target, mass), target_(std::move(target)) {}

double LgcppSystem::phi_potential(CSpan theta, CSpan phi,
                                  CSpan r_theta) const {
  // U2 with the +-log det Sigma / 2 pair cancelled symbolically:
  //   n log(2 pi)/2 + z^T Sigma^{-1} z / 2 - log_hyperprior
  //   + r^T Sigma r / 2
  LgcppKernel& kernel = target_->kernel();
  LgcppKernel::Entry& e = kernel.at(phi[0], phi[1]);
  const std::size_t n = kernel.n();
  const double mu = target_->config().mu;
  Vec z(n), a(n), sr(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = theta[i] - mu;
  kernels::chol_solve(e.chol.data(), n, z.data(), a.data());
  kernels::sym_matvec(e.cov.data(), n, r_theta.data(), sr.data());
  const double value = 0.5 * static_cast<double>(n) * kLog2Pi +
                       0.5 * kernels::dot(z, a) -
                       target_->log_hyperprior(phi) +
                       0.5 * kernels::dot(r_theta, sr);
  return std::isnan(value) ? std::numeric_limits<double>::infinity() : value;
}

void LgcppSystem::phi_potential_grad(CSpan theta, CSpan phi, CSpan r_theta,
                                     Span out) const {
  // The trace terms of -grad_phi and grad_aux_theta cancel exactly, leaving
  //   dU2/du = -z^T Sigma^{-1} z + r^T Sigma r + u / prior_sd^2
  //   dU2/dw = -a^T D a / 2 + r^T D r / 2 + w / prior_sd^2
  // with a = Sigma^{-1} z: no inverse, no trace, no log det.
  LgcppKernel& kernel = target_->kernel();
  LgcppKernel::Entry& e = kernel.at(phi[0], phi[1]);
  const std::size_t n = kernel.n();
  const double mu = target_->config().mu;
  const double isd2 =
      1.0 / (target_->config().prior_sd * target_->config().prior_sd);
  Vec z(n), a(n), sr(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = theta[i] - mu;
  kernels::chol_solve(e.chol.data(), n, z.data(), a.data());
  kernels::sym_matvec(e.cov.data(), n, r_theta.data(), sr.data());
  const double inv_range =
      1.0 / (std::exp(phi[1]) * static_cast<double>(kernel.d()));
  const LgcppConfig& mc = target_->config();
  out[0] = -kernels::dot(z, a) + kernels::dot(r_theta, sr) +
           (phi[0] - mc.prior_mean_log_sigma) * isd2;
  out[1] = -0.5 * quad_with_scaled_cov(e.cov, kernel.dist(), inv_range, a) +
           0.5 * quad_with_scaled_cov(e.cov, kernel.dist(), inv_range,
                                      r_theta) +
           (phi[1] - mc.resolved_prior_mean_log_beta()) * isd2;
}

std::unique_ptr<SemiSeparableSystem> LgcppSystem::clone() const {
  auto kernel = std::make_shared<LgcppKernel>(target_->kernel().d(),
                                              target_->kernel().dist_ptr());
  auto target = std::make_shared<LgcppTarget>(
      target_->config(), target_->counts(), kernel);
  auto mass = std::make_shared<LgcppMass>(kernel);
  return std::make_unique<LgcppSystem>(target, mass);
}

std::unique_ptr<LgcppSystem> make_lgcpp(const LgcppConfig& cfg, Vec counts) {
  auto kernel = std::make_shared<LgcppKernel>(cfg.d);
  auto target = std::make_shared<LgcppTarget>(cfg, std::move(counts), kernel);
  auto mass = std::make_shared<LgcppMass>(kernel);
  return std::make_unique<LgcppSystem>(target, mass);
}

LgcppSimulation gen_lgcpp_data(std::size_t d, double sigma, double beta,
                               double mu, std::uint64_t seed) {
  if (!(sigma > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("gen_lgcpp_data: sigma, beta must be > 0");
  LgcppKernel kernel(d);
  const std::size_t n = kernel.n();
  LgcppKernel::Entry& e = kernel.at(std::log(sigma), std::log(beta));
  RngStream rng(seed);
  Vec z(n);
  for (double& v : z) v = rng.normal();
  LgcppSimulation sim;
  sim.x_true.resize(n);
  kernels::upper_t_matvec(e.chol.data(), n, z.data(), sim.x_true.data());
  for (double& v : sim.x_true) v += mu;

  const double m = 1.0 / static_cast<double>(n);
  sim.counts.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = m * std::exp(sim.x_true[i]);
    if (mean > 500.0) {
      // Normal approximation in the far tail, rounded and floored at zero.
      const double draw = mean + std::sqrt(mean) * rng.normal();
      sim.counts[i] = std::max(0.0, std::round(draw));
      continue;
    }
    // Knuth's product method.
    const double limit = std::exp(-mean);
    double p = 1.0;
    long k = -1;
    do {
      ++k;
      p *= rng.uniform();
    } while (p > limit);
    sim.counts[i] = static_cast<double>(k);
  }
  return sim;
}

}  // namespace sshmc::models
