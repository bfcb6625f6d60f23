#include "sshmc/models/sv.hpp"

#include <cmath>
#include <stdexcept>

#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"
#include "sshmc/rng.hpp"

namespace sshmc::models {

namespace {
const double kLog2Pi = std::log(2.0 * M_PI);

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// (1-phi^2) x_1^2 + sum_{t>=2} (x_t - phi x_{t-1})^2
double ar_quad(CSpan x, double phi) {
  double q = (1.0 - phi * phi) * x[0] * x[0];
  for (std::size_t t = 1; t < x.size(); ++t) {
    const double d = x[t] - phi * x[t - 1];
    q += d * d;
  }
  return q;
}
}  // namespace

Vec SvHypers::transformed() const {
  return {std::log(beta), std::log(sigma * sigma), std::atanh(phi_ar)};
}

SvHypers SvHypers::from_transformed(CSpan phi_vec) {
  SvHypers h;
  h.beta = std::exp(phi_vec[0]);
  h.sigma = std::exp(0.5 * phi_vec[1]);
  h.phi_ar = std::tanh(phi_vec[2]);
  return h;
}

double sv_log_prior_sigma2(double sigma2, const SvPriors& p) {
  const double half_nu = 0.5 * p.nu;
  const double scale = half_nu * p.tau2;
  return half_nu * std::log(scale) - std::lgamma(half_nu) -
         (1.0 + half_nu) * std::log(sigma2) - scale / sigma2;
}

double sv_log_prior_sigma2_transformed(double s, const SvPriors& p) {
  return sv_log_prior_sigma2(std::exp(s), p) + s;  // + log-Jacobian
}

double sv_log_prior_phi(double phi_ar, const SvPriors& p) {
  const double u = 0.5 * (phi_ar + 1.0);
  return (p.beta_a - 1.0) * std::log(u) + (p.beta_b - 1.0) * std::log(1.0 - u) -
         log_beta_fn(p.beta_a, p.beta_b) - std::log(2.0);
}

double sv_log_prior_phi_transformed(double t, const SvPriors& p) {
  const double phi_ar = std::tanh(t);
  return sv_log_prior_phi(phi_ar, p) + std::log1p(-phi_ar * phi_ar);
}

SvTarget::SvTarget(Vec y, SvPriors priors)
    : HierarchicalTarget(y.size(), 3), y_(std::move(y)), priors_(priors) {
  if (y_.size() < 2) throw std::invalid_argument("sv: need T >= 2");
}

double SvTarget::log_lik(CSpan) const { return 0.0; }

double SvTarget::log_prior_theta(CSpan theta, CSpan phi) const {
  const double alpha = phi[0], s = phi[1], t = phi[2];
  const double phi_ar = std::tanh(t);
  const std::size_t T = theta.size();
  const double inv_b2 = std::exp(-2.0 * alpha);
  double obs = 0.0;
  for (std::size_t i = 0; i < T; ++i)
    obs += -0.5 * kLog2Pi - alpha - 0.5 * theta[i] -
           0.5 * y_[i] * y_[i] * std::exp(-theta[i]) * inv_b2;
  const double ar = -0.5 * static_cast<double>(T) * (kLog2Pi + s) +
                    0.5 * std::log1p(-phi_ar * phi_ar) -
                    0.5 * std::exp(-s) * ar_quad(theta, phi_ar);
  return obs + ar;
}

double SvTarget::log_hyperprior(CSpan phi) const {
  // alpha: p(beta) ~ 1/beta is exactly flat after the log transform.
  return sv_log_prior_sigma2_transformed(phi[1], priors_) +
         sv_log_prior_phi_transformed(phi[2], priors_);
}

void SvTarget::grad_theta(CSpan theta, CSpan phi, Span out) const {
  const double alpha = phi[0], s = phi[1], t = phi[2];
  const double phi_ar = std::tanh(t);
  const double inv_b2 = std::exp(-2.0 * alpha);
  const double inv_s2 = std::exp(-s);
  const std::size_t T = theta.size();
  for (std::size_t i = 0; i < T; ++i)
    out[i] = -0.5 + 0.5 * y_[i] * y_[i] * std::exp(-theta[i]) * inv_b2;
  // AR quadratic derivative.
  out[0] += -inv_s2 * ((1.0 - phi_ar * phi_ar) * theta[0] -
                       (T > 1 ? phi_ar * (theta[1] - phi_ar * theta[0]) : 0.0));
  for (std::size_t i = 1; i < T; ++i) {
    double g = theta[i] - phi_ar * theta[i - 1];
    if (i + 1 < T) g -= phi_ar * (theta[i + 1] - phi_ar * theta[i]);
    out[i] += -inv_s2 * g;
  }
}

void SvTarget::grad_phi(CSpan theta, CSpan phi, Span out) const {
  const double alpha = phi[0], s = phi[1], t = phi[2];
  const double phi_ar = std::tanh(t);
  const double one_m_phi2 = 1.0 - phi_ar * phi_ar;
  const double inv_b2 = std::exp(-2.0 * alpha);
  const double inv_s2 = std::exp(-s);
  const std::size_t T = theta.size();

  double g_alpha = 0.0;
  for (std::size_t i = 0; i < T; ++i)
    g_alpha += -1.0 + y_[i] * y_[i] * std::exp(-theta[i]) * inv_b2;

  const double q = ar_quad(theta, phi_ar);
  double g_s = -0.5 * static_cast<double>(T) + 0.5 * inv_s2 * q;
  g_s += -0.5 * priors_.nu + 0.5 * priors_.nu * priors_.tau2 * inv_s2;

  // dQ/dphi = -2 phi x_1^2 - 2 sum_{t>=2} (x_t - phi x_{t-1}) x_{t-1}
  double dq_dphi = -2.0 * phi_ar * theta[0] * theta[0];
  for (std::size_t i = 1; i < T; ++i)
    dq_dphi += -2.0 * (theta[i] - phi_ar * theta[i - 1]) * theta[i - 1];
  const double dar_dphi =
      -phi_ar / one_m_phi2 - 0.5 * inv_s2 * dq_dphi;
  const double u = 0.5 * (phi_ar + 1.0);
  const double dprior_dt =
      ((priors_.beta_a - 1.0) / u - (priors_.beta_b - 1.0) / (1.0 - u)) * 0.5 *
          one_m_phi2 -
      2.0 * phi_ar;
  out[0] = g_alpha;
  out[1] = g_s;
  out[2] = dar_dphi * one_m_phi2 + dprior_dt;
}

std::vector<std::string> SvTarget::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(theta_dim() + 3);
  for (std::size_t i = 0; i < theta_dim(); ++i)
    names.push_back("x" + std::to_string(i + 1));
  names.push_back("log_beta");
  names.push_back("log_sigma2");
  names.push_back("atanh_phi");
  return names;
}

SvMass::SvMass(std::size_t T)
    : T_(T), mass_phi_(MassOperator::scalar(3, 1.0)) {
  if (T < 2) throw std::invalid_argument("sv mass: need T >= 2");
}

SvMass::Entry& SvMass::entry_at(CSpan phi) {
  const double s = phi[1], t = phi[2];
  for (auto& slot : slots_)
    if (slot.used && slot.s == s && slot.t == t) return slot;
  const double phi_ar = std::tanh(t);
  const double inv_s2 = std::exp(-s);
  Entry& e = slots_[next_victim_];
  next_victim_ = 1 - next_victim_;
  e.diag.assign(T_, 0.5 + inv_s2 * (1.0 + phi_ar * phi_ar));
  e.diag.front() = 0.5 + inv_s2;
  e.diag.back() = 0.5 + inv_s2;
  e.off.assign(T_ - 1, -phi_ar * inv_s2);
  e.d.resize(T_);
  e.l.resize(T_ - 1);
  if (!kernels::tridiag_ldlt(e.diag, e.off, e.d.data(), e.l.data())) {
    e.used = false;
    throw NonPositiveDefiniteError("sv mass not positive definite");
  }
  e.op = MassOperator::tridiagonal(e.diag, e.off);
  e.s = s;
  e.t = t;
  e.used = true;
  return e;
}

const MassOperator& SvMass::mass_theta(CSpan phi) { return entry_at(phi).op; }

const MassOperator& SvMass::mass_phi(CSpan) { return mass_phi_; }

void SvMass::grad_aux_theta(CSpan phi, CSpan r_theta, Span out) {
  const Entry& e = entry_at(phi);
  const double s = phi[1], t = phi[2];
  const double phi_ar = std::tanh(t);
  const double one_m_phi2 = 1.0 - phi_ar * phi_ar;
  const double inv_s2 = std::exp(-s);

  Vec w(T_);
  kernels::tridiag_solve(e.d.data(), e.l.data(), T_, r_theta.data(), w.data());
  Vec zdiag(T_), zoff(T_ - 1);
  kernels::tridiag_inverse_band(e.d.data(), e.l.data(), T_, zdiag.data(),
                                zoff.data());

  // For a tridiagonal perturbation P: value = (tr(M^{-1}P) - w^T P w) / 2.
  auto half_diff = [&](const auto& pdiag, const auto& poff) {
    double tr = 0.0, quad = 0.0;
    for (std::size_t i = 0; i < T_; ++i) {
      tr += zdiag[i] * pdiag(i);
      quad += pdiag(i) * w[i] * w[i];
    }
    for (std::size_t i = 0; i + 1 < T_; ++i) {
      tr += 2.0 * zoff[i] * poff(i);
      quad += 2.0 * poff(i) * w[i] * w[i + 1];
    }
    return 0.5 * (tr - quad);
  };

  // dM/ds: diagonal -(m_ii - 1/2), off-diagonal +phi e^{-s}.
  out[0] = 0.0;  // alpha never enters the mass
  out[1] = half_diff([&](std::size_t i) { return -(e.diag[i] - 0.5); },
                     [&](std::size_t) { return phi_ar * inv_s2; });
  // dM/dt = dM/dphi * (1 - phi^2):
  //   diagonal e^{-s} (0, 2 phi, ..., 2 phi, 0), off-diagonal -e^{-s}.
  out[2] = half_diff(
      [&](std::size_t i) {
        const bool interior = i > 0 && i + 1 < T_;
        return interior ? 2.0 * phi_ar * inv_s2 * one_m_phi2 : 0.0;
      },
      [&](std::size_t) { return -inv_s2 * one_m_phi2; });
}

void SvMass::grad_aux_phi(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

std::unique_ptr<SemiSeparableMass> SvMass::clone() const {
  return std::make_unique<SvMass>(T_);
}

std::unique_ptr<SemiSeparableSystem> make_sv(Vec y, SvPriors priors) {
  auto target = std::make_shared<SvTarget>(std::move(y), priors);
  auto mass = std::make_shared<SvMass>(target->theta_dim());
  return std::make_unique<SemiSeparableSystem>(target, mass);
}

SvSimulation gen_sv_data(std::size_t T, const SvHypers& hypers,
                         std::uint64_t seed) {
  if (!(std::abs(hypers.phi_ar) < 1.0) || !(hypers.sigma > 0.0) ||
      !(hypers.beta > 0.0))
    throw std::invalid_argument("gen_sv_data: invalid hyperparameters");
  RngStream rng(seed);
  SvSimulation sim;
  sim.x_true.resize(T);
  sim.y.resize(T);
  const double stat_sd =
      hypers.sigma / std::sqrt(1.0 - hypers.phi_ar * hypers.phi_ar);
  sim.x_true[0] = stat_sd * rng.normal();
  for (std::size_t t = 1; t < T; ++t)
    sim.x_true[t] = hypers.phi_ar * sim.x_true[t - 1] + hypers.sigma * rng.normal();
  for (std::size_t t = 0; t < T; ++t)
    sim.y[t] = rng.normal() * hypers.beta * std::exp(0.5 * sim.x_true[t]);
  return sim;
}

}  // namespace sshmc::models
