#include "sshmc/models/hblr.hpp"

#include <cmath>
#include <stdexcept>

#include "sshmc/kernels.hpp"
#include "sshmc/rng.hpp"

namespace sshmc::models {

namespace {
const double kLog2Pi = std::log(2.0 * M_PI);

// log(1 + e^{-z}) without overflow.
double log1p_exp_neg(double z) {
  if (z > 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

std::size_t total_dim(const HblrData& data) {
  std::size_t n = 0;
  for (const auto& g : data.groups) n += g.d;
  return n;
}
}  // namespace

std::size_t HblrData::total_rows() const {
  std::size_t r = 0;
  for (const auto& g : groups) r += g.rows;
  return r;
}

HblrTarget::HblrTarget(HblrData data, double lambda)
    : HierarchicalTarget(total_dim(data), 1),
      data_(std::move(data)),
      lambda_(lambda) {
  if (data_.groups.empty())
    throw std::invalid_argument("hblr: need at least one group");
  for (const auto& g : data_.groups) {
    if (g.rows == 0) throw std::invalid_argument("hblr: empty group");
    if (g.x.size() != g.rows * g.d || g.y.size() != g.rows)
      throw std::invalid_argument("hblr: group shape mismatch");
  }
  if (!(lambda_ > 0.0)) throw std::invalid_argument("hblr: lambda must be > 0");
}

double HblrTarget::log_lik(CSpan theta) const {
  double acc = 0.0;
  std::size_t off = 0;
  for (const auto& g : data_.groups) {
    for (std::size_t j = 0; j < g.rows; ++j) {
      double z = 0.0;
      const double* row = g.x.data() + j * g.d;
      for (std::size_t k = 0; k < g.d; ++k) z += row[k] * theta[off + k];
      acc -= log1p_exp_neg(g.y[j] * z);  // log sigma(y z)
    }
    off += g.d;
  }
  return acc;
}

double HblrTarget::log_prior_theta(CSpan theta, CSpan phi) const {
  const double gamma = phi[0];
  const double inv_v = std::exp(-gamma);
  double acc = 0.0;
  std::size_t off = 0;
  for (const auto& g : data_.groups) {
    double q = 0.0;
    for (std::size_t k = 0; k < g.d; ++k)
      q += theta[off + k] * theta[off + k];
    acc += -0.5 * static_cast<double>(g.d) * (kLog2Pi + gamma) -
           0.5 * inv_v * q;
    off += g.d;
  }
  return acc;
}

double HblrTarget::log_hyperprior(CSpan phi) const {
  // v = e^gamma ~ Exp(lambda) plus the log-Jacobian gamma.
  const double gamma = phi[0];
  return std::log(lambda_) - lambda_ * std::exp(gamma) + gamma;
}

void HblrTarget::grad_theta(CSpan theta, CSpan phi, Span out) const {
  const double inv_v = std::exp(-phi[0]);
  std::size_t off = 0;
  for (const auto& g : data_.groups) {
    for (std::size_t k = 0; k < g.d; ++k) out[off + k] = 0.0;
    for (std::size_t j = 0; j < g.rows; ++j) {
      double z = 0.0;
      const double* row = g.x.data() + j * g.d;
      for (std::size_t k = 0; k < g.d; ++k) z += row[k] * theta[off + k];
      // d/dw log sigma(y z) = y x sigma(-y z)
      const double yz = g.y[j] * z;
      const double s = 1.0 / (1.0 + std::exp(yz));  // sigma(-y z)
      const double coef = g.y[j] * s;
      for (std::size_t k = 0; k < g.d; ++k) out[off + k] += coef * row[k];
    }
    for (std::size_t k = 0; k < g.d; ++k)
      out[off + k] -= inv_v * theta[off + k];
    off += g.d;
  }
}

void HblrTarget::grad_phi(CSpan theta, CSpan phi, Span out) const {
  const double gamma = phi[0];
  const double inv_v = std::exp(-gamma);
  double acc = 0.0;
  std::size_t off = 0;
  for (const auto& g : data_.groups) {
    double q = 0.0;
    for (std::size_t k = 0; k < g.d; ++k)
      q += theta[off + k] * theta[off + k];
    acc += -0.5 * static_cast<double>(g.d) + 0.5 * inv_v * q;
    off += g.d;
  }
  acc += -lambda_ * std::exp(gamma) + 1.0;
  out[0] = acc;
}

std::vector<std::string> HblrTarget::parameter_names() const {
  std::vector<std::string> names;
  names.reserve(theta_dim() + 1);
  for (std::size_t i = 0; i < data_.groups.size(); ++i) {
    const std::string base = i < data_.group_names.size()
                                 ? data_.group_names[i]
                                 : "g" + std::to_string(i + 1);
    for (std::size_t k = 0; k < data_.groups[i].d; ++k)
      names.push_back("w_" + base + "_" + std::to_string(k + 1));
  }
  names.push_back("gamma");
  return names;
}

HblrMass::HblrMass(std::shared_ptr<const HblrTarget> target)
    : target_(std::move(target)),
      // Conditional precision of gamma at prior-typical weights:
      // sum_i d_i/2 from the Gaussian prior plus the Exp(lambda) curvature.
      mass_phi_(MassOperator::scalar(
          1, 0.5 * static_cast<double>(target_->theta_dim()) +
                 target_->lambda())) {
  for (const auto& g : target_->data().groups) {
    std::vector<double> xtx(g.d * g.d, 0.0);
    for (std::size_t j = 0; j < g.rows; ++j) {
      const double* row = g.x.data() + j * g.d;
      for (std::size_t a = 0; a < g.d; ++a)
        for (std::size_t b = 0; b < g.d; ++b)
          xtx[a * g.d + b] += 0.25 * row[a] * row[b];
    }
    xtx_quarter_.push_back(std::move(xtx));
    block_dims_.push_back(g.d);
  }
}

const MassOperator& HblrMass::operator_at(double gamma) {
  for (const auto& slot : slots_)
    if (slot.used && slot.gamma == gamma) return slot.op;
  const double prior_prec = std::exp(-gamma);
  std::vector<std::vector<double>> blocks = xtx_quarter_;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t d = block_dims_[b];
    for (std::size_t k = 0; k < d; ++k) blocks[b][k * d + k] += prior_prec;
  }
  Slot& victim = slots_[next_victim_];
  next_victim_ = 1 - next_victim_;
  victim.op = MassOperator::block_dense(std::move(blocks), block_dims_);
  victim.gamma = gamma;
  victim.used = true;
  return victim.op;
}

const MassOperator& HblrMass::mass_theta(CSpan phi) {
  return operator_at(phi[0]);
}

const MassOperator& HblrMass::mass_phi(CSpan) { return mass_phi_; }

void HblrMass::grad_aux_theta(CSpan phi, CSpan r_theta, Span out) {
  // dM/dgamma = -e^{-gamma} I, so
  //   d/dgamma [A + log det M / 2]
  //     = e^{-gamma} (|M^{-1} r|^2 - tr(M^{-1})) / 2.
  const double gamma = phi[0];
  const MassOperator& m = operator_at(gamma);
  std::vector<double> w(m.dim());
  m.solve(r_theta, w);
  const double wsq = kernels::dot(w, w);
  out[0] = 0.5 * std::exp(-gamma) * (wsq - m.trace_inv());
}

void HblrMass::grad_aux_phi(CSpan, CSpan, Span out) {
  for (double& x : out) x = 0.0;
}

std::unique_ptr<SemiSeparableMass> HblrMass::clone() const {
  return std::make_unique<HblrMass>(target_);
}

std::unique_ptr<SemiSeparableSystem> make_hblr(HblrData data, double lambda) {
  auto target = std::make_shared<HblrTarget>(std::move(data), lambda);
  auto mass = std::make_shared<HblrMass>(target);
  return std::make_unique<SemiSeparableSystem>(target, mass);
}

HblrData gen_hblr_data(const std::vector<std::size_t>& sizes, std::size_t d,
                       std::uint64_t seed) {
  RngStream rng(seed);
  HblrData data;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    HblrGroup g;
    g.rows = sizes[i];
    g.d = d;
    g.x.resize(g.rows * d);
    g.y.resize(g.rows);
    std::vector<double> w_true(d);
    for (auto& v : w_true) v = rng.normal();
    for (std::size_t j = 0; j < g.rows; ++j) {
      double z = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double x = rng.normal();
        g.x[j * d + k] = x;
        z += x * w_true[k];
      }
      const double p = 1.0 / (1.0 + std::exp(-z));
      g.y[j] = rng.uniform() < p ? 1 : -1;
    }
    data.groups.push_back(std::move(g));
    data.group_names.push_back("g" + std::to_string(i + 1));
  }
  return data;
}

}  // namespace sshmc::models
