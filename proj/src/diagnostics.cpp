#include "sshmc/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"

namespace sshmc {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double mean_of(std::span<const double> seq) {
  double acc = 0.0;
  for (double x : seq) acc += x;
  return acc / static_cast<double>(seq.size());
}

// gamma_k with the mean already subtracted.
double gamma_at(std::span<const double> centered, std::size_t lag) {
  const std::size_t n = centered.size();
  double acc = 0.0;
  for (std::size_t t = 0; t + lag < n; ++t)
    acc += centered[t] * centered[t + lag];
  return acc / static_cast<double>(n);
}

}  // namespace

std::vector<double> autocovariance(std::span<const double> seq,
                                   std::size_t max_lag) {
  if (seq.size() < 4)
    throw std::invalid_argument("autocovariance: need at least 4 points");
  if (max_lag >= seq.size())
    throw std::invalid_argument("autocovariance: max_lag must be < length");
  const double mu = mean_of(seq);
  std::vector<double> centered(seq.begin(), seq.end());
  for (double& x : centered) x -= mu;
  std::vector<double> gamma(max_lag + 1);
  for (std::size_t k = 0; k <= max_lag; ++k) gamma[k] = gamma_at(centered, k);
  if (gamma[0] == 0.0)
    throw DegenerateVarianceError("autocovariance: sequence is constant");
  return gamma;
}

std::vector<double> geyer_pair_sums(std::span<const double> seq) {
  const std::size_t n = seq.size();
  if (n < 10) throw std::invalid_argument("ess: need at least 10 points");
  const double mu = mean_of(seq);
  std::vector<double> centered(seq.begin(), seq.end());
  for (double& x : centered) x -= mu;
  const double g0 = gamma_at(centered, 0);
  if (g0 == 0.0 || !std::isfinite(g0))
    throw DegenerateVarianceError("ess: degenerate variance");

  // Pair sums rho_{2m} + rho_{2m+1}, computed lazily and truncated at the
  // first nonpositive pair, then forced nonincreasing.
  std::vector<double> pairs;
  double running_min = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    const double rho_even =
        (m == 0) ? 1.0 : gamma_at(centered, 2 * m) / g0;
    const double rho_odd = gamma_at(centered, 2 * m + 1) / g0;
    double pair = rho_even + rho_odd;
    if (pair <= 0.0) break;
    pair = std::min(pair, running_min);
    running_min = pair;
    pairs.push_back(pair);
  }
  return pairs;
}

double ess(std::span<const double> seq) {
  const auto pairs = geyer_pair_sums(seq);
  double tau = -1.0;
  for (double p : pairs) tau += 2.0 * p;
  const double n = static_cast<double>(seq.size());
  // Cap overshoot at 5% above N (tau floor 1/1.05), e.g. for antithetic
  // sequences whose true ESS exceeds N.
  tau = std::max(tau, 1.0 / 1.05);
  return n / tau;
}

DiagnosticsReport summarize(const ChainTrace& trace,
                            const std::vector<MomentTruth>& truths) {
  if (trace.retained == 0 || trace.dim == 0)
    throw std::invalid_argument("summarize: empty trace");

  DiagnosticsReport rep;
  rep.ess_per_dim.assign(trace.dim, kNan);
  rep.acceptance_rate = trace.acceptance_rate();
  rep.gradient_evaluations = trace.gradient_evaluations;
  rep.elapsed_seconds = trace.elapsed_seconds;

  std::vector<int> degenerate(trace.dim, 0);
#pragma omp parallel for schedule(dynamic) \
    num_threads(kernels::max_threads()) if (trace.dim > 4)
  for (long long j = 0; j < static_cast<long long>(trace.dim); ++j) {
    const std::vector<double> col = trace.column(static_cast<std::size_t>(j));
    try {
      rep.ess_per_dim[j] = ess(col);
    } catch (const DegenerateVarianceError&) {
      degenerate[j] = 1;
    } catch (const std::invalid_argument&) {
      degenerate[j] = 1;
    }
  }
  for (std::size_t j = 0; j < trace.dim; ++j)
    if (degenerate[j]) rep.degenerate_columns.push_back(trace.column_names[j]);

  std::vector<double> valid;
  valid.reserve(trace.dim);
  for (double e : rep.ess_per_dim)
    if (!std::isnan(e)) valid.push_back(e);
  if (!valid.empty()) {
    std::sort(valid.begin(), valid.end());
    rep.ess_min = valid.front();
    rep.ess_max = valid.back();
    const std::size_t h = valid.size() / 2;
    rep.ess_median = (valid.size() % 2) ? valid[h]
                                        : 0.5 * (valid[h - 1] + valid[h]);
    rep.min_ess_per_grad =
        trace.gradient_evaluations
            ? rep.ess_min / static_cast<double>(trace.gradient_evaluations)
            : 0.0;
    rep.min_ess_per_second =
        trace.elapsed_seconds > 0.0 ? rep.ess_min / trace.elapsed_seconds
                                    : 0.0;
  }

  for (const MomentTruth& t : truths) {
    const auto it = std::find(trace.column_names.begin(),
                              trace.column_names.end(), t.column);
    if (it == trace.column_names.end())
      throw std::invalid_argument("summarize: unknown truth column " +
                                  t.column);
    const std::size_t j =
        static_cast<std::size_t>(it - trace.column_names.begin());
    double m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < trace.retained; ++i) {
      const double x = trace.samples[i * trace.dim + j];
      m1 += x;
      m2 += x * x;
    }
    m1 /= static_cast<double>(trace.retained);
    m2 /= static_cast<double>(trace.retained);
    MomentError err;
    err.column = t.column;
    err.sample_mean = m1;
    err.sample_second_moment = m2;
    err.mean_sq_error = (m1 - t.mean) * (m1 - t.mean);
    err.second_moment_sq_error =
        (m2 - t.second_moment) * (m2 - t.second_moment);
    rep.moment_errors.push_back(err);
  }
  return rep;
}

}  // namespace sshmc
