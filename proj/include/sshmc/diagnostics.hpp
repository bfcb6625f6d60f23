#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sshmc/sample.hpp"

namespace sshmc {

// Biased (1/N) autocovariance estimates at lags 0..max_lag.
// Throws DegenerateVarianceError when the lag-0 value is zero.
std::vector<double> autocovariance(std::span<const double> seq,
                                   std::size_t max_lag);

// Effective sample size, N / (1 + 2 sum rho_k), with the sum truncated where
// the first even-odd autocorrelation pair goes nonpositive and the pair sums
// forced nonincreasing (Geyer's initial monotone positive sequence). The
// result is capped at 1.05 * N to absorb estimator overshoot on antithetic
// sequences.
double ess(std::span<const double> seq);

// Truncated monotone pair sums used by ess(); exposed for the property
// tests. Entry 0 is 1 + rho_1.
std::vector<double> geyer_pair_sums(std::span<const double> seq);

struct MomentTruth {
  std::string column;
  double mean = 0.0;
  double second_moment = 0.0;
};

struct MomentError {
  std::string column;
  double mean_sq_error = 0.0;
  double second_moment_sq_error = 0.0;
  double sample_mean = 0.0;
  double sample_second_moment = 0.0;
};

struct DiagnosticsReport {
  std::vector<double> ess_per_dim;  // NaN where the column is degenerate
  double ess_min = 0.0;
  double ess_median = 0.0;
  double ess_max = 0.0;
  double acceptance_rate = 0.0;
  std::uint64_t gradient_evaluations = 0;
  double min_ess_per_grad = 0.0;   // primary, hardware-independent
  double min_ess_per_second = 0.0; // secondary, for local comparisons
  double elapsed_seconds = 0.0;
  std::vector<std::string> degenerate_columns;
  std::vector<MomentError> moment_errors;
};

// Per-dimension ESS (computed concurrently when OpenMP is available),
// acceptance rate, budget-normalized ESS, and squared moment errors for any
// supplied truths. Degenerate columns become NaN entries plus a name in
// degenerate_columns; they are excluded from the min/median/max.
DiagnosticsReport summarize(const ChainTrace& trace,
                            const std::vector<MomentTruth>& truths = {});

}  // namespace sshmc
