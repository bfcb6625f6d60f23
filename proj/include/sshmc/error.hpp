#pragma once

#include <stdexcept>
#include <string>

namespace sshmc {

// Mass-operator factorization hit a nonpositive pivot.
struct NonPositiveDefiniteError : std::runtime_error {
  explicit NonPositiveDefiniteError(const std::string& what)
      : std::runtime_error(what) {}
};

// A sequence handed to the diagnostics has zero lag-0 autocovariance.
struct DegenerateVarianceError : std::runtime_error {
  explicit DegenerateVarianceError(const std::string& what)
      : std::runtime_error(what) {}
};

// Configuration text failed to parse or validate.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A data file is malformed; row is 1-based, 0 when not applicable.
struct DataFormatError : std::runtime_error {
  DataFormatError(const std::string& what, std::size_t row = 0)
      : std::runtime_error(row ? what + " (row " + std::to_string(row) + ")"
                               : what),
        row(row) {}
  std::size_t row;
};

// Raised inside an integrator when |dH| blows past the cap or a coordinate
// goes non-finite; samplers convert it into a rejection.
struct TrajectoryDivergence : std::runtime_error {
  explicit TrajectoryDivergence(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace sshmc
