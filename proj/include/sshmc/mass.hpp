#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "sshmc/rng.hpp"

namespace sshmc {

// Momentum covariance operator. Construction factorizes immediately and
// throws NonPositiveDefiniteError if the matrix is not s.p.d.
//
// Conventions used throughout the library:
//   - a momentum refresh draws r ~ N(0, M),
//   - the kinetic / auxiliary-potential value is quad_inv(r) = r^T M^{-1} r / 2,
//   - log_det() is log det M.
class MassOperator {
 public:
  enum class Kind { Scalar, Diagonal, Tridiagonal, Dense, DenseInverse, BlockDense };

  // value * identity, value > 0.
  static MassOperator scalar(std::size_t dim, double value);
  static MassOperator diagonal(std::vector<double> diag);
  // Symmetric tridiagonal: diag (n), off (n-1).
  static MassOperator tridiagonal(std::vector<double> diag,
                                  std::vector<double> off);
  // Dense symmetric p.d., row-major full square.
  static MassOperator dense(std::size_t dim, std::vector<double> a);
  // Operator equal to the INVERSE of the given dense s.p.d. matrix S.
  // Stores the factorization of S; M = S^{-1}, so solve() multiplies by S
  // and log_det() is -log det S.
  static MassOperator dense_inverse(std::size_t dim, std::vector<double> s);
  // Same operator, built from an already-computed upper Cholesky factor of
  // S (callers that cache the factorization avoid refactorizing here).
  static MassOperator dense_inverse_from_factor(std::size_t dim,
                                                std::vector<double> u);
  // Block-diagonal with dense s.p.d. blocks.
  static MassOperator block_dense(std::vector<std::vector<double>> blocks,
                                  std::vector<std::size_t> block_dims);

  std::size_t dim() const { return dim_; }
  Kind kind() const { return kind_; }

  // r^T M^{-1} r / 2  (the auxiliary potential A(r | .)).
  double quad_inv(std::span<const double> r) const;
  // out = M^{-1} r.
  void solve(std::span<const double> r, std::span<double> out) const;
  // out ~ N(0, M), consuming dim() normal deviates in index order.
  void draw(RngStream& rng, std::span<double> out) const;
  double log_det() const;
  // trace of M^{-1}; used by the mass-gradient formulas.
  double trace_inv() const;

  // Per-thread count of log_det() calls since process start. Test
  // instrumentation for asserting that algebraically cancelled
  // log-determinants are truly never requested.
  static std::uint64_t log_det_calls();

  bool operator==(const MassOperator& other) const;

 private:
  MassOperator() = default;

  Kind kind_{};
  std::size_t dim_ = 0;
  // Scalar: payload_[0] = value. Diagonal: payload_ = diag.
  // Tridiagonal: ldlt pivots d (n) then multipliers l (n-1).
  // Dense / DenseInverse: upper Cholesky factor of the stored matrix.
  std::vector<double> payload_;
  // BlockDense: per-block upper factors and dimensions.
  std::vector<std::vector<double>> blocks_;
  std::vector<std::size_t> block_dims_;
};

}  // namespace sshmc
