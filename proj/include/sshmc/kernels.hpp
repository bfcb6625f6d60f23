#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sshmc::kernels {

// Thread count used by the dispatching wrappers below. Defaults to the
// OpenMP maximum when built with OpenMP, 1 otherwise. All parallel kernels
// are map-style (each output element written by exactly one thread, no
// floating-point reductions across threads), so results are bit-identical
// to the serial reference at any thread count.
int max_threads();
void set_threads(int n);
bool parallel_enabled();

// ---------------------------------------------------------------------------
// Serial reference kernels. Kept independent of the parallel versions so the
// tests and the benchmark can compare the two.
// ---------------------------------------------------------------------------
namespace serial {

// y = A x for symmetric A stored row-major (full square).
void sym_matvec(const double* a, std::size_t n, const double* x, double* y);

// In-place upper Cholesky of a symmetric matrix stored row-major:
// on success the upper triangle holds U with U^T U = A (strict lower
// triangle left stale). Returns false on a nonpositive pivot.
bool cholesky_upper_inplace(double* a, std::size_t n);

// out[i*n+j] = scale * exp(-dist[i*n+j] * inv_range); dist is symmetric.
void exp_covariance(const double* dist, std::size_t n, double scale,
                    double inv_range, double* out);

// Full inverse of A = U^T U from its upper Cholesky factor, row-major out.
void chol_inverse(const double* u, std::size_t n, double* out);

}  // namespace serial

namespace par {

void sym_matvec(const double* a, std::size_t n, const double* x, double* y);
bool cholesky_upper_inplace(double* a, std::size_t n);
void exp_covariance(const double* dist, std::size_t n, double scale,
                    double inv_range, double* out);
void chol_inverse(const double* u, std::size_t n, double* out);

}  // namespace par

// Dispatching wrappers: parallel path when parallel_enabled(), else serial.
void sym_matvec(const double* a, std::size_t n, const double* x, double* y);
bool cholesky_upper_inplace(double* a, std::size_t n);
void exp_covariance(const double* dist, std::size_t n, double scale,
                    double inv_range, double* out);
void chol_inverse(const double* u, std::size_t n, double* out);

// ---------------------------------------------------------------------------
// Small dense helpers (serial; never hot enough to parallelize).
// ---------------------------------------------------------------------------
double dot(std::span<const double> x, std::span<const double> y);

// Solve U^T y = b (forward substitution on the transposed upper factor).
void solve_upper_t(const double* u, std::size_t n, const double* b, double* y);
// Solve U x = b (back substitution).
void solve_upper(const double* u, std::size_t n, const double* b, double* x);
// Solve (U^T U) x = b.
void chol_solve(const double* u, std::size_t n, const double* b, double* x);
// log det(U^T U) = 2 sum log u_kk.
double chol_logdet(const double* u, std::size_t n);
// x = U^T z (used to draw N(0, U^T U)).
void upper_t_matvec(const double* u, std::size_t n, const double* z, double* x);

// ---------------------------------------------------------------------------
// Symmetric tridiagonal LDL^T: diag has n entries, off has n-1.
// d gets the n pivots, l the n-1 unit-lower-bidiagonal multipliers.
// ---------------------------------------------------------------------------
bool tridiag_ldlt(std::span<const double> diag, std::span<const double> off,
                  double* d, double* l);
void tridiag_solve(const double* d, const double* l, std::size_t n,
                   const double* b, double* x);
// x = L D^{1/2} z (draw from N(0, L D L^T)).
void tridiag_scale_lower(const double* d, const double* l, std::size_t n,
                         const double* z, double* x);
// Tridiagonal band of (L D L^T)^{-1}: zdiag (n) and zoff (n-1).
void tridiag_inverse_band(const double* d, const double* l, std::size_t n,
                          double* zdiag, double* zoff);

// Determinant of a general square matrix via LU with partial pivoting.
// The input copy is consumed.
double lu_determinant(std::vector<double> a, std::size_t n);

}  // namespace sshmc::kernels
