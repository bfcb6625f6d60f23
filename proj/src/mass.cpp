#include "sshmc/mass.hpp"

#include <cmath>
#include <stdexcept>

#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"

namespace sshmc {

namespace {

void check_dim(std::size_t got, std::size_t want, const char* where) {
  if (got != want)
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
}

}  // namespace

MassOperator MassOperator::scalar(std::size_t dim, double value) {
  if (!(value > 0.0) || !std::isfinite(value))
    throw NonPositiveDefiniteError("scalar mass must be positive");
  MassOperator m;
  m.kind_ = Kind::Scalar;
  m.dim_ = dim;
  m.payload_ = {value};
  return m;
}

MassOperator MassOperator::diagonal(std::vector<double> diag) {
  for (double v : diag)
    if (!(v > 0.0) || !std::isfinite(v))
      throw NonPositiveDefiniteError("diagonal mass entry not positive");
  MassOperator m;
  m.kind_ = Kind::Diagonal;
  m.dim_ = diag.size();
  m.payload_ = std::move(diag);
  return m;
}

MassOperator MassOperator::tridiagonal(std::vector<double> diag,
                                       std::vector<double> off) {
  const std::size_t n = diag.size();
  if (off.size() + 1 != n)
    throw std::invalid_argument("tridiagonal mass: off-diagonal length");
  MassOperator m;
  m.kind_ = Kind::Tridiagonal;
  m.dim_ = n;
  m.payload_.resize(2 * n - 1);
  if (!kernels::tridiag_ldlt(diag, off, m.payload_.data(),
                             m.payload_.data() + n))
    throw NonPositiveDefiniteError("tridiagonal mass not positive definite");
  return m;
}

MassOperator MassOperator::dense(std::size_t dim, std::vector<double> a) {
  if (a.size() != dim * dim)
    throw std::invalid_argument("dense mass: size mismatch");
  if (!kernels::cholesky_upper_inplace(a.data(), dim))
    throw NonPositiveDefiniteError("dense mass not positive definite");
  MassOperator m;
  m.kind_ = Kind::Dense;
  m.dim_ = dim;
  m.payload_ = std::move(a);
  return m;
}

MassOperator MassOperator::dense_inverse(std::size_t dim,
                                         std::vector<double> s) {
  if (s.size() != dim * dim)
    throw std::invalid_argument("dense_inverse mass: size mismatch");
  if (!kernels::cholesky_upper_inplace(s.data(), dim))
    throw NonPositiveDefiniteError("inverse-form mass not positive definite");
  return dense_inverse_from_factor(dim, std::move(s));
}

MassOperator MassOperator::dense_inverse_from_factor(std::size_t dim,
                                                     std::vector<double> u) {
  if (u.size() != dim * dim)
    throw std::invalid_argument("dense_inverse mass: size mismatch");
  MassOperator m;
  m.kind_ = Kind::DenseInverse;
  m.dim_ = dim;
  m.payload_ = std::move(u);
  return m;
}

MassOperator MassOperator::block_dense(std::vector<std::vector<double>> blocks,
                                       std::vector<std::size_t> block_dims) {
  if (blocks.size() != block_dims.size())
    throw std::invalid_argument("block_dense mass: block count mismatch");
  std::size_t total = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const std::size_t d = block_dims[b];
    if (blocks[b].size() != d * d)
      throw std::invalid_argument("block_dense mass: block size mismatch");
    if (!kernels::cholesky_upper_inplace(blocks[b].data(), d))
      throw NonPositiveDefiniteError("mass block not positive definite");
    total += d;
  }
  MassOperator m;
  m.kind_ = Kind::BlockDense;
  m.dim_ = total;
  m.blocks_ = std::move(blocks);
  m.block_dims_ = std::move(block_dims);
  return m;
}

double MassOperator::quad_inv(std::span<const double> r) const {
  check_dim(r.size(), dim_, "quad_inv");
  std::vector<double> w(dim_);
  solve(r, w);
  return 0.5 * kernels::dot(r, w);
}

void MassOperator::solve(std::span<const double> r,
                         std::span<double> out) const {
  check_dim(r.size(), dim_, "solve");
  check_dim(out.size(), dim_, "solve");
  switch (kind_) {
    case Kind::Scalar: {
      const double inv = 1.0 / payload_[0];
      for (std::size_t i = 0; i < dim_; ++i) out[i] = r[i] * inv;
      break;
    }
    case Kind::Diagonal:
      for (std::size_t i = 0; i < dim_; ++i) out[i] = r[i] / payload_[i];
      break;
    case Kind::Tridiagonal:
      kernels::tridiag_solve(payload_.data(), payload_.data() + dim_, dim_,
                             r.data(), out.data());
      break;
    case Kind::Dense:
      kernels::chol_solve(payload_.data(), dim_, r.data(), out.data());
      break;
    case Kind::DenseInverse: {
      // M = S^{-1}, so M^{-1} r = S r = U^T (U r).
      std::vector<double> tmp(dim_, 0.0);
      const double* u = payload_.data();
      for (std::size_t i = 0; i < dim_; ++i) {
        const double* row = u + i * dim_;
        double acc = 0.0;
        for (std::size_t j = i; j < dim_; ++j) acc += row[j] * r[j];
        tmp[i] = acc;
      }
      kernels::upper_t_matvec(u, dim_, tmp.data(), out.data());
      break;
    }
    case Kind::BlockDense: {
      std::size_t offset = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::size_t d = block_dims_[b];
        kernels::chol_solve(blocks_[b].data(), d, r.data() + offset,
                            out.data() + offset);
        offset += d;
      }
      break;
    }
  }
}

void MassOperator::draw(RngStream& rng, std::span<double> out) const {
  check_dim(out.size(), dim_, "draw");
  std::vector<double> z(dim_);
  for (std::size_t i = 0; i < dim_; ++i) z[i] = rng.normal();
  switch (kind_) {
    case Kind::Scalar: {
      const double s = std::sqrt(payload_[0]);
      for (std::size_t i = 0; i < dim_; ++i) out[i] = s * z[i];
      break;
    }
    case Kind::Diagonal:
      for (std::size_t i = 0; i < dim_; ++i)
        out[i] = std::sqrt(payload_[i]) * z[i];
      break;
    case Kind::Tridiagonal:
      kernels::tridiag_scale_lower(payload_.data(), payload_.data() + dim_,
                                   dim_, z.data(), out.data());
      break;
    case Kind::Dense:
      // M = U^T U, so U^T z has covariance M.
      kernels::upper_t_matvec(payload_.data(), dim_, z.data(), out.data());
      break;
    case Kind::DenseInverse:
      // M = S^{-1} = U^{-1} U^{-T}; U^{-1} z has covariance M.
      kernels::solve_upper(payload_.data(), dim_, z.data(), out.data());
      break;
    case Kind::BlockDense: {
      std::size_t offset = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::size_t d = block_dims_[b];
        kernels::upper_t_matvec(blocks_[b].data(), d, z.data() + offset,
                                out.data() + offset);
        offset += d;
      }
      break;
    }
  }
}

namespace {
thread_local std::uint64_t g_log_det_calls = 0;
}

std::uint64_t MassOperator::log_det_calls() { return g_log_det_calls; }

double MassOperator::log_det() const {
  ++g_log_det_calls;
  switch (kind_) {
    case Kind::Scalar:
      return static_cast<double>(dim_) * std::log(payload_[0]);
    case Kind::Diagonal: {
      double acc = 0.0;
      for (double v : payload_) acc += std::log(v);
      return acc;
    }
    case Kind::Tridiagonal: {
      double acc = 0.0;
      for (std::size_t i = 0; i < dim_; ++i) acc += std::log(payload_[i]);
      return acc;
    }
    case Kind::Dense:
      return kernels::chol_logdet(payload_.data(), dim_);
    case Kind::DenseInverse:
      return -kernels::chol_logdet(payload_.data(), dim_);
    case Kind::BlockDense: {
      double acc = 0.0;
      for (std::size_t b = 0; b < blocks_.size(); ++b)
        acc += kernels::chol_logdet(blocks_[b].data(), block_dims_[b]);
      return acc;
    }
  }
  return 0.0;
}

double MassOperator::trace_inv() const {
  switch (kind_) {
    case Kind::Scalar:
      return static_cast<double>(dim_) / payload_[0];
    case Kind::Diagonal: {
      double acc = 0.0;
      for (double v : payload_) acc += 1.0 / v;
      return acc;
    }
    case Kind::Tridiagonal: {
      std::vector<double> zd(dim_), zo(dim_ - 1);
      kernels::tridiag_inverse_band(payload_.data(), payload_.data() + dim_,
                                    dim_, zd.data(), zo.data());
      double acc = 0.0;
      for (double v : zd) acc += v;
      return acc;
    }
    case Kind::Dense: {
      // tr(M^{-1}) = ||U^{-1}||_F^2; column solves against unit vectors.
      double acc = 0.0;
      std::vector<double> e(dim_), col(dim_);
      for (std::size_t j = 0; j < dim_; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        kernels::solve_upper(payload_.data(), dim_, e.data(), col.data());
        for (std::size_t i = 0; i < dim_; ++i) acc += col[i] * col[i];
      }
      return acc;
    }
    case Kind::DenseInverse: {
      // tr(S) for stored S = U^T U: sum of squares of U's columns.
      double acc = 0.0;
      for (std::size_t k = 0; k < dim_; ++k)
        for (std::size_t j = k; j < dim_; ++j) {
          const double v = payload_[k * dim_ + j];
          acc += v * v;
        }
      return acc;
    }
    case Kind::BlockDense: {
      double acc = 0.0;
      std::size_t offset = 0;
      for (std::size_t b = 0; b < blocks_.size(); ++b) {
        const std::size_t d = block_dims_[b];
        std::vector<double> e(d), col(d);
        for (std::size_t j = 0; j < d; ++j) {
          std::fill(e.begin(), e.end(), 0.0);
          e[j] = 1.0;
          kernels::solve_upper(blocks_[b].data(), d, e.data(), col.data());
          for (std::size_t i = 0; i < d; ++i) acc += col[i] * col[i];
        }
        offset += d;
      }
      return acc;
    }
  }
  return 0.0;
}

bool MassOperator::operator==(const MassOperator& other) const {
  return kind_ == other.kind_ && dim_ == other.dim_ &&
         payload_ == other.payload_ && blocks_ == other.blocks_ &&
         block_dims_ == other.block_dims_;
}

}  // namespace sshmc
