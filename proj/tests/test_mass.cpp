#include <cmath>
#include <vector>

#include "doctest.h"
#include "sshmc/error.hpp"
#include "sshmc/kernels.hpp"
#include "sshmc/mass.hpp"
#include "sshmc/rng.hpp"
#include "test_util.hpp"

using namespace sshmc;

namespace {

// Chi-square oracle shared by all representations: r ~ N(0, M) makes
// 2 * quad_inv(r) = r^T M^{-1} r a chi-square with dim degrees of freedom,
// so quad_inv itself has mean dim/2 and variance dim/2.
void check_draw_quad_statistics(const MassOperator& m, std::uint64_t seed) {
  const std::size_t dim = m.dim();
  const int draws = 10000;
  RngStream rng(seed);
  std::vector<double> r(dim);
  double acc = 0.0;
  for (int k = 0; k < draws; ++k) {
    m.draw(rng, r);
    const double q = m.quad_inv(r);
    REQUIRE(q >= 0.0);
    acc += q;
  }
  const double mean = acc / draws;
  const double want = 0.5 * static_cast<double>(dim);
  const double se = std::sqrt(0.5 * static_cast<double>(dim) / draws);
  CHECK(std::abs(mean - want) <= 5.0 * se);
}

std::vector<double> spd_matrix(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> b(n * n);
  for (double& x : b) x = rng.normal();
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += b[k * n + i] * b[k * n + j];
      a[i * n + j] = acc + (i == j ? static_cast<double>(n) : 0.0);
    }
  return a;
}

}  // namespace

TEST_CASE("scalar mass basics") {
  const auto m = MassOperator::scalar(4, 2.5);
  CHECK(m.dim() == 4);
  CHECK(m.log_det() == doctest::Approx(4.0 * std::log(2.5)));
  CHECK(m.trace_inv() == doctest::Approx(4.0 / 2.5));
  std::vector<double> r = {1.0, 2.0, 0.0, -1.0};
  CHECK(m.quad_inv(r) == doctest::Approx(0.5 * 6.0 / 2.5));
  std::vector<double> out(4);
  m.solve(r, out);
  CHECK(out[1] == doctest::Approx(2.0 / 2.5));
  CHECK(m.quad_inv(std::vector<double>(4, 0.0)) == 0.0);
}

TEST_CASE("scalar mass rejects nonpositive values") {
  CHECK_THROWS_AS(MassOperator::scalar(2, 0.0), NonPositiveDefiniteError);
  CHECK_THROWS_AS(MassOperator::scalar(2, -1.0), NonPositiveDefiniteError);
  CHECK_THROWS_AS(MassOperator::diagonal({1.0, -0.5}),
                  NonPositiveDefiniteError);
  CHECK_THROWS_AS(MassOperator::dense(2, {1.0, 2.0, 2.0, 1.0}),
                  NonPositiveDefiniteError);
}

TEST_CASE("dense mass log det and quadratic form") {
  // M = [[4, 2], [2, 3]]: det = 8, M^{-1} = [[3, -2], [-2, 4]] / 8
  const auto m = MassOperator::dense(2, {4.0, 2.0, 2.0, 3.0});
  CHECK(m.log_det() == doctest::Approx(std::log(8.0)));
  std::vector<double> r = {1.0, 1.0};
  // r^T M^{-1} r = (3 - 2 - 2 + 4)/8 = 3/8; quad_inv halves it.
  CHECK(m.quad_inv(r) == doctest::Approx(0.5 * 3.0 / 8.0));
  CHECK(m.trace_inv() == doctest::Approx(7.0 / 8.0));
}

TEST_CASE("dense_inverse represents the inverse operator") {
  const std::vector<double> s = {4.0, 2.0, 2.0, 3.0};
  const auto m = MassOperator::dense_inverse(2, s);
  // M = S^{-1}: log det M = -log det S, M^{-1} = S.
  CHECK(m.log_det() == doctest::Approx(-std::log(8.0)));
  std::vector<double> r = {1.0, 1.0}, out(2);
  m.solve(r, out);  // S r = [6, 5]
  CHECK(out[0] == doctest::Approx(6.0));
  CHECK(out[1] == doctest::Approx(5.0));
  CHECK(m.quad_inv(r) == doctest::Approx(0.5 * 11.0));
  CHECK(m.trace_inv() == doctest::Approx(7.0));  // tr(S)
}

TEST_CASE("block_dense behaves like the dense equivalent") {
  const auto blocks = MassOperator::block_dense(
      {{4.0, 2.0, 2.0, 3.0}, {2.0}}, {2, 1});
  CHECK(blocks.dim() == 3);
  CHECK(blocks.log_det() == doctest::Approx(std::log(8.0) + std::log(2.0)));
  std::vector<double> r = {1.0, 1.0, 2.0};
  CHECK(blocks.quad_inv(r) == doctest::Approx(0.5 * (3.0 / 8.0 + 4.0 / 2.0)));
  CHECK(blocks.trace_inv() == doctest::Approx(7.0 / 8.0 + 0.5));
}

TEST_CASE("tridiagonal mass matches its dense counterpart") {
  std::vector<double> diag = {3.0, 4.0, 3.5, 5.0};
  std::vector<double> off = {-1.0, 1.2, -0.8};
  const auto tri = MassOperator::tridiagonal(diag, off);
  std::vector<double> dense(16, 0.0);
  for (std::size_t i = 0; i < 4; ++i) {
    dense[i * 4 + i] = diag[i];
    if (i + 1 < 4) dense[i * 4 + i + 1] = dense[(i + 1) * 4 + i] = off[i];
  }
  const auto dm = MassOperator::dense(4, dense);
  CHECK(tri.log_det() == doctest::Approx(dm.log_det()));
  CHECK(tri.trace_inv() == doctest::Approx(dm.trace_inv()));
  std::vector<double> r = {0.3, -1.0, 2.0, 0.5};
  CHECK(tri.quad_inv(r) == doctest::Approx(dm.quad_inv(r)));
}

TEST_CASE("draw/quad_inv expectation is dim/2 for every representation") {
  check_draw_quad_statistics(MassOperator::scalar(6, 3.0), 101);
  check_draw_quad_statistics(MassOperator::diagonal({0.5, 2.0, 1.0, 4.0}),
                             102);
  check_draw_quad_statistics(
      MassOperator::tridiagonal({3.0, 4.0, 3.5, 5.0}, {-1.0, 1.2, -0.8}),
      103);
  check_draw_quad_statistics(MassOperator::dense(5, spd_matrix(5, 17)), 104);
  check_draw_quad_statistics(MassOperator::dense_inverse(5, spd_matrix(5, 19)),
                             105);
  check_draw_quad_statistics(
      MassOperator::block_dense({spd_matrix(3, 23), spd_matrix(2, 29)},
                                {3, 2}),
      106);
}

TEST_CASE("identity draws have unit per-coordinate variance") {
  const auto m = MassOperator::scalar(1, 1.0);
  RngStream rng(999);
  const int draws = 10000;
  std::vector<double> xs(draws), r(1);
  for (int k = 0; k < draws; ++k) {
    m.draw(rng, r);
    xs[k] = r[0];
  }
  const double var = testutil::variance(xs);
  CHECK(var > 0.94);
  CHECK(var < 1.06);
}

TEST_CASE("dense draws reproduce the target covariance") {
  const std::vector<double> s = {2.0, 0.8, 0.8, 1.0};
  const auto m = MassOperator::dense(2, s);
  RngStream rng(4242);
  const int draws = 20000;
  double c00 = 0.0, c01 = 0.0, c11 = 0.0;
  std::vector<double> r(2);
  for (int k = 0; k < draws; ++k) {
    m.draw(rng, r);
    c00 += r[0] * r[0];
    c01 += r[0] * r[1];
    c11 += r[1] * r[1];
  }
  CHECK(c00 / draws == doctest::Approx(2.0).epsilon(0.06));
  CHECK(c01 / draws == doctest::Approx(0.8).epsilon(0.12));
  CHECK(c11 / draws == doctest::Approx(1.0).epsilon(0.06));
}

TEST_CASE("fixed seed gives identical draws") {
  const auto m = MassOperator::dense(3, spd_matrix(3, 31));
  std::vector<double> a(3), b(3);
  {
    RngStream rng(77);
    m.draw(rng, a);
  }
  {
    RngStream rng(77);
    m.draw(rng, b);
  }
  CHECK(a == b);
}
