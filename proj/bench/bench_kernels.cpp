// Timing harness for the serial reference kernels vs their OpenMP
// counterparts, plus an end-to-end sampler comparison on the heaviest
// model. Build and run:  ./bench_kernels [reps]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "sshmc/diagnostics.hpp"
#include "sshmc/kernels.hpp"
#include "sshmc/models/lgcpp.hpp"
#include "sshmc/rng.hpp"
#include "sshmc/sample.hpp"

using namespace sshmc;
using Clock = std::chrono::steady_clock;

namespace {

double time_of(const std::function<void()>& fn, int reps) {
  fn();  // warm up
  const auto t0 = Clock::now();
  for (int r = 0; r < reps; ++r) fn();
  const auto t1 = Clock::now();
  return std::chrono::duration<double>(t1 - t0).count() / reps;
}

std::vector<double> random_spd(std::size_t n, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = 0.5 * rng.normal() / std::sqrt(static_cast<double>(n));
      a[i * n + j] += v;
      a[j * n + i] += v;
    }
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] += 2.0;
  return a;
}

void report(const char* name, double serial_s, double par_s, double flops) {
  std::printf("%-28s serial %8.3f ms (%7.2f GF/s)   omp %8.3f ms (%7.2f "
              "GF/s)   speedup %.2fx\n",
              name, serial_s * 1e3, flops / serial_s * 1e-9, par_s * 1e3,
              flops / par_s * 1e-9, serial_s / par_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 5;
  std::printf("threads: %d\n\n", kernels::max_threads());

  for (std::size_t n : {256, 512, 1024}) {
    const auto a0 = random_spd(n, n);
    std::vector<double> a(n * n);
    const double chol_flops = n * n * n / 3.0;
    const double serial_t = time_of(
        [&] {
          a = a0;
          kernels::serial::cholesky_upper_inplace(a.data(), n);
        },
        reps);
    const double par_t = time_of(
        [&] {
          a = a0;
          kernels::par::cholesky_upper_inplace(a.data(), n);
        },
        reps);
    report(("cholesky n=" + std::to_string(n)).c_str(), serial_t, par_t,
           chol_flops);
  }

  for (std::size_t n : {512, 1024}) {
    const auto a = random_spd(n, n + 1);
    std::vector<double> x(n, 1.0), y(n);
    const double flops = 2.0 * n * n;
    const double serial_t = time_of(
        [&] { kernels::serial::sym_matvec(a.data(), n, x.data(), y.data()); },
        reps * 20);
    const double par_t = time_of(
        [&] { kernels::par::sym_matvec(a.data(), n, x.data(), y.data()); },
        reps * 20);
    report(("sym_matvec n=" + std::to_string(n)).c_str(), serial_t, par_t,
           flops);
  }

  {
    const std::size_t n = 1024;
    std::vector<double> dist(n * n), cov(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        dist[i * n + j] = std::abs(double(i) - double(j));
    const double flops = 2.0 * n * n;  // one exp + one multiply per entry
    const double serial_t = time_of(
        [&] {
          kernels::serial::exp_covariance(dist.data(), n, 2.0, 0.3,
                                          cov.data());
        },
        reps);
    const double par_t = time_of(
        [&] {
          kernels::par::exp_covariance(dist.data(), n, 2.0, 0.3, cov.data());
        },
        reps);
    report("exp_covariance n=1024", serial_t, par_t, flops);
  }

  {
    const std::size_t n = 384;
    auto a = random_spd(n, 9);
    kernels::serial::cholesky_upper_inplace(a.data(), n);
    std::vector<double> inv(n * n);
    const double flops = 2.0 * n * n * n / 3.0;
    const double serial_t = time_of(
        [&] { kernels::serial::chol_inverse(a.data(), n, inv.data()); }, reps);
    const double par_t = time_of(
        [&] { kernels::par::chol_inverse(a.data(), n, inv.data()); }, reps);
    report("chol_inverse n=384", serial_t, par_t, flops);
  }

  {
    // Per-dimension ESS batch: parallel inside summarize().
    RngStream rng(3);
    ChainTrace t;
    t.dim = 128;
    t.retained = 4000;
    t.samples.resize(t.dim * t.retained);
    for (auto& v : t.samples) v = rng.normal();
    for (std::size_t i = 1; i < t.retained; ++i)
      for (std::size_t j = 0; j < t.dim; ++j)
        t.samples[i * t.dim + j] =
            0.8 * t.samples[(i - 1) * t.dim + j] +
            0.6 * t.samples[i * t.dim + j];
    for (std::size_t j = 0; j < t.dim; ++j)
      t.column_names.push_back("c" + std::to_string(j));
    t.accepted.assign(100, 1.0);
    t.gradient_evaluations = 1;

    const int saved = kernels::max_threads();
    kernels::set_threads(1);
    const double serial_t = time_of([&] { summarize(t); }, reps);
    kernels::set_threads(saved);
    const double par_t = time_of([&] { summarize(t); }, reps);
    std::printf("%-28s serial %8.3f ms                omp %8.3f ms       "
                "        speedup %.2fx\n",
                "ess batch 128 x 4000", serial_t * 1e3, par_t * 1e3,
                serial_t / par_t);
  }

  {
    // End to end: 30 SSHMC iterations of the d=16 latent-field model.
    const std::size_t d = 16;
    const double mu = std::log(256.0) - 0.5 * 1.9 * 1.9;
    const auto sim = models::gen_lgcpp_data(d, 1.9, 0.03, mu, 1);
    auto run30 = [&] {
      models::LgcppConfig c;
      c.d = d;
      c.mu = mu;
      auto sys = models::make_lgcpp(c, sim.counts);
      SamplerConfig cfg;
      cfg.kind = SamplerKind::Sshmc;
      cfg.abla = {0.15, 0.02, 2, 1, 10, 1000.0};
      cfg.n_iter = 30;
      cfg.seed = 2;
      BlockState init = BlockState::zeros(256, 2);
      for (auto& x : init.theta) x = mu;
      init.phi = {0.0, -std::log(16.0)};
      run_chain(*sys, cfg, init);
    };
    const int saved = kernels::max_threads();
    kernels::set_threads(1);
    const double serial_t = time_of(run30, 1);
    kernels::set_threads(saved);
    const double par_t = time_of(run30, 1);
    std::printf("%-28s serial %8.1f ms                omp %8.1f ms       "
                "        speedup %.2fx\n",
                "sshmc lgcpp d=16, 30 iter", serial_t * 1e3, par_t * 1e3,
                serial_t / par_t);
  }
  return 0;
}
