// Experiment driver: run samplers from a config file, recompute diagnostics
// from saved traces, generate synthetic data sets, and audit gradients.
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sshmc/diagnostics.hpp"
#include "sshmc/io/config.hpp"
#include "sshmc/io/csv.hpp"
#include "sshmc/io/experiment.hpp"
#include "sshmc/io/statlog.hpp"
#include "sshmc/kernels.hpp"
#include "sshmc/models/lgcpp.hpp"
#include "sshmc/models/sv.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::vector<std::string>& overrides,
            std::optional<std::uint64_t> seed) {
  sshmc::io::ExperimentConfig cfg = sshmc::io::load_config_file(config_path);
  std::vector<std::string> all = overrides;
  if (seed) all.push_back("seed=" + std::to_string(*seed));
  sshmc::io::apply_overrides(cfg, all);

  const auto res = sshmc::io::run_experiment(cfg, out_dir);
  std::printf("model=%s sampler=%s retained=%zu acceptance=%.3f\n",
              cfg.model.c_str(), sshmc::to_string(cfg.sampler.kind).c_str(),
              res.trace.retained, res.report.acceptance_rate);
  std::printf("ess min/median/max = %.1f / %.1f / %.1f\n", res.report.ess_min,
              res.report.ess_median, res.report.ess_max);
  std::printf("gradient_evaluations=%llu min_ess_per_grad=%.3e elapsed=%.2fs\n",
              static_cast<unsigned long long>(res.trace.gradient_evaluations),
              res.report.min_ess_per_grad, res.trace.elapsed_seconds);
  for (const auto& f : res.written_files)
    std::printf("wrote %s\n", f.c_str());
  return 0;
}

int cmd_ess(const std::string& trace_path,
            const std::vector<std::string>& columns) {
  const auto t = sshmc::io::read_csv(trace_path);
  int failures = 0;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    const std::string& name = t.columns[j];
    if (name == "H_before" || name == "H_after" || name == "accepted")
      continue;
    if (!columns.empty() &&
        std::find(columns.begin(), columns.end(), name) == columns.end())
      continue;
    try {
      std::printf("%s: ess = %.2f (n = %zu)\n", name.c_str(),
                  sshmc::ess(t.data[j]), t.data[j].size());
    } catch (const std::exception& e) {
      std::printf("%s: degenerate (%s)\n", name.c_str(), e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}

int cmd_gen_data(const std::string& model, const std::string& out,
                 std::uint64_t seed, std::size_t sv_T, double sv_beta,
                 double sv_sigma, double sv_phi, std::size_t lg_d,
                 double lg_sigma, double lg_beta, double lg_mu) {
  namespace fs = std::filesystem;
  if (const auto parent = fs::path(out).parent_path(); !parent.empty())
    fs::create_directories(parent);
  if (model == "sv") {
    const auto sim = sshmc::models::gen_sv_data(
        sv_T, {sv_beta, sv_sigma, sv_phi}, seed);
    std::FILE* f = std::fopen(out.c_str(), "w");
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", out.c_str());
      return 1;
    }
    std::fprintf(f, "# generator = sv seed = %llu T = %zu\n",
                 static_cast<unsigned long long>(seed), sv_T);
    std::fprintf(f, "# true: beta = %.17g sigma = %.17g phi = %.17g\n",
                 sv_beta, sv_sigma, sv_phi);
    std::fprintf(f, "y,x_true\n");
    for (std::size_t t = 0; t < sv_T; ++t)
      std::fprintf(f, "%.17g,%.17g\n", sim.y[t], sim.x_true[t]);
    std::fclose(f);
  } else if (model == "lgcpp") {
    const auto sim =
        sshmc::models::gen_lgcpp_data(lg_d, lg_sigma, lg_beta, lg_mu, seed);
    std::FILE* f = std::fopen(out.c_str(), "w");
    if (!f) {
      std::fprintf(stderr, "cannot write %s\n", out.c_str());
      return 1;
    }
    std::fprintf(f, "# generator = lgcpp seed = %llu d = %zu\n",
                 static_cast<unsigned long long>(seed), lg_d);
    std::fprintf(f, "# true: sigma = %.17g beta = %.17g mu = %.17g\n",
                 lg_sigma, lg_beta, lg_mu);
    std::fprintf(f, "i,j,y,x_true\n");
    for (std::size_t a = 0; a < lg_d * lg_d; ++a)
      std::fprintf(f, "%zu,%zu,%.17g,%.17g\n", a / lg_d, a % lg_d,
                   sim.counts[a], sim.x_true[a]);
    std::fclose(f);
  } else if (model == "statlog") {
    sshmc::io::write_synthetic_statlog(out, seed);
  } else {
    std::fprintf(stderr, "unknown generator model: %s\n", model.c_str());
    return 1;
  }
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

int cmd_gradcheck(const std::string& model, int points, std::uint64_t seed,
                  const std::string& data_path) {
  sshmc::io::ExperimentConfig cfg;
  cfg.model = model;
  // Small instances: the audit is about derivatives, not scale.
  cfg.funnel_n = 6;
  cfg.lgcpp_d = 4;
  cfg.sv_T = 12;
  cfg.data_path = data_path;
  if (model == "hblr" && data_path.empty()) {
    // Synthesize a small Statlog-shaped file in a temp location.
    const std::string tmp =
        (std::filesystem::temp_directory_path() / "sshmc_gradcheck_statlog.txt")
            .string();
    sshmc::io::write_synthetic_statlog(tmp, seed);
    cfg.data_path = tmp;
  }
  const auto built = sshmc::io::build_experiment(cfg);
  const auto rep = sshmc::io::gradcheck(*built.system, points, seed);
  std::printf("gradcheck %s: worst relative error %.3e at %s\n", model.c_str(),
              rep.worst_rel_err, rep.worst_site.c_str());
  if (!rep.passed()) {
    std::printf("FAIL (tolerance 1e-5)\n");
    return 1;
  }
  std::printf("PASS\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-separable HMC samplers and benchmark experiments"};
  app.require_subcommand(1);

  int threads = 0;

  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed_override;
  auto* run = app.add_subcommand("run", "run an experiment from a config");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--override", overrides, "key=value override (repeatable)");
  std::uint64_t seed_val = 0;
  auto* seed_opt = run->add_option("--seed", seed_val, "seed override");
  run->add_option("--threads", threads, "kernel thread cap (0 = default)");

  std::string trace_path;
  std::vector<std::string> columns;
  auto* ess_cmd =
      app.add_subcommand("ess", "recompute ESS from a saved trace");
  ess_cmd->add_option("trace", trace_path, "trace.csv path")->required();
  ess_cmd->add_option("--col", columns, "columns to include (default: all)");

  std::string gen_model, gen_out = "data.csv";
  std::uint64_t gen_seed = 1;
  std::size_t sv_T = 200, lg_d = 16;
  double sv_beta = 0.65, sv_sigma = 0.15, sv_phi = 0.98;
  double lg_sigma = 1.9, lg_beta = 0.03, lg_mu = 0.0;
  auto* gen = app.add_subcommand("gen-data", "generate synthetic data");
  gen->add_option("--model", gen_model, "sv | lgcpp | statlog")->required();
  gen->add_option("--out", gen_out, "output file");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--T", sv_T, "sv: series length");
  gen->add_option("--sv-beta", sv_beta, "sv: true beta");
  gen->add_option("--sv-sigma", sv_sigma, "sv: true sigma");
  gen->add_option("--sv-phi", sv_phi, "sv: true phi");
  gen->add_option("--d", lg_d, "lgcpp: grid side");
  gen->add_option("--lg-sigma", lg_sigma, "lgcpp: true sigma");
  gen->add_option("--lg-beta", lg_beta, "lgcpp: true beta");
  gen->add_option("--mu", lg_mu, "lgcpp: latent mean");

  std::string gc_model, gc_data;
  int gc_points = 20;
  std::uint64_t gc_seed = 17;
  auto* gc = app.add_subcommand("gradcheck",
                                "finite-difference audit for a model preset");
  gc->add_option("--model", gc_model, "funnel | hblr | sv | lgcpp")
      ->required();
  gc->add_option("--points", gc_points, "number of random points");
  gc->add_option("--seed", gc_seed, "seed");
  gc->add_option("--data", gc_data, "optional data file (hblr)");

  CLI11_PARSE(app, argc, argv);

  if (threads > 0) sshmc::kernels::set_threads(threads);

  try {
    if (run->parsed())
      return cmd_run(config_path, out_dir, overrides,
                     seed_opt->count() ? std::optional<std::uint64_t>(seed_val)
                                       : std::nullopt);
    if (ess_cmd->parsed()) return cmd_ess(trace_path, columns);
    if (gen->parsed())
      return cmd_gen_data(gen_model, gen_out, gen_seed, sv_T, sv_beta,
                          sv_sigma, sv_phi, lg_d, lg_sigma, lg_beta, lg_mu);
    if (gc->parsed()) return cmd_gradcheck(gc_model, gc_points, gc_seed,
                                           gc_data);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
