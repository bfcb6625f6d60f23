#include "sshmc/io/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sshmc/energy.hpp"
#include "sshmc/error.hpp"
#include "sshmc/integrate.hpp"
#include "sshmc/io/csv.hpp"
#include "sshmc/io/statlog.hpp"
#include "sshmc/models/funnel.hpp"
#include "sshmc/models/hblr.hpp"
#include "sshmc/models/lgcpp.hpp"
#include "sshmc/models/sv.hpp"

namespace sshmc::io {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Vec load_single_column(const std::string& path, const std::string& column) {
  const LoadedTrace t = read_csv(path);
  for (std::size_t j = 0; j < t.columns.size(); ++j)
    if (t.columns[j] == column) return t.data[j];
  throw DataFormatError("missing column '" + column + "' in " + path);
}

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
  BuiltExperiment built;
  if (cfg.model == "funnel") {
    built.system = models::make_funnel(cfg.funnel_n);
    built.init = BlockState::zeros(cfg.funnel_n, 1);
    built.truths = {{"v", 0.0, 9.0}};
    built.true_values = {{"E[v]", 0.0}, {"E[v^2]", 9.0}};
  } else if (cfg.model == "hblr") {
    const std::string path = resolve_statlog_path(cfg.data_path);
    if (path.empty())
      throw ConfigError(
          "hblr: no data file (set data.path or SSHMC_DATA_DIR)");
    models::HblrData data = load_statlog(path);
    built.system = models::make_hblr(std::move(data), cfg.hblr_lambda);
    built.init =
        BlockState::zeros(built.system->theta_dim(), built.system->phi_dim());
  } else if (cfg.model == "sv") {
    models::SvPriors priors{cfg.sv_nu, cfg.sv_tau2, cfg.sv_beta_a,
                            cfg.sv_beta_b};
    Vec y;
    if (!cfg.data_path.empty()) {
      y = load_single_column(cfg.data_path, "y");
    } else {
      models::SvHypers hypers{cfg.sv_true_beta, cfg.sv_true_sigma,
                              cfg.sv_true_phi};
      y = models::gen_sv_data(cfg.sv_T, hypers, cfg.data_seed).y;
      built.true_values = {{"beta", cfg.sv_true_beta},
                           {"sigma", cfg.sv_true_sigma},
                           {"phi", cfg.sv_true_phi}};
    }
    built.system = models::make_sv(std::move(y), priors);
    built.init =
        BlockState::zeros(built.system->theta_dim(), built.system->phi_dim());
    // Start the hyperparameters at their prior centers (transformed).
    const double s0 = std::log(priors.nu * priors.tau2 / (priors.nu - 2.0));
    const double phi0 =
        2.0 * priors.beta_a / (priors.beta_a + priors.beta_b) - 1.0;
    built.init.phi = {0.0, s0, std::atanh(phi0)};
  } else if (cfg.model == "lgcpp") {
    models::LgcppConfig mcfg;
    mcfg.d = cfg.lgcpp_d;
    mcfg.mu = cfg.lgcpp_mu;
    mcfg.prior_sd = cfg.lgcpp_prior_sd;
    Vec counts;
    if (!cfg.data_path.empty()) {
      counts = load_single_column(cfg.data_path, "y");
    } else {
      counts = models::gen_lgcpp_data(cfg.lgcpp_d, cfg.lgcpp_true_sigma,
                                      cfg.lgcpp_true_beta, cfg.lgcpp_mu,
                                      cfg.data_seed)
                   .counts;
      built.true_values = {{"sigma", cfg.lgcpp_true_sigma},
                           {"beta", cfg.lgcpp_true_beta}};
    }
    built.system = models::make_lgcpp(mcfg, std::move(counts));
    built.init =
        BlockState::zeros(built.system->theta_dim(), built.system->phi_dim());
    // Latent field starts at its prior mean; hyperparameters start at the
    // hyperprior centers. log beta = 0 (a d-cell correlation range) would
    // start on a numerically singular covariance.
    for (auto& x : built.init.theta) x = cfg.lgcpp_mu;
    built.init.phi = {mcfg.prior_mean_log_sigma,
                      mcfg.resolved_prior_mean_log_beta()};
  } else {
    throw ConfigError("unknown model: " + cfg.model);
  }
  return built;
}

namespace {

void write_outputs(const ExperimentConfig& cfg, const BuiltExperiment& built,
                   ExperimentResult& res,
                   const std::vector<std::string>& comments,
                   const std::string& out_dir) {
  if (cfg.emit_trace) {
    const std::string path = out_dir + "/trace.csv";
    write_trace_csv(path, res.trace, comments);
    res.written_files.push_back(path);
  }
  if (cfg.emit_energy_trace) {
    const std::string path = out_dir + "/energy_trace.csv";
    write_energy_csv(path, res.trace, comments);
    res.written_files.push_back(path);
  }
  if (!cfg.emit_histogram.empty()) {
    const std::string path = out_dir + "/hist_" + cfg.emit_histogram + ".csv";
    write_histogram_csv(
        path, emit_histogram(res.trace, cfg.emit_histogram,
                             cfg.histogram_bins),
        comments);
    res.written_files.push_back(path);
  }
  if (cfg.emit_summary) {
    std::vector<std::pair<std::string, std::string>> fields;
    fields.emplace_back("model", cfg.model);
    fields.emplace_back("sampler", to_string(cfg.sampler.kind));
    fields.emplace_back("n_iter", std::to_string(cfg.sampler.n_iter));
    fields.emplace_back("burn_in", std::to_string(cfg.sampler.burn_in));
    fields.emplace_back("thin", std::to_string(cfg.sampler.thin));
    fields.emplace_back("retained", std::to_string(res.trace.retained));
    fields.emplace_back("acceptance_rate", fmt(res.report.acceptance_rate));
    fields.emplace_back("gradient_evaluations",
                        std::to_string(res.trace.gradient_evaluations));
    fields.emplace_back("elapsed_seconds", fmt(res.trace.elapsed_seconds));
    fields.emplace_back("ess_min", fmt(res.report.ess_min));
    fields.emplace_back("ess_median", fmt(res.report.ess_median));
    fields.emplace_back("ess_max", fmt(res.report.ess_max));
    fields.emplace_back("min_ess_per_grad", fmt(res.report.min_ess_per_grad));
    fields.emplace_back("min_ess_per_second",
                        fmt(res.report.min_ess_per_second));
    for (const auto& [name, value] : built.true_values)
      fields.emplace_back("true." + name, fmt(value));
    // Posterior means of the hyperparameter block.
    const std::size_t n = built.system->theta_dim();
    const std::size_t m = built.system->phi_dim();
    for (std::size_t j = n; j < n + m; ++j) {
      const auto col = res.trace.column(j);
      double mean = 0.0;
      for (double x : col) mean += x;
      mean /= static_cast<double>(col.size());
      fields.emplace_back("posterior_mean." + res.trace.column_names[j],
                          fmt(mean));
    }
    for (const auto& me : res.report.moment_errors) {
      fields.emplace_back("moment_error." + me.column + ".mean_sq",
                          fmt(me.mean_sq_error));
      fields.emplace_back("moment_error." + me.column + ".second_moment_sq",
                          fmt(me.second_moment_sq_error));
    }
    for (std::size_t j = 0; j < res.trace.dim; ++j)
      fields.emplace_back("ess." + res.trace.column_names[j],
                          fmt(res.report.ess_per_dim[j]));
    const std::string path = out_dir + "/summary.txt";
    write_summary_text(path, comments, fields);
    res.written_files.push_back(path);
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  BuiltExperiment built = build_experiment(cfg);

  ExperimentResult res;
  res.trace = run_chain(*built.system, cfg.sampler, built.init);
  res.report = summarize(res.trace, built.truths);

  std::vector<std::string> comments;
  comments.push_back("config_hash = " + config_hash(cfg));
  comments.push_back("seed = " + std::to_string(cfg.sampler.seed));
  {
    std::istringstream rendered(render(cfg));
    std::string line;
    while (std::getline(rendered, line)) comments.push_back("config: " + line);
  }

  // On any failure, remove whatever was already written: a run either
  // produces its full set of outputs or none of them.
  try {
    write_outputs(cfg, built, res, comments, out_dir);
  } catch (...) {
    for (const auto& path : res.written_files) std::remove(path.c_str());
    throw;
  }
  return res;
}

GradCheckReport gradcheck(const SemiSeparableSystem& sys, int points,
                          std::uint64_t seed) {
  const HierarchicalTarget& target = sys.target();
  SemiSeparableMass& mass = sys.mass();
  const std::size_t n = target.theta_dim();
  const std::size_t m = target.phi_dim();
  RngStream rng(seed);
  GradCheckReport rep;

  auto note = [&](double err, const std::string& site) {
    if (err > rep.worst_rel_err) {
      rep.worst_rel_err = err;
      rep.worst_site = site;
    }
  };
  // Componentwise relative error with a floor tied to the gradient
  // vector's scale: a near-zero component of a large gradient is compared
  // against the vector norm, where the finite-difference oracle is pure
  // cancellation noise.
  auto vec_norm = [](const Vec& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
  };
  auto rel = [](double got, double want, double scale) {
    const double denom =
        std::max({std::abs(got), std::abs(want), 1e-3 * (1.0 + scale)});
    return std::abs(got - want) / denom;
  };

  for (int p = 0; p < points; ++p) {
    Vec theta(n), phi(m), r_theta(n), r_phi(m);
    for (auto& x : theta) x = 0.5 * rng.normal();
    for (auto& x : phi) x = 0.4 * rng.normal();
    for (auto& x : r_theta) x = rng.normal();
    for (auto& x : r_phi) x = rng.normal();

    Vec g_theta(n), g_phi(m);
    target.grad_theta(theta, phi, g_theta);
    target.grad_phi(theta, phi, g_phi);
    const Vec fd_theta = fd_gradient(
        [&](CSpan th) {
          return target.log_lik(th) + target.log_prior_theta(th, phi);
        },
        theta);
    const double theta_scale = vec_norm(fd_theta);
    for (std::size_t i = 0; i < n; ++i)
      note(rel(g_theta[i], fd_theta[i], theta_scale),
           "grad_theta[" + std::to_string(i) + "]");
    const Vec fd_phi = fd_gradient(
        [&](CSpan ph) {
          return target.log_prior_theta(theta, ph) + target.log_hyperprior(ph);
        },
        phi);
    const double phi_scale = vec_norm(fd_phi);
    for (std::size_t j = 0; j < m; ++j)
      note(rel(g_phi[j], fd_phi[j], phi_scale),
           "grad_phi[" + std::to_string(j) + "]");

    Vec ga_theta(m), ga_phi(n);
    mass.grad_aux_theta(phi, r_theta, ga_theta);
    mass.grad_aux_phi(theta, r_phi, ga_phi);
    const Vec fd_aux_theta = fd_gradient(
        [&](CSpan ph) {
          const MassOperator& op = mass.mass_theta(ph);
          return op.quad_inv(r_theta) + 0.5 * op.log_det();
        },
        phi);
    const double aux_theta_scale = vec_norm(fd_aux_theta);
    for (std::size_t j = 0; j < m; ++j)
      note(rel(ga_theta[j], fd_aux_theta[j], aux_theta_scale),
           "grad_aux_theta[" + std::to_string(j) + "]");
    const Vec fd_aux_phi = fd_gradient(
        [&](CSpan th) {
          const MassOperator& op = mass.mass_phi(th);
          return op.quad_inv(r_phi) + 0.5 * op.log_det();
        },
        theta);
    const double aux_phi_scale = vec_norm(fd_aux_phi);
    for (std::size_t i = 0; i < n; ++i)
      note(rel(ga_phi[i], fd_aux_phi[i], aux_phi_scale),
           "grad_aux_phi[" + std::to_string(i) + "]");
  }
  return rep;
}

}  // namespace sshmc::io
