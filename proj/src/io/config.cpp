#include "sshmc/io/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "sshmc/error.hpp"

namespace sshmc::io {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: " + v);
  }
}

long parse_long(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not an integer: " + v);
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not an unsigned integer: " +
                      v);
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "': not a boolean: " + v);
}

// Per-model presets for every knob the config text left unset.
void apply_presets(ExperimentConfig& cfg) {
  SamplerConfig& s = cfg.sampler;
  if (cfg.model == "funnel") {
    // 2 theta steps and 1 phi step per composite.
    s.abla.steps_theta = 2;
    s.abla.steps_phi = 1;
    s.abla.abla_steps = 25;
    s.abla.eps_theta = 0.2;
    s.abla.eps_phi = 0.75;
    s.hmc = {.epsilon = 0.1, .steps = 75};
    s.gibbs_theta = {.epsilon = 0.2, .steps = 10};
    s.gibbs_phi = {.epsilon = 0.1, .steps = 5};
    s.n_iter = 6000;
    s.burn_in = 1000;
  } else if (cfg.model == "hblr") {
    s.abla.steps_theta = 4;
    s.abla.steps_phi = 2;
    s.abla.abla_steps = 4;
    s.abla.eps_theta = 0.3;
    s.abla.eps_phi = 0.5;
    s.hmc = {.epsilon = 0.08, .steps = 24};
    s.gibbs_theta = {.epsilon = 0.3, .steps = 12};
    s.gibbs_phi = {.epsilon = 0.3, .steps = 4};
    s.n_iter = 6000;
    s.burn_in = 1000;
  } else if (cfg.model == "sv") {
    // 5 theta steps and 2 phi steps per composite.
    s.abla.steps_theta = 5;
    s.abla.steps_phi = 2;
    s.abla.abla_steps = 4;
    s.abla.eps_theta = 0.3;
    s.abla.eps_phi = 0.03;
    s.hmc = {.epsilon = 0.035, .steps = 28};
    s.gibbs_theta = {.epsilon = 0.3, .steps = 10};
    s.gibbs_phi = {.epsilon = 0.02, .steps = 4};
    s.n_iter = 5000;
    s.burn_in = 1000;
  } else if (cfg.model == "lgcpp") {
    // 2 theta steps, 1 phi step, 10 composite steps per transition.
    s.abla.steps_theta = 2;
    s.abla.steps_phi = 1;
    s.abla.abla_steps = 10;
    s.abla.eps_theta = 0.15;
    s.abla.eps_phi = 0.02;
    s.hmc = {.epsilon = 0.05, .steps = 30};
    s.gibbs_theta = {.epsilon = 0.2, .steps = 20};
    s.gibbs_phi = {.epsilon = 0.06, .steps = 1};
    s.n_iter = 2500;
    s.burn_in = 500;
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) +
                        ": empty key or value");
    if (kv.count(key))
      throw ConfigError("config: duplicate key '" + key + "'");
    kv[key] = value;
  }

  const auto it = kv.find("model");
  if (it == kv.end()) throw ConfigError("config: missing required key 'model'");
  ExperimentConfig cfg;
  cfg.model = it->second;
  if (cfg.model != "funnel" && cfg.model != "hblr" && cfg.model != "sv" &&
      cfg.model != "lgcpp")
    throw ConfigError("config: unknown model '" + cfg.model + "'");
  kv.erase(it);

  apply_presets(cfg);

  auto take = [&](const char* key) -> std::optional<std::string> {
    auto f = kv.find(key);
    if (f == kv.end()) return std::nullopt;
    std::string v = f->second;
    kv.erase(f);
    return v;
  };

  if (auto v = take("sampler"))
    cfg.sampler.kind = sampler_kind_from_string(*v);
  if (auto v = take("n_iter")) cfg.sampler.n_iter = parse_long("n_iter", *v);
  if (auto v = take("burn_in"))
    cfg.sampler.burn_in = parse_long("burn_in", *v);
  if (auto v = take("thin")) cfg.sampler.thin = parse_long("thin", *v);
  if (auto v = take("seed")) cfg.sampler.seed = parse_u64("seed", *v);

  if (auto v = take("sshmc.eps_theta"))
    cfg.sampler.abla.eps_theta = parse_double("sshmc.eps_theta", *v);
  if (auto v = take("sshmc.eps_phi"))
    cfg.sampler.abla.eps_phi = parse_double("sshmc.eps_phi", *v);
  if (auto v = take("sshmc.steps_theta"))
    cfg.sampler.abla.steps_theta =
        static_cast<int>(parse_long("sshmc.steps_theta", *v));
  if (auto v = take("sshmc.steps_phi"))
    cfg.sampler.abla.steps_phi =
        static_cast<int>(parse_long("sshmc.steps_phi", *v));
  if (auto v = take("sshmc.abla_steps"))
    cfg.sampler.abla.abla_steps =
        static_cast<int>(parse_long("sshmc.abla_steps", *v));
  if (auto v = take("sshmc.divergence_cap"))
    cfg.sampler.abla.divergence_cap =
        parse_double("sshmc.divergence_cap", *v);

  if (auto v = take("hmc.epsilon"))
    cfg.sampler.hmc.epsilon = parse_double("hmc.epsilon", *v);
  if (auto v = take("hmc.steps"))
    cfg.sampler.hmc.steps = static_cast<int>(parse_long("hmc.steps", *v));
  if (auto v = take("hmc.mass_theta"))
    cfg.sampler.hmc_mass_theta = parse_double("hmc.mass_theta", *v);
  if (auto v = take("hmc.mass_phi"))
    cfg.sampler.hmc_mass_phi = parse_double("hmc.mass_phi", *v);

  if (auto v = take("gibbs.eps_theta"))
    cfg.sampler.gibbs_theta.epsilon = parse_double("gibbs.eps_theta", *v);
  if (auto v = take("gibbs.steps_theta"))
    cfg.sampler.gibbs_theta.steps =
        static_cast<int>(parse_long("gibbs.steps_theta", *v));
  if (auto v = take("gibbs.eps_phi"))
    cfg.sampler.gibbs_phi.epsilon = parse_double("gibbs.eps_phi", *v);
  if (auto v = take("gibbs.steps_phi"))
    cfg.sampler.gibbs_phi.steps =
        static_cast<int>(parse_long("gibbs.steps_phi", *v));

  if (auto v = take("funnel.n"))
    cfg.funnel_n = static_cast<std::size_t>(parse_long("funnel.n", *v));
  if (auto v = take("hblr.lambda"))
    cfg.hblr_lambda = parse_double("hblr.lambda", *v);
  if (auto v = take("sv.nu")) cfg.sv_nu = parse_double("sv.nu", *v);
  if (auto v = take("sv.tau2")) cfg.sv_tau2 = parse_double("sv.tau2", *v);
  if (auto v = take("sv.beta_a"))
    cfg.sv_beta_a = parse_double("sv.beta_a", *v);
  if (auto v = take("sv.beta_b"))
    cfg.sv_beta_b = parse_double("sv.beta_b", *v);
  if (auto v = take("lgcpp.d"))
    cfg.lgcpp_d = static_cast<std::size_t>(parse_long("lgcpp.d", *v));
  if (auto v = take("lgcpp.mu")) cfg.lgcpp_mu = parse_double("lgcpp.mu", *v);
  if (auto v = take("lgcpp.prior_sd"))
    cfg.lgcpp_prior_sd = parse_double("lgcpp.prior_sd", *v);

  if (auto v = take("data.path")) cfg.data_path = *v;
  if (auto v = take("data.seed")) cfg.data_seed = parse_u64("data.seed", *v);
  if (auto v = take("data.T"))
    cfg.sv_T = static_cast<std::size_t>(parse_long("data.T", *v));
  if (auto v = take("data.sv_beta"))
    cfg.sv_true_beta = parse_double("data.sv_beta", *v);
  if (auto v = take("data.sv_sigma"))
    cfg.sv_true_sigma = parse_double("data.sv_sigma", *v);
  if (auto v = take("data.sv_phi"))
    cfg.sv_true_phi = parse_double("data.sv_phi", *v);
  if (auto v = take("data.lgcpp_sigma"))
    cfg.lgcpp_true_sigma = parse_double("data.lgcpp_sigma", *v);
  if (auto v = take("data.lgcpp_beta"))
    cfg.lgcpp_true_beta = parse_double("data.lgcpp_beta", *v);

  if (auto v = take("emit.trace")) cfg.emit_trace = parse_bool("emit.trace", *v);
  if (auto v = take("emit.summary"))
    cfg.emit_summary = parse_bool("emit.summary", *v);
  if (auto v = take("emit.energy_trace"))
    cfg.emit_energy_trace = parse_bool("emit.energy_trace", *v);
  if (auto v = take("emit.histogram")) cfg.emit_histogram = *v;
  if (auto v = take("emit.histogram_bins"))
    cfg.histogram_bins =
        static_cast<int>(parse_long("emit.histogram_bins", *v));

  if (!kv.empty()) {
    std::string msg = "config: unknown key(s):";
    for (const auto& [k, _] : kv) msg += " '" + k + "'";
    throw ConfigError(msg);
  }

  // Validate everything, reporting all violations at once.
  std::vector<std::string> violations;
  try {
    cfg.sampler.validate();
  } catch (const ConfigError& e) {
    violations.push_back(e.what());
  }
  if (cfg.model == "funnel" && cfg.funnel_n < 1)
    violations.push_back("funnel.n must be >= 1");
  if (cfg.model == "hblr" && !(cfg.hblr_lambda > 0.0))
    violations.push_back("hblr.lambda must be > 0");
  if (cfg.model == "sv" && cfg.sv_T < 2)
    violations.push_back("data.T must be >= 2");
  if (cfg.model == "lgcpp" && cfg.lgcpp_d < 2)
    violations.push_back("lgcpp.d must be >= 2");
  if (cfg.histogram_bins < 2)
    violations.push_back("emit.histogram_bins must be >= 2");
  if (!violations.empty()) {
    std::string msg = "config: validation failed:";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string render(const ExperimentConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["model"] = cfg.model;
  kv["sampler"] = to_string(cfg.sampler.kind);
  kv["n_iter"] = std::to_string(cfg.sampler.n_iter);
  kv["burn_in"] = std::to_string(cfg.sampler.burn_in);
  kv["thin"] = std::to_string(cfg.sampler.thin);
  kv["seed"] = std::to_string(cfg.sampler.seed);
  kv["sshmc.eps_theta"] = fmt_double(cfg.sampler.abla.eps_theta);
  kv["sshmc.eps_phi"] = fmt_double(cfg.sampler.abla.eps_phi);
  kv["sshmc.steps_theta"] = std::to_string(cfg.sampler.abla.steps_theta);
  kv["sshmc.steps_phi"] = std::to_string(cfg.sampler.abla.steps_phi);
  kv["sshmc.abla_steps"] = std::to_string(cfg.sampler.abla.abla_steps);
  kv["sshmc.divergence_cap"] = fmt_double(cfg.sampler.abla.divergence_cap);
  kv["hmc.epsilon"] = fmt_double(cfg.sampler.hmc.epsilon);
  kv["hmc.steps"] = std::to_string(cfg.sampler.hmc.steps);
  kv["hmc.mass_theta"] = fmt_double(cfg.sampler.hmc_mass_theta);
  kv["hmc.mass_phi"] = fmt_double(cfg.sampler.hmc_mass_phi);
  kv["gibbs.eps_theta"] = fmt_double(cfg.sampler.gibbs_theta.epsilon);
  kv["gibbs.steps_theta"] = std::to_string(cfg.sampler.gibbs_theta.steps);
  kv["gibbs.eps_phi"] = fmt_double(cfg.sampler.gibbs_phi.epsilon);
  kv["gibbs.steps_phi"] = std::to_string(cfg.sampler.gibbs_phi.steps);
  if (cfg.model == "funnel") kv["funnel.n"] = std::to_string(cfg.funnel_n);
  if (cfg.model == "hblr") kv["hblr.lambda"] = fmt_double(cfg.hblr_lambda);
  if (cfg.model == "sv") {
    kv["sv.nu"] = fmt_double(cfg.sv_nu);
    kv["sv.tau2"] = fmt_double(cfg.sv_tau2);
    kv["sv.beta_a"] = fmt_double(cfg.sv_beta_a);
    kv["sv.beta_b"] = fmt_double(cfg.sv_beta_b);
    kv["data.T"] = std::to_string(cfg.sv_T);
    kv["data.sv_beta"] = fmt_double(cfg.sv_true_beta);
    kv["data.sv_sigma"] = fmt_double(cfg.sv_true_sigma);
    kv["data.sv_phi"] = fmt_double(cfg.sv_true_phi);
  }
  if (cfg.model == "lgcpp") {
    kv["lgcpp.d"] = std::to_string(cfg.lgcpp_d);
    kv["lgcpp.mu"] = fmt_double(cfg.lgcpp_mu);
    kv["lgcpp.prior_sd"] = fmt_double(cfg.lgcpp_prior_sd);
    kv["data.lgcpp_sigma"] = fmt_double(cfg.lgcpp_true_sigma);
    kv["data.lgcpp_beta"] = fmt_double(cfg.lgcpp_true_beta);
  }
  if (cfg.model != "funnel") {
    if (!cfg.data_path.empty()) kv["data.path"] = cfg.data_path;
    kv["data.seed"] = std::to_string(cfg.data_seed);
  }
  kv["emit.trace"] = cfg.emit_trace ? "true" : "false";
  kv["emit.summary"] = cfg.emit_summary ? "true" : "false";
  kv["emit.energy_trace"] = cfg.emit_energy_trace ? "true" : "false";
  if (!cfg.emit_histogram.empty()) {
    kv["emit.histogram"] = cfg.emit_histogram;
    kv["emit.histogram_bins"] = std::to_string(cfg.histogram_bins);
  }

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = render(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

void apply_overrides(ExperimentConfig& cfg,
                     const std::vector<std::string>& key_values) {
  // Round-trip through the parser so overrides get exactly the same
  // treatment as file keys, with validation once at the end.
  std::string text = render(cfg);
  for (const auto& key_value : key_values) {
    const auto eq = key_value.find('=');
    if (eq == std::string::npos)
      throw ConfigError("override must be key=value: " + key_value);
    const std::string key = trim(key_value.substr(0, eq));
    std::string filtered;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (line.rfind(key + " =", 0) == 0) continue;
      filtered += line + "\n";
    }
    filtered += key + " = " + trim(key_value.substr(eq + 1)) + "\n";
    text = std::move(filtered);
  }
  cfg = parse_config(text);
}

void apply_override(ExperimentConfig& cfg, const std::string& key_value) {
  apply_overrides(cfg, {key_value});
}

}  // namespace sshmc::io
