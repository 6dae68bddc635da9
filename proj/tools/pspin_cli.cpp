// pspin: batch front-end for the p-spin laboratory library.
//
// Every subcommand reads a flat key=value config (optional), applies
// command-line overrides, validates the key set, runs one computation and
// writes <out>/<command>.json and <out>/<command>.csv.  Reports are
// byte-identical across reruns with identical config and seed; wall-clock
// timings therefore go to a sidecar file referenced from the main report.
//
// Exit codes: 0 success, 2 config error, 3 budget exceeded,
//             4 assertion-margin violation.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pspin/bounds.hpp"
#include "pspin/mc.hpp"
#include "pspin/oracle.hpp"
#include "pspin/rs.hpp"

using json = nlohmann::ordered_json;
using namespace pspin;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MarginViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Flat key=value store with typed, default-echoing accessors.
class Config {
 public:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      size_t eq = t.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config line " + std::to_string(lineno) +
                          " is not key=value: " + t);
      }
      raw_[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
  }

  void set(const std::string& kv) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got: " + kv);
    }
    raw_[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
  }

  void set_value(const std::string& key, const std::string& value) {
    raw_[key] = value;
  }

  bool has(const std::string& key) const { return raw_.count(key) > 0; }

  double get_double(const std::string& key, double def) {
    used_.insert(key);
    if (!raw_.count(key)) {
      echo_[key] = def;
      return def;
    }
    try {
      size_t pos = 0;
      double v = std::stod(raw_.at(key), &pos);
      if (pos != raw_.at(key).size()) throw std::invalid_argument("trailing");
      echo_[key] = v;
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key +
                        "' is not a number: " + raw_.at(key));
    }
  }

  long long get_int(const std::string& key, long long def) {
    used_.insert(key);
    if (!raw_.count(key)) {
      echo_[key] = def;
      return def;
    }
    try {
      size_t pos = 0;
      long long v = std::stoll(raw_.at(key), &pos);
      if (pos != raw_.at(key).size()) throw std::invalid_argument("trailing");
      echo_[key] = v;
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key +
                        "' is not an integer: " + raw_.at(key));
    }
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) {
    used_.insert(key);
    if (!raw_.count(key)) {
      echo_[key] = def;
      return def;
    }
    try {
      size_t pos = 0;
      std::uint64_t v = std::stoull(raw_.at(key), &pos);
      if (pos != raw_.at(key).size()) throw std::invalid_argument("trailing");
      echo_[key] = v;
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key +
                        "' is not an unsigned integer: " + raw_.at(key));
    }
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::string& def) {
    used_.insert(key);
    std::string text = raw_.count(key) ? raw_.at(key) : def;
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      try {
        size_t pos = 0;
        out.push_back(std::stod(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError("config key '" + key +
                          "' has a non-numeric entry: " + item);
      }
    }
    if (out.empty()) throw ConfigError("config key '" + key + "' is empty");
    echo_[key] = out;
    return out;
  }

  // Every accessed key was recorded; anything else in the file is unknown.
  void reject_unknown() const {
    for (const auto& [key, value] : raw_) {
      if (!used_.count(key)) {
        throw ConfigError("unknown config key: " + key);
      }
    }
  }

  const json& echo() const { return echo_; }

 private:
  std::map<std::string, std::string> raw_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Report {
  json results = json::object();
  json margins = json::object();
  std::string csv_header;
  std::vector<std::string> csv_rows;
  bool margins_ok = true;

  // Records an asserted inequality (value >= -tolerance) with its margin.
  void assert_margin(const std::string& name, double value, double tolerance) {
    bool ok = value >= -tolerance;
    margins[name] = {{"value", value}, {"tolerance", tolerance}, {"ok", ok}};
    if (!ok) margins_ok = false;
  }

  void info_margin(const std::string& name, double value) {
    margins[name] = {{"value", value}, {"tolerance", nullptr}, {"ok", true}};
  }
};

ModelParams make_params(Config& cfg, double default_a) {
  int p = static_cast<int>(cfg.get_int("p", 2));
  double beta = cfg.get_double("beta", 0.3);
  double h = cfg.get_double("h", 0.0);
  double a = cfg.get_double("a", default_a);
  return ModelParams(MixtureSpec(p, beta), h, a);
}

// ---------------------------------------------------------------------------

Report run_rs_max(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  int grid = static_cast<int>(cfg.get_int("grid", 1001));
  RsReport r = rs_maximize(params, grid);
  Report out;
  out.results = {{"q0", r.q0},
                 {"value", r.value},
                 {"unique_max", r.unique_max},
                 {"maxima", json::array()},
                 {"critical_points", json::array()}};
  for (const auto& m : r.maxima) {
    out.results["maxima"].push_back({{"q", m.q}, {"value", m.value}});
  }
  for (const auto& c : r.all_critical_points) {
    out.results["critical_points"].push_back(
        {{"q", c.q}, {"residual", c.residual}});
  }
  out.csv_header = "p,beta,h,a,q0,value,unique_max";
  out.csv_rows.push_back(std::to_string(params.mixture.p) + "," +
                         fmt(params.mixture.beta) + "," + fmt(params.h) + "," +
                         fmt(params.a) + "," + fmt(r.q0) + "," + fmt(r.value) +
                         "," + (r.unique_max ? "1" : "0"));
  return out;
}

Report run_crit_solve(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  std::vector<CriticalPoint> roots = critical_points(params);
  Report out;
  out.results["count"] = roots.size();
  out.results["roots"] = json::array();
  out.csv_header = "index,q,residual";
  double max_residual = 0.0;
  for (size_t i = 0; i < roots.size(); ++i) {
    out.results["roots"].push_back(
        {{"q", roots[i].q}, {"residual", roots[i].residual}});
    out.csv_rows.push_back(std::to_string(i) + "," + fmt(roots[i].q) + "," +
                           fmt(roots[i].residual));
    max_residual = std::max(max_residual, std::abs(roots[i].residual));
  }
  out.assert_margin("root_residual", 1e-8 - max_residual, 0.0);
  return out;
}

Report run_bounds(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  std::vector<double> uv = cfg.get_double_list("u_vec", "0.5,-0.2");
  int target = static_cast<int>(cfg.get_int("target_index", 0));
  int order = static_cast<int>(cfg.get_int("order", 128));
  Eigen::VectorXd u(uv.size());
  for (size_t l = 0; l < uv.size(); ++l) u(static_cast<int>(l)) = uv[l];
  if (target < 0 || target >= u.size()) {
    throw ConfigError("target_index out of range");
  }
  BoundReport r = chain_verify(u, target, params, {}, order);
  Report out;
  out.results = {{"n", r.n},
                 {"q", r.q},
                 {"rs_q", r.rs_q},
                 {"psi_inf", r.psi_inf},
                 {"Psi_at_embedding", r.Psi_at_embedding},
                 {"Psi_inf", r.Psi_inf},
                 {"holder_gap", r.holder_gap},
                 {"strict", r.strict},
                 {"strict_reason", r.strict_reason},
                 {"chain_ok", r.chain_ok},
                 {"lambda_grad_norm", r.lambda_grad_norm}};
  out.assert_margin("margin_embedding", r.margin_embedding, 1e-8);
  out.info_margin("margin_psi", r.margin_psi);
  out.info_margin("margin_Psi", r.margin_Psi);
  out.assert_margin("holder_gap", r.holder_gap, 1e-9);
  if (r.strict) {
    out.assert_margin("strict_holder_gap", r.holder_gap - 1e-12, 0.0);
  }
  out.csv_header =
      "n,q,rs_q,psi_inf,Psi_at_embedding,Psi_inf,holder_gap,strict,chain_ok";
  out.csv_rows.push_back(
      std::to_string(r.n) + "," + fmt(r.q) + "," + fmt(r.rs_q) + "," +
      fmt(r.psi_inf) + "," + fmt(r.Psi_at_embedding) + "," + fmt(r.Psi_inf) +
      "," + fmt(r.holder_gap) + "," + (r.strict ? "1" : "0") + "," +
      (r.chain_ok ? "1" : "0"));
  return out;
}

Report run_oracle_moment(Config& cfg) {
  int m = static_cast<int>(cfg.get_int("m", 2));
  ModelParams params = make_params(cfg, std::max(1, m));
  int N = static_cast<int>(cfg.get_int("N", 10));
  double t = cfg.get_double("t", 1.0);
  double q = cfg.get_double("q", 0.0);
  double value = annealed_moment_exact(N, m, params, t, q);
  Report out;
  out.results = {{"N", N}, {"m", m}, {"t", t}, {"q", q}, {"value", value}};
  out.csv_header = "N,m,t,q,value";
  out.csv_rows.push_back(std::to_string(N) + "," + std::to_string(m) + "," +
                         fmt(t) + "," + fmt(q) + "," + fmt(value));
  return out;
}

Report run_oracle_overlap(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  int N = static_cast<int>(cfg.get_int("N", 100));
  double t = cfg.get_double("t", 1.0);
  double q = cfg.get_double("q", 0.0);
  TiltedOverlapDistribution d = tilted_overlap_distribution(N, params, t, q);
  Report out;
  out.csv_header = "N,k,u,prob,log_prob,rate";
  double total = 0.0;
  // one row per possible overlap value k/N; infeasible-parity k carry zero
  // mass (log_prob = -inf)
  for (int k = -N; k <= N; ++k) {
    double lp = d.log_prob(k);
    double prob = d.prob(k);
    total += prob;
    double rate = -lp / N;
    out.csv_rows.push_back(std::to_string(N) + "," + std::to_string(k) + "," +
                           fmt(static_cast<double>(k) / N) + "," + fmt(prob) +
                           "," + fmt(lp) + "," + fmt(rate));
  }
  out.results = {{"N", N},
                 {"a", d.a},
                 {"t", d.t},
                 {"q", d.q},
                 {"rows", 2 * N + 1},
                 {"prob_sum", total}};
  out.assert_margin("prob_sum_error", 1e-12 - std::abs(total - 1.0), 0.0);
  return out;
}

Report run_oracle_monotone(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  int N = static_cast<int>(cfg.get_int("N", 100));
  double q0 = cfg.get_double("q0", -1.0);
  if (q0 < 0.0) q0 = rs_maximize(params).q0;
  double t_start = cfg.get_double("t_start", 0.0);
  double t_stop = cfg.get_double("t_stop", 0.9);
  double t_step = cfg.get_double("t_step", 0.1);
  if (t_step <= 0 || t_stop < t_start) {
    throw ConfigError("require t_step > 0 and t_stop >= t_start");
  }
  Report out;
  out.csv_header = "t,delta_expectation";
  out.results = {{"N", N}, {"q0", q0}, {"rows", json::array()}};
  double prev = -1e300, min_increment = 1e300;
  for (double t = t_start; t <= t_stop + 1e-12; t += t_step) {
    double v = tilted_delta_expectation(N, t, params, q0);
    out.results["rows"].push_back({{"t", t}, {"delta_expectation", v}});
    out.csv_rows.push_back(fmt(t) + "," + fmt(v));
    if (prev > -1e299) min_increment = std::min(min_increment, v - prev);
    prev = v;
  }
  out.assert_margin("monotone_increment", min_increment, 1e-10);
  return out;
}

Report run_chain_check(Config& cfg) {
  ModelParams params = make_params(cfg, 4.0);
  if (std::abs(params.a - 4.0) > 1e-12) {
    throw ConfigError("chain-check requires a = 4");
  }
  int N = static_cast<int>(cfg.get_int("N", 14));
  double t = cfg.get_double("t", 1.0);
  double q0 = cfg.get_double("q0", -1.0);
  if (q0 < 0.0) q0 = rs_maximize(params).q0;
  HolderChain c = holder_chain_check(N, params, t, q0);
  Report out;
  out.results = {{"N", N},  {"t", t},   {"q0", q0},  {"m1", c.m1},
                 {"m2", c.m2}, {"m3", c.m3}, {"m4", c.m4}};
  out.assert_margin("m1_minus_m2", c.m1 - c.m2, 1e-12);
  out.assert_margin("m2_minus_m3", c.m2 - c.m3, 1e-12);
  out.assert_margin("m3_minus_m4", c.m3 - c.m4, 1e-12);
  out.csv_header = "N,t,q0,m1,m2,m3,m4";
  out.csv_rows.push_back(std::to_string(N) + "," + fmt(t) + "," + fmt(q0) +
                         "," + fmt(c.m1) + "," + fmt(c.m2) + "," + fmt(c.m3) +
                         "," + fmt(c.m4));
  return out;
}

Report run_mc_moment(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  int N = static_cast<int>(cfg.get_int("N", 10));
  std::uint64_t n_samples = cfg.get_u64("n_samples", 1000);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  int threads = static_cast<int>(cfg.get_int("threads", 1));
  McEstimate e = moment_mc(N, params.a, n_samples, seed, params, threads);
  Report out;
  out.results = {{"N", N},
                 {"a", params.a},
                 {"mean", e.mean},
                 {"stderr", e.stderr_},
                 {"n_samples", e.n_samples},
                 {"estimator_kind", e.estimator_kind},
                 {"ess", e.ess},
                 {"ci_valid", e.ci_valid},
                 {"bias_warning", e.bias_warning}};
  out.csv_header = "N,a,mean,stderr,n_samples,ess,ci_valid";
  out.csv_rows.push_back(std::to_string(N) + "," + fmt(params.a) + "," +
                         fmt(e.mean) + "," + fmt(e.stderr_) + "," +
                         std::to_string(e.n_samples) + "," + fmt(e.ess) + "," +
                         (e.ci_valid ? "1" : "0"));
  return out;
}

Report run_mc_overlap(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  int N = static_cast<int>(cfg.get_int("N", 10));
  double u = cfg.get_double("u", 0.0);
  std::uint64_t n_samples = cfg.get_u64("n_samples", 1000);
  std::uint64_t seed = cfg.get_u64("seed", 1);
  int threads = static_cast<int>(cfg.get_int("threads", 1));
  McEstimate e = tilted_overlap_mc(N, params.a, u, n_samples, seed, params,
                                   threads);
  Report out;
  out.results = {{"N", N},
                 {"a", params.a},
                 {"u", u},
                 {"mean", e.mean},
                 {"stderr", e.stderr_},
                 {"n_samples", e.n_samples},
                 {"estimator_kind", e.estimator_kind},
                 {"ess", e.ess},
                 {"ci_valid", e.ci_valid},
                 {"bias_warning", e.bias_warning}};
  out.csv_header = "N,a,u,mean,stderr,n_samples,ess,ci_valid";
  out.csv_rows.push_back(std::to_string(N) + "," + fmt(params.a) + "," +
                         fmt(u) + "," + fmt(e.mean) + "," + fmt(e.stderr_) +
                         "," + std::to_string(e.n_samples) + "," + fmt(e.ess) +
                         "," + (e.ci_valid ? "1" : "0"));
  return out;
}

Report run_rate(Config& cfg) {
  ModelParams params = make_params(cfg, 2.0);
  double u = cfg.get_double("u", 0.5);
  double t = cfg.get_double("t", 1.0);
  double q = cfg.get_double("q", 0.0);
  std::vector<double> raw = cfg.get_double_list("N_list", "50,100,200");
  std::vector<int> N_list;
  for (double v : raw) {
    int N = static_cast<int>(v);
    if (N < 1 || v != N) throw ConfigError("N_list entries must be positive integers");
    N_list.push_back(N);
  }
  std::vector<RatePoint> pts = rate_function(N_list, u, params, t, q);
  Report out;
  out.csv_header = "N,k,log_prob,rate";
  out.results["rows"] = json::array();
  for (const auto& pt : pts) {
    out.results["rows"].push_back({{"N", pt.N},
                                   {"k", pt.k},
                                   {"log_prob", pt.log_prob},
                                   {"rate", pt.rate}});
    out.csv_rows.push_back(std::to_string(pt.N) + "," + std::to_string(pt.k) +
                           "," + fmt(pt.log_prob) + "," + fmt(pt.rate));
  }
  return out;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& name, Config& cfg,
                const std::string& out_dir) {
  auto t0 = std::chrono::steady_clock::now();
  // seed and threads are global flags; consume them even for subcommands
  // that are deterministic so the echo shows what was in effect
  cfg.get_u64("seed", 1);
  cfg.get_int("threads", 1);
  Report rep;
  if (name == "rs-max") rep = run_rs_max(cfg);
  else if (name == "crit-solve") rep = run_crit_solve(cfg);
  else if (name == "bounds") rep = run_bounds(cfg);
  else if (name == "oracle-moment") rep = run_oracle_moment(cfg);
  else if (name == "oracle-overlap") rep = run_oracle_overlap(cfg);
  else if (name == "oracle-monotone") rep = run_oracle_monotone(cfg);
  else if (name == "chain-check") rep = run_chain_check(cfg);
  else if (name == "mc-moment") rep = run_mc_moment(cfg);
  else if (name == "mc-overlap") rep = run_mc_overlap(cfg);
  else if (name == "rate") rep = run_rate(cfg);
  else throw ConfigError("unknown subcommand: " + name);
  cfg.reject_unknown();
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();

  std::string stem = name;
  for (char& c : stem) {
    if (c == '-') c = '_';
  }
  std::filesystem::create_directories(out_dir);
  std::string timings_name = stem + ".timings.json";

  json report = {{"command", name},
                 {"config", cfg.echo()},
                 {"results", rep.results},
                 {"margins", rep.margins},
                 // wall-clock varies between runs; keeping it out of this
                 // file keeps reruns byte-identical
                 {"timings", {{"file", timings_name}}}};
  {
    std::ofstream js(std::filesystem::path(out_dir) / (stem + ".json"),
                     std::ios::binary);
    js << report.dump(2) << "\n";
  }
  {
    std::ofstream ts(std::filesystem::path(out_dir) / timings_name,
                     std::ios::binary);
    ts << json{{"command", name}, {"wall_seconds", secs}}.dump(2) << "\n";
  }
  {
    std::ofstream csv(std::filesystem::path(out_dir) / (stem + ".csv"),
                      std::ios::binary);
    csv << rep.csv_header << "\n";
    for (const auto& row : rep.csv_rows) csv << row << "\n";
  }
  std::printf("%s\n", report.dump(2).c_str());
  if (!rep.margins_ok) {
    throw MarginViolation("an asserted margin is violated; see the report");
  }
  return 0;
}

json error_object(const std::string& type, const std::string& message,
                  int code) {
  return {{"error", {{"type", type}, {"message", message}, {"exit_code", code}}}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for p-spin moment and overlap bounds"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::vector<std::string> overrides;
  std::string seed_flag, threads_flag;

  const std::vector<std::string> names = {
      "rs-max",        "crit-solve",     "bounds",      "oracle-moment",
      "oracle-overlap", "oracle-monotone", "chain-check", "mc-moment",
      "mc-overlap",    "rate"};
  const std::map<std::string, std::string> blurbs = {
      {"rs-max", "maximize the replica-symmetric functional over q"},
      {"crit-solve", "roots of the critical-point equation"},
      {"bounds", "verify the coupled inequality chain at a rank-one P"},
      {"oracle-moment", "exact annealed moment by histogram enumeration"},
      {"oracle-overlap", "exact tilted overlap distribution"},
      {"oracle-monotone", "interpolation monotonicity scan"},
      {"chain-check", "four-moment ordering at a = 4"},
      {"mc-moment", "disorder Monte Carlo moment estimate"},
      {"mc-overlap", "disorder Monte Carlo tilted overlap ratio"},
      {"rate", "finite-N rate function table"}};
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n, blurbs.at(n));
    sub->add_option("--config", config_path, "flat key=value config file");
    sub->add_option("--seed", seed_flag, "override the seed key");
    sub->add_option("--threads", threads_flag, "override the threads key");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", overrides, "per-key override key=value");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (app.exit(e) == 0) return 0;
    std::printf("%s\n", error_object("cli_parse", e.what(), 2).dump(2).c_str());
    return 2;
  }

  std::string name = app.get_subcommands().front()->get_name();
  try {
    Config cfg;
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& kv : overrides) cfg.set(kv);
    if (!seed_flag.empty()) cfg.set_value("seed", seed_flag);
    if (!threads_flag.empty()) cfg.set_value("threads", threads_flag);
    return run_command(name, cfg, out_dir);
  } catch (const ConfigError& e) {
    std::printf("%s\n", error_object("config", e.what(), 2).dump(2).c_str());
    return 2;
  } catch (const InvalidParams& e) {
    std::printf("%s\n", error_object("invalid_params", e.what(), 2).dump(2).c_str());
    return 2;
  } catch (const InfeasibleConstraint& e) {
    std::printf("%s\n", error_object("infeasible_constraint", e.what(), 2).dump(2).c_str());
    return 2;
  } catch (const BudgetExceeded& e) {
    std::printf("%s\n", error_object("budget", e.what(), 3).dump(2).c_str());
    return 3;
  } catch (const MarginViolation& e) {
    std::printf("%s\n", error_object("margin", e.what(), 4).dump(2).c_str());
    return 4;
  } catch (const std::exception& e) {
    std::printf("%s\n", error_object("internal", e.what(), 2).dump(2).c_str());
    return 2;
  }
}
