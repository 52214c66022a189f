// fld: sampling heavy-tailed Gibbs measures with stable-driven SDEs.
//
// Config files are versioned key=value text ("# fld-config v1" optional header,
// '#' comments, blank lines ignored). Keys are documented in the README.
// Exit codes: 0 success, 2 config error, 3 assumption failure, 4 numeric error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fld/diagnostics.hpp"
#include "fld/drift.hpp"
#include "fld/generator.hpp"
#include "fld/sde.hpp"

using json = nlohmann::json;
using namespace fld;

namespace {

constexpr const char* kVersion = "fld 1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Config {
  std::map<std::string, std::string> kv;
  std::string hash_hex;

  bool has(const std::string& k) const { return kv.count(k) != 0; }

  std::string get(const std::string& k, const std::string& fallback) const {
    const auto it = kv.find(k);
    return it == kv.end() ? fallback : it->second;
  }

  std::string require(const std::string& k) const {
    const auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("config: missing required key '" + k + "'");
    return it->second;
  }

  double num(const std::string& k, double fallback) const {
    const auto it = kv.find(k);
    if (it == kv.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("config: key '" + k + "' is not a number: " + it->second);
    }
  }

  double require_num(const std::string& k) const {
    require(k);
    return num(k, 0.0);
  }
};

Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  Config cfg;
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a over the raw file bytes
  std::string line;
  int lineno = 0;
  std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  for (unsigned char c : raw) h = (h ^ c) * 1099511628211ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  cfg.hash_hex = buf;
  std::istringstream ss(raw);
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hashpos = line.find('#');
    if (hashpos != std::string::npos) line.erase(hashpos);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw ConfigError("config: line " + std::to_string(lineno) + ": empty key or value");
    cfg.kv[key] = val;
  }
  return cfg;
}

struct Model {
  int d = 1;
  double alpha = 1.0;
  std::shared_ptr<RadialPotential> potential;
  ModelConfig cfg{1, 1.0};
  QuadratureSpec quad;
  DriftGrid grid;
  TailPolicy tail = TailPolicy::direct_quadrature;
};

Model make_model(const Config& c) {
  Model m;
  m.d = static_cast<int>(c.require_num("d"));
  m.alpha = c.require_num("alpha");
  if (m.d < 1) throw ConfigError("config: d must be >= 1");
  if (!(m.alpha > 0.0 && m.alpha < 2.0)) throw ConfigError("config: alpha must be in (0,2)");
  const std::string kind_s = c.require("potential");
  try {
    const auto kind = potential_kind_from_string(kind_s);
    std::vector<double> params;
    if (kind == PotentialKind::stable_target)
      params = {c.num("target_alpha", m.alpha), static_cast<double>(m.d)};
    else
      params = {c.require_num("beta")};
    m.potential = std::make_shared<RadialPotential>(make_builtin_potential(kind, params));
  } catch (const parameter_error& e) {
    throw ConfigError(std::string("config: potential: ") + e.what());
  }
  m.cfg = ModelConfig(m.d, m.alpha);
  m.quad.rel_tol = c.num("quad.rel_tol", m.quad.rel_tol);
  m.quad.abs_tol = c.num("quad.abs_tol", m.quad.abs_tol);
  m.quad.truncation_radius = c.num("quad.truncation_radius", m.quad.truncation_radius);
  try {
    m.quad.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: quad: ") + e.what());
  }
  m.grid.r_max = c.num("grid.r_max", 1000.0);
  m.grid.n_points = static_cast<std::size_t>(c.num("grid.n_points", 256.0));
  const std::string tail = c.get("tail_policy", "direct_quadrature");
  if (tail == "direct_quadrature")
    m.tail = TailPolicy::direct_quadrature;
  else if (tail == "asymptotic_fit")
    m.tail = TailPolicy::asymptotic_fit;
  else
    throw ConfigError("config: unknown tail_policy '" + tail + "'");
  return m;
}

SimPlan make_plan(const Config& c, const Model& m, int threads) {
  SimPlan plan;
  plan.d = m.d;
  plan.alpha = m.alpha;
  plan.dt = c.num("sim.dt", 0.01);
  plan.t_final = c.num("sim.t_final", 10.0);
  plan.n_chains = static_cast<std::size_t>(c.num("sim.n_chains", 1000.0));
  plan.seed = static_cast<std::uint64_t>(c.num("sim.seed", 1.0));
  plan.thinning = static_cast<std::size_t>(c.num("sim.thinning", 1.0));
  plan.n_threads = threads;
  const std::string init = c.get("sim.init", "point");
  if (init == "point") {
    plan.init = InitLaw::point;
    plan.x0.assign(static_cast<std::size_t>(m.d), 0.0);
    plan.x0[0] = c.num("sim.x0", 0.0);
  } else if (init == "uniform_ball") {
    plan.init = InitLaw::uniform_ball;
    plan.init_radius = c.num("sim.init_radius", 1.0);
  } else if (init == "target_sample") {
    plan.init = InitLaw::target_sample;
  } else {
    throw ConfigError("config: unknown sim.init '" + init + "'");
  }
  try {
    plan.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: sim: ") + e.what());
  }
  return plan;
}

json stamp(const Config& c) {
  return json{{"version", kVersion}, {"config_hash", c.hash_hex}};
}

json assumption_json(const AssumptionReport& r) {
  return json{{"condition_1_1", r.condition_1_1},
              {"condition_1_1_witness", r.condition_1_1_witness},
              {"r0_estimate", r.r0_estimate},
              {"integral_abs", r.integral_abs},
              {"integral_signed", r.integral_signed},
              {"branch_ii_limsup", r.branch_ii_limsup},
              {"branch_ii_liminf", r.branch_ii_liminf},
              {"passed", r.passed}};
}

std::string table_cache_path(const std::string& dir, const Model& m) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(m.potential->hash()));
  std::ostringstream name;
  name << "drift_" << m.potential->name << "_" << buf << "_d" << m.d << "_a" << m.alpha << "_r"
       << m.grid.r_max << "_n" << m.grid.n_points << ".tbl";
  return (std::filesystem::path(dir) / name.str()).string();
}

// Builds the drift table or loads it from the cache; reports which happened.
std::shared_ptr<DriftTable> get_table(const Model& m, const std::string& dir, int threads,
                                      bool* loaded_from_cache = nullptr) {
  std::filesystem::create_directories(dir);
  const std::string path = table_cache_path(dir, m);
  if (std::filesystem::exists(path)) {
    auto t = std::make_shared<DriftTable>(load_drift_table(path, m.potential));
    t->tail_policy = m.tail;
    if (loaded_from_cache) *loaded_from_cache = true;
    return t;
  }
  auto t = std::make_shared<DriftTable>(
      build_drift_table(m.potential, m.cfg, m.grid, m.quad, threads));
  save_drift_table(*t, path, *m.potential);
  t->tail_policy = m.tail;
  if (loaded_from_cache) *loaded_from_cache = false;
  return t;
}

int check_assumption_or_throw(const Model& m, bool force, json& out) {
  const auto rep = check_assumption_A(*m.potential, m.d, m.alpha, m.quad);
  out["assumption_report"] = assumption_json(rep);
  if (!rep.passed && !force) return 3;
  return 0;
}

int cmd_check(const Config& c, int, bool) {
  const Model m = make_model(c);
  json out = stamp(c);
  out["model"] = {{"d", m.d}, {"alpha", m.alpha}, {"potential", m.potential->name}};
  const auto rep = check_assumption_A(*m.potential, m.d, m.alpha, m.quad);
  out["assumption_report"] = assumption_json(rep);
  std::cout << out.dump(2) << "\n";
  return rep.passed ? 0 : 3;
}

int cmd_drift(const Config& c, int threads, bool force) {
  const Model m = make_model(c);
  json out = stamp(c);
  out["model"] = {{"d", m.d}, {"alpha", m.alpha}, {"potential", m.potential->name}};
  const int rc = check_assumption_or_throw(m, force, out);
  if (rc != 0) {
    std::cout << out.dump(2) << "\n";
    return rc;
  }
  const std::string dir = c.get("output.dir", "fld_out");
  bool cached = false;
  auto table = get_table(m, dir, threads, &cached);
  out["table"] = {{"path", table_cache_path(dir, m)},
                  {"loaded_from_cache", cached},
                  {"n_points", table->radii.size()},
                  {"r_max", table->radii.back()},
                  {"branch", to_string(m.cfg.branch)},
                  {"tail_c", table->tail_c}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_fraclap(const Config& c, const std::string& points_arg, int, bool) {
  const Model m = make_model(c);
  std::vector<double> points;
  std::istringstream ss(points_arg);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      points.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("fraclap: bad point '" + tok + "'");
    }
  }
  if (points.empty()) throw ConfigError("fraclap: no points given");
  std::cout << "# " << kVersion << " config=" << c.hash_hex << "\n";
  std::cout << "x,frac_lap_exp_minus_V\n";
  std::cout.precision(17);
  for (double x : points)
    std::cout << x << "," << frac_lap_exp_minus_V(*m.potential, x, m.alpha, m.quad) << "\n";
  return 0;
}

int cmd_simulate(const Config& c, int threads, bool force) {
  const Model m = make_model(c);
  json meta = stamp(c);
  meta["model"] = {{"d", m.d}, {"alpha", m.alpha}, {"potential", m.potential->name}};
  const int rc = check_assumption_or_throw(m, force, meta);
  const std::string dir = c.get("output.dir", "fld_out");
  std::filesystem::create_directories(dir);
  if (rc != 0) {
    std::cout << meta.dump(2) << "\n";
    return rc;
  }
  auto table = get_table(m, dir, threads);
  const SimPlan plan = make_plan(c, m, threads);
  std::optional<TargetSampler> sampler;
  if (plan.init == InitLaw::target_sample) sampler.emplace(*m.potential, m.d, m.quad);
  const auto ens = simulate(plan, make_table_drift(table), sampler ? &*sampler : nullptr);
  const auto csv = (std::filesystem::path(dir) / "ensemble.csv").string();
  const auto bin = (std::filesystem::path(dir) / "ensemble.bin").string();
  write_ensemble_csv(ens, csv);
  write_ensemble_binary(ens, bin);
  std::size_t blown = 0;
  for (auto s : ens.blow_up_step)
    if (s >= 0) ++blown;
  meta["ensemble"] = {{"csv", csv},       {"binary", bin},
                      {"n_chains", plan.n_chains}, {"n_records", ens.times.size()},
                      {"dt", plan.dt},    {"t_final", plan.t_final},
                      {"seed", plan.seed}, {"blown_up", blown}};
  std::ofstream(csv + ".meta.json") << meta.dump(2) << "\n";
  std::cout << meta.dump(2) << "\n";
  return 0;
}

int cmd_diagnose(const Config& c, const std::string& which_arg, int threads, bool force) {
  const Model m = make_model(c);
  std::vector<std::string> which;
  {
    std::istringstream ss(which_arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) which.push_back(tok);
  }
  auto wants = [&](const std::string& w) {
    return which.empty() || std::find(which.begin(), which.end(), w) != which.end();
  };
  for (const auto& w : which)
    if (w != "invariance" && w != "lyapunov" && w != "bounds" && w != "holder" &&
        w != "convergence")
      throw ConfigError("diagnose: unknown section '" + w + "'");

  json out = stamp(c);
  out["model"] = {{"d", m.d}, {"alpha", m.alpha}, {"potential", m.potential->name}};
  const int rc = check_assumption_or_throw(m, force, out);
  if (rc != 0) {
    std::cout << out.dump(2) << "\n";
    return rc;
  }
  const std::string dir = c.get("output.dir", "fld_out");
  auto table = get_table(m, dir, threads);

  if (wants("bounds")) {
    const auto fit = fit_drift_bounds(*table, *m.potential, m.cfg);
    out["drift_bound_fit"] = {{"r1", fit.r1},
                              {"c1", fit.c1},
                              {"c2", fit.c2},
                              {"c_upper", fit.c_upper},
                              {"holds_on_grid", fit.holds_on_grid}};
  }
  if (wants("invariance")) {
    if (m.d != 1) throw ConfigError("diagnose: invariance requires d = 1");
    std::vector<TestFunction> family;
    for (double ctr : {0.0, 1.0, 2.0, 4.0, 8.0}) family.push_back(make_bump(ctr));
    const auto res = invariance_residual(family, *m.potential, *table, m.cfg, m.quad);
    json per = json::object();
    for (std::size_t i = 0; i < res.labels.size(); ++i) per[res.labels[i]] = res.residuals[i];
    out["invariance"] = {{"per_f", per}, {"max", res.max_residual}};
  }
  if (wants("lyapunov")) {
    const double beta = c.num("lyapunov.beta", std::min(0.5, m.alpha / 2.0));
    std::vector<double> radii;
    for (double r = 0.25; r <= 1024.0; r *= 2.0) radii.push_back(r);
    const auto ly = lyapunov_check(beta, *m.potential, *table, m.cfg, m.quad, radii);
    out["lyapunov"] = {{"C1", ly.C1},
                       {"C2", ly.C2},
                       {"pass", ly.pass},
                       {"beta", beta},
                       {"warning_small_radii", ly.warning_small_radii}};
  }
  if (wants("holder")) {
    std::vector<double> scales;
    for (double h = 1e-3; h < 0.15; h *= 2.0) scales.push_back(h);
    const auto fit =
        holder_exponent([&](double r) { return table->radial(r); }, 0.0, 5.0, scales);
    out["holder"] = {{"exponent", fit.slope}, {"r2", fit.r2}};
  }
  if (wants("convergence")) {
    if (m.d != 1) throw ConfigError("diagnose: convergence requires d = 1");
    const SimPlan plan = make_plan(c, m, threads);
    std::optional<TargetSampler> sampler;
    if (plan.init == InitLaw::target_sample) sampler.emplace(*m.potential, m.d, m.quad);
    const auto ens = simulate(plan, make_table_drift(table), sampler ? &*sampler : nullptr);
    DistanceGauge gauge(m.potential, m.quad);
    const auto rep = convergence_curve(ens, gauge, DistanceMetric::ks);
    out["convergence"] = {{"metric", to_string(rep.metric)},
                          {"times", rep.times},
                          {"distances", rep.distances},
                          {"lambda", rep.lambda},
                          {"r2", rep.r2},
                          {"fit_valid", rep.fit_valid},
                          // Theorem-level caveat: only positivity/stability of
                          // the fitted rate is meaningful, not its value.
                          {"lambda_is_fit_only", true}};
    std::filesystem::create_directories(dir);
    std::ofstream curve((std::filesystem::path(dir) / "convergence.csv").string());
    curve << "# " << kVersion << " config=" << c.hash_hex << "\n";
    curve << "time,distance\n";
    curve.precision(17);
    for (std::size_t i = 0; i < rep.times.size(); ++i)
      curve << rep.times[i] << "," << rep.distances[i] << "\n";
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_compare(const Config& c, int threads, bool force) {
  const Model m = make_model(c);
  if (m.d != 1) throw ConfigError("compare: escape benchmark requires d = 1");
  json out = stamp(c);
  out["model"] = {{"d", m.d}, {"alpha", m.alpha}, {"potential", m.potential->name}};
  const int rc = check_assumption_or_throw(m, force, out);
  if (rc != 0) {
    std::cout << out.dump(2) << "\n";
    return rc;
  }
  const std::string dir = c.get("output.dir", "fld_out");
  auto table = get_table(m, dir, threads);
  SimPlan plan = make_plan(c, m, threads);
  plan.init = InitLaw::point;
  plan.x0 = {c.num("escape.x0", 1000.0)};
  plan.t_final = c.num("escape.horizon", plan.t_final);
  const double ball = c.num("escape.ball_radius", 10.0);
  const auto esc = escape_benchmark(plan, m.potential, make_table_drift(table), ball);
  out["escape"] = {{"medians",
                    {{"stable", esc.median_stable}, {"baseline", esc.median_baseline}}},
                   {"ratio", esc.ratio},
                   {"censored",
                    {{"stable", esc.censored_stable}, {"baseline", esc.censored_baseline}}},
                   {"ratio_is_lower_bound", esc.ratio_is_lower_bound},
                   {"medians_valid", esc.medians_valid}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kVersion) + ": stable-driven SDE sampling of heavy-tailed targets"};
  app.require_subcommand(1);
  std::string config_path;
  int threads = static_cast<int>(std::min(std::thread::hardware_concurrency(), 8u));
  if (threads < 1) threads = 1;
  bool force = false;
  app.add_option("-c,--config", config_path, "key=value config file")->required();
  app.add_option("--threads", threads, "worker thread cap");
  app.add_flag("--force", force, "proceed past assumption failures");

  auto* check = app.add_subcommand("check", "verify Assumption (A) numerically");
  auto* drift = app.add_subcommand("drift", "build or load the drift table");
  auto* fraclap = app.add_subcommand("fraclap", "evaluate the fractional Laplacian of e^{-V}");
  std::string points = "0.5,1,2";
  fraclap->add_option("--points", points, "comma-separated evaluation points");
  auto* simulate_cmd = app.add_subcommand("simulate", "run the Euler-Maruyama ensemble");
  auto* diagnose = app.add_subcommand("diagnose", "emit the JSON diagnostics report");
  std::string which;
  diagnose->add_option("--which", which,
                       "comma subset of invariance,lyapunov,bounds,holder,convergence");
  auto* compare = app.add_subcommand("compare", "heavy-tail escape benchmark vs Langevin");

  CLI11_PARSE(app, argc, argv);

  try {
    const Config cfg = load_config(config_path);
    if (check->parsed()) return cmd_check(cfg, threads, force);
    if (drift->parsed()) return cmd_drift(cfg, threads, force);
    if (fraclap->parsed()) return cmd_fraclap(cfg, points, threads, force);
    if (simulate_cmd->parsed()) return cmd_simulate(cfg, threads, force);
    if (diagnose->parsed()) return cmd_diagnose(cfg, which, threads, force);
    if (compare->parsed()) return cmd_compare(cfg, threads, force);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const parameter_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
