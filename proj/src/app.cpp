#include "rham/app.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "rham/errors.hpp"

namespace rham::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

std::string iso_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Backend parse_backend(const std::string& s) {
  if (s == "flat_torus") return Backend::flat_torus;
  if (s == "conformal_sphere") return Backend::conformal_sphere;
  throw Error(ErrorCode::invalid_config, "backend must be flat_torus or conformal_sphere");
}

EquationKind parse_equation(const std::string& s) {
  if (s == "log_heat") return EquationKind::log_heat;
  if (s == "soliton_heat") return EquationKind::soliton_heat;
  if (s == "conjugate") return EquationKind::conjugate;
  throw Error(ErrorCode::invalid_config, "equation must be log_heat, soliton_heat or conjugate");
}

TheoremId parse_theorem(const std::string& s) {
  if (s == "thm_1_1") return TheoremId::thm_1_1;
  if (s == "thm_1_2") return TheoremId::thm_1_2;
  if (s == "thm_4_1") return TheoremId::thm_4_1;
  if (s == "thm_3_6_P") return TheoremId::thm_3_6_P;
  if (s == "corollary_2_3") return TheoremId::corollary_2_3;
  throw Error(ErrorCode::invalid_config, "unknown theorem id: " + s);
}

DataFamily parse_family(const json& j, const char* field) {
  if (!j.is_object())
    throw Error(ErrorCode::invalid_config, std::string(field) + " must be an object {a,b,k}");
  DataFamily f;
  f.a = j.value("a", 0.0);
  f.b = j.value("b", 0.0);
  f.k = j.value("k", 1);
  return f;
}

bool is_numeric_failure(ErrorCode c) {
  return c == ErrorCode::cfl_error || c == ErrorCode::blowup_error ||
         c == ErrorCode::positivity_error;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string trajectory_csv(const FlowTrajectory& traj) {
  std::ostringstream os;
  os << "step,t,min_R,max_R,mass,sup_u,inf_u\n";
  const bool conj = traj.equation == EquationKind::conjugate;
  for (std::size_t k = 0; k < traj.n_stamps(); ++k) {
    os << k << ',' << format17(traj.times[k]) << ','
       << format17(traj.min_r[k]) << ',' << format17(traj.max_r[k]) << ',';
    if (conj) os << format17(traj.mass[k]);
    os << ',' << format17(field_max(traj.fields[k])) << ','
       << format17(field_min(traj.fields[k])) << '\n';
  }
  return os.str();
}

json report_json(const HarnackReport& rep, const std::string& series_file) {
  json j;
  j["theorem"] = to_string(rep.theorem);
  j["window"] = {{"lo", rep.window_lo}, {"hi", rep.window_hi}};
  j["tolerance"] = rep.tolerance;
  j["max_violation"] = rep.max_violation;
  j["verdict"] = to_string(rep.verdict);
  j["scenario"] = rep.scenario_fingerprint;
  j["series"] = series_file;
  return j;
}

std::string series_csv(const HarnackReport& rep) {
  std::ostringstream os;
  os << "t,sup_quantity,min_R\n";
  for (std::size_t i = 0; i < rep.times.size(); ++i)
    os << format17(rep.times[i]) << ',' << format17(rep.sup_series[i]) << ','
       << format17(rep.min_r_series[i]) << '\n';
  return os.str();
}

std::vector<TheoremId> default_theorems(EquationKind eq) {
  switch (eq) {
    case EquationKind::log_heat: return {TheoremId::thm_1_1};
    case EquationKind::soliton_heat: return {TheoremId::thm_1_2};
    case EquationKind::conjugate:
      return {TheoremId::thm_4_1, TheoremId::thm_3_6_P};
  }
  return {};
}

}  // namespace

std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

AppConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("JSON parse: ") + e.what());
  }
  AppConfig cfg;
  ScenarioConfig& s = cfg.scenario;
  if (!j.contains("backend"))
    throw Error(ErrorCode::invalid_config, "missing field: backend");
  s.backend = parse_backend(j["backend"].get<std::string>());
  s.dim = j.value("n", s.backend == Backend::conformal_sphere ? 2 : 1);
  if (s.backend == Backend::conformal_sphere && s.dim != 2)
    throw Error(ErrorCode::invalid_config, "n must be 2 on the sphere");
  if (s.backend == Backend::flat_torus && (s.dim < 1 || s.dim > 3))
    throw Error(ErrorCode::invalid_config, "n must be 1..3 on the torus");
  if (!j.contains("N")) throw Error(ErrorCode::invalid_config, "missing field: N");
  const long long grid_n = j["N"].get<long long>();
  if (grid_n < 8) throw Error(ErrorCode::invalid_config, "N must be >= 8");
  s.grid_n = static_cast<std::size_t>(grid_n);
  if (s.backend == Backend::flat_torus) {
    if (!j.contains("L"))
      throw Error(ErrorCode::invalid_config, "missing field: L (torus side length)");
    s.torus_length = j["L"].get<double>();
    if (!(s.torus_length > 0.0))
      throw Error(ErrorCode::invalid_config, "L must be positive");
  }
  if (j.contains("phi0")) s.phi0 = parse_family(j["phi0"], "phi0");
  if (j.contains("u0")) s.u0 = parse_family(j["u0"], "u0");
  if (!j.contains("equation"))
    throw Error(ErrorCode::invalid_config, "missing field: equation");
  s.equation = parse_equation(j["equation"].get<std::string>());
  if (!j.contains("T_end"))
    throw Error(ErrorCode::invalid_config, "missing field: T_end");
  s.t_end = j["T_end"].get<double>();
  if (!(s.t_end > 0.0))
    throw Error(ErrorCode::invalid_config, "T_end must be positive");
  s.t_min = j.value("t_min", 0.0);
  if (s.t_min < 0.0)
    throw Error(ErrorCode::invalid_config, "t_min must be nonnegative");
  if (!(s.t_end > s.monitor_start()))
    throw Error(ErrorCode::invalid_config, "T_end must exceed t_min");
  s.sigma = j.value("sigma", 0.25);
  if (!(s.sigma > 0.0 && s.sigma <= 0.5))
    throw Error(ErrorCode::invalid_config, "sigma must lie in (0, 0.5]");
  if (j.contains("theorems"))
    for (const auto& t : j["theorems"])
      cfg.theorems.push_back(parse_theorem(t.get<std::string>()));
  if (j.contains("path_queries")) {
    for (const auto& q : j["path_queries"]) {
      PathQuery pq;
      pq.x1 = q.at("x1").get<double>();
      pq.t1 = q.at("t1").get<double>();
      pq.x2 = q.at("x2").get<double>();
      pq.t2 = q.at("t2").get<double>();
      if (!(pq.t1 < pq.t2))
        throw Error(ErrorCode::invalid_config, "path_queries require t1 < t2");
      cfg.path_queries.push_back(pq);
    }
  }
  cfg.output_dir = j.value("output_dir", std::string("runs"));
  cfg.canonical_bytes = j.dump();  // nlohmann objects keep keys sorted
  cfg.digest = fnv1a_hex(cfg.canonical_bytes);
  return cfg;
}

AppConfig load_config(const std::string& path) {
  if (!fs::exists(path))
    throw Error(ErrorCode::invalid_config, "config file not found: " + path);
  return parse_config_text(read_text(path));
}

FlowTrajectory run_scenario(const AppConfig& cfg) {
  if (cfg.scenario.equation != EquationKind::conjugate)
    return run_forward(cfg.scenario);
  // Conjugate run: forward metric trajectory first, then the backward sweep
  // with terminal data f_T = e^{-u0}.
  ScenarioConfig fwd = cfg.scenario;
  fwd.equation = EquationKind::log_heat;
  fwd.u0 = DataFamily{0.0, 0.0, 1};
  FlowTrajectory metric_traj = run_forward(fwd);
  const Grid& grid = *metric_traj.states.front().grid;
  ScalarField u_t = sample_family(grid, cfg.scenario.backend,
                                  cfg.scenario.torus_length, cfg.scenario.u0);
  ScalarField f_t(u_t.size());
  for (std::size_t i = 0; i < u_t.size(); ++i) f_t[i] = std::exp(-u_t[i]);
  return run_conjugate(metric_traj, f_t);
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
  AppConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "rham run: " << e.what() << '\n';
    return 2;
  }
  const fs::path base = out_override.empty() ? cfg.output_dir : out_override;
  const fs::path dir = base / cfg.digest;
  fs::create_directories(dir);
  write_text(dir / "config.json", cfg.canonical_bytes);

  json manifest;
  manifest["config_digest"] = cfg.digest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["started_at"] = iso_now();
  manifest["outputs"] = json::array();
  manifest["verdicts"] = json::object();
  manifest["error"] = nullptr;

  int code = 0;
  try {
    FlowTrajectory traj = run_scenario(cfg);
    write_text(dir / "trajectory.csv", trajectory_csv(traj));
    manifest["outputs"].push_back("trajectory.csv");
    manifest["truncated"] = traj.truncated;
    manifest["hypothesis_violated"] = traj.hypothesis_violated;
    manifest["stamps"] = traj.n_stamps();
  } catch (const Error& e) {
    manifest["error"] = e.what();
    code = is_numeric_failure(e.code()) ? 3 : 2;
    std::cerr << "rham run: " << e.what() << '\n';
  }
  manifest["finished_at"] = iso_now();
  manifest["outputs"].push_back("config.json");
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  if (code == 0) std::cout << dir.string() << '\n';
  return code;
}

int cmd_verify(const std::string& run_dir,
               const std::vector<std::string>& theorem_names,
               std::optional<double> tolerance_override) {
  const fs::path dir = run_dir;
  if (!fs::exists(dir / "manifest.json") || !fs::exists(dir / "config.json") ||
      !fs::exists(dir / "trajectory.csv")) {
    std::cerr << "rham verify: " << run_dir
              << " lacks a completed manifest/trajectory\n";
    return 2;
  }
  AppConfig cfg;
  FlowTrajectory traj;
  try {
    cfg = load_config((dir / "config.json").string());
    traj = run_scenario(cfg);  // deterministic rebuild of the full fields
  } catch (const Error& e) {
    std::cerr << "rham verify: " << e.what() << '\n';
    return 2;
  }
  std::vector<TheoremId> ids;
  try {
    for (const auto& s : theorem_names) ids.push_back(parse_theorem(s));
  } catch (const Error& e) {
    std::cerr << "rham verify: " << e.what() << '\n';
    return 2;
  }
  if (ids.empty()) ids = cfg.theorems;
  if (ids.empty()) ids = default_theorems(cfg.scenario.equation);

  const double h = traj.states.front().grid->spacing;
  const double tol = tolerance_override.value_or(default_tolerance(h));
  bool any_fail = false;
  for (TheoremId id : ids) {
    HarnackReport rep;
    try {
      if (id == TheoremId::corollary_2_3) {
        std::vector<PathQuery> queries = cfg.path_queries;
        if (queries.empty()) queries = default_query_lattice(traj);
        rep = verify_integrated_harnack(traj, queries, tol);
      } else {
        rep = verify_theorem(traj, id, tol);
      }
    } catch (const Error& e) {
      std::cerr << "rham verify: " << e.what() << '\n';
      return 2;
    }
    const std::string stem = std::string("report_") + to_string(id);
    write_text(dir / (stem + ".json"),
               report_json(rep, stem + "_series.csv").dump(2) + "\n");
    write_text(dir / (stem + "_series.csv"), series_csv(rep));
    std::cout << to_string(id) << ": " << to_string(rep.verdict)
              << " (max violation " << format17(rep.max_violation) << ")\n";
    if (rep.verdict == Verdict::fail) any_fail = true;
  }
  return any_fail ? 4 : 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::size_t>& resolutions,
              const std::string& out_override) {
  if (resolutions.size() < 2) {
    std::cerr << "rham sweep: need at least two resolutions\n";
    return 2;
  }
  for (std::size_t n : resolutions)
    if (n < 8) {
      std::cerr << "rham sweep: resolutions must be >= 8\n";
      return 2;
    }
  AppConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const Error& e) {
    std::cerr << "rham sweep: " << e.what() << '\n';
    return 2;
  }

  struct Row {
    std::size_t n;
    double residual_h = NAN, residual_p = NAN, mass_drift = NAN;
  };
  std::vector<Row> rows;
  try {
    for (std::size_t n : resolutions) {
      AppConfig c = cfg;
      c.scenario.grid_n = n;
      FlowTrajectory traj = run_scenario(c);
      Row row{n};
      if (traj.equation == EquationKind::conjugate) {
        const double t_total = traj.t_final();
        const double tau_mid = 0.5 * (traj.monitor_lo + t_total);
        row.residual_p = evolution_residual_P(traj, tau_mid);
        const double ref = traj.mass.back();
        double drift = 0.0;
        for (double m : traj.mass)
          drift = std::max(drift, std::fabs(m - ref) / std::fabs(ref));
        row.mass_drift = drift;
      } else {
        const double t_mid = 0.5 * (traj.monitor_lo + traj.t_final());
        row.residual_h = evolution_residual_H(traj, t_mid);
      }
      rows.push_back(row);
    }
  } catch (const Error& e) {
    std::cerr << "rham sweep: " << e.what() << '\n';
    return is_numeric_failure(e.code()) ? 3 : 2;
  }

  std::ostringstream os;
  os << "N,residual_H,residual_P,mass_drift,order_H,order_P,order_mass\n";
  auto order = [](double a, double b, std::size_t na, std::size_t nb) {
    if (std::isnan(a) || std::isnan(b) || a <= 0.0 || b <= 0.0)
      return static_cast<double>(NAN);
    return std::log(a / b) /
           std::log(static_cast<double>(nb) / static_cast<double>(na));
  };
  auto cell = [](double x) { return std::isnan(x) ? std::string() : format17(x); };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    double oh = NAN, op = NAN, om = NAN;
    if (i > 0) {
      oh = order(rows[i - 1].residual_h, r.residual_h, rows[i - 1].n, r.n);
      op = order(rows[i - 1].residual_p, r.residual_p, rows[i - 1].n, r.n);
      om = order(rows[i - 1].mass_drift, r.mass_drift, rows[i - 1].n, r.n);
    }
    os << r.n << ',' << cell(r.residual_h) << ',' << cell(r.residual_p) << ','
       << cell(r.mass_drift) << ',' << cell(oh) << ',' << cell(op) << ','
       << cell(om) << '\n';
  }
  const fs::path base = out_override.empty() ? cfg.output_dir : out_override;
  const fs::path dir = base / ("sweep-" + cfg.digest);
  fs::create_directories(dir);
  write_text(dir / "convergence.csv", os.str());
  std::cout << (dir / "convergence.csv").string() << '\n';
  return 0;
}

}  // namespace rham::app
