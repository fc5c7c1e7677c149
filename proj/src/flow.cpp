#include "rham/flow.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "rham/errors.hpp"
#include "rham/kernels.hpp"

namespace rham {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kExtinctionFloor = 1e-3;  // min e^{2 phi} allowed
constexpr double kCurvatureSlack = -1e-8;  // min R below this flags the run

using SourceFn = std::function<void(const MetricState&, double, ScalarField&)>;

double decay_coefficient(EquationKind eq, double t) {
  return eq == EquationKind::log_heat ? 1.0 : 1.0 / (1.0 + 0.5 * t);
}

double diffusion_bound(const MetricState& m) {
  if (m.backend == Backend::flat_torus) return 1.0;
  double d = 0.0;
  for (double p : m.phi.values) d = std::max(d, std::exp(-2.0 * p));
  return d;
}

// Right-hand sides of the coupled system at clock time t.
void eval_rhs(const MetricState& m, const ScalarField& u, EquationKind eq,
              double t, const SourceFn* source, bool evolve_metric,
              ScalarField* dphi, ScalarField* du) {
  const std::size_t n = m.grid->n_nodes;
  ScalarField lap = laplacian(m, u);
  ScalarField grad = gradient_norm_sq(m, u);
  ScalarField r = scalar_curvature(m);
  const double c = decay_coefficient(eq, t);
  du->values.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    (*du)[i] = lap[i] - grad[i] - r[i] - c * u[i];
  if (source != nullptr) {
    ScalarField s(n);
    (*source)(m, t, s);
    for (std::size_t i = 0; i < n; ++i) (*du)[i] += s[i];
  }
  if (m.backend == Backend::conformal_sphere && evolve_metric) {
    dphi->values.resize(n);
    for (std::size_t i = 0; i < n; ++i) (*dphi)[i] = -0.5 * r[i];
  } else if (dphi != nullptr) {
    dphi->values.assign(n, 0.0);
  }
}

MetricState with_phi(const MetricState& base, const ScalarField& phi,
                     double t) {
  MetricState m = base;
  if (base.backend == Backend::conformal_sphere) m.phi = phi;
  m.time = t;
  return m;
}

// Classical RK4 on the coupled (phi, u) state.
void rk4_step(MetricState& metric, ScalarField& u, EquationKind eq, double dt,
              const SourceFn* source, bool evolve_metric) {
  const auto& ops = kernels::active_ops();
  const std::size_t n = metric.grid->n_nodes;
  const bool sphere = metric.backend == Backend::conformal_sphere;
  const double t0 = metric.time;

  ScalarField kp1, kp2, kp3, kp4, ku1, ku2, ku3, ku4;
  ScalarField phi_s(sphere ? n : 0), u_s(n);

  eval_rhs(metric, u, eq, t0, source, evolve_metric, &kp1, &ku1);

  auto stage = [&](const ScalarField& kp, const ScalarField& ku, double frac,
                   ScalarField* out_kp, ScalarField* out_ku) {
    ops.axpy(u.data(), frac * dt, ku.data(), u_s.data(), n);
    if (sphere) ops.axpy(metric.phi.data(), frac * dt, kp.data(), phi_s.data(), n);
    MetricState ms = with_phi(metric, phi_s, t0 + frac * dt);
    eval_rhs(ms, u_s, eq, t0 + frac * dt, source, evolve_metric, out_kp, out_ku);
  };
  stage(kp1, ku1, 0.5, &kp2, &ku2);
  stage(kp2, ku2, 0.5, &kp3, &ku3);
  stage(kp3, ku3, 1.0, &kp4, &ku4);

  ScalarField u_next(n);
  ops.rk4_combine(u.data(), ku1.data(), ku2.data(), ku3.data(), ku4.data(),
                  dt / 6.0, u_next.data(), n);
  u = std::move(u_next);
  if (sphere && evolve_metric) {
    ScalarField phi_next(n);
    ops.rk4_combine(metric.phi.data(), kp1.data(), kp2.data(), kp3.data(),
                    kp4.data(), dt / 6.0, phi_next.data(), n);
    metric.phi = std::move(phi_next);
  }
  metric.time = t0 + dt;
}

std::string make_fingerprint(const ScenarioConfig& c) {
  std::ostringstream os;
  os << (c.backend == Backend::flat_torus ? "flat_torus" : "conformal_sphere")
     << " n=" << c.dim << " N=" << c.grid_n << " " << to_string(c.equation)
     << " u0=(" << c.u0.a << "," << c.u0.b << "," << c.u0.k << ")"
     << " phi0=(" << c.phi0.a << "," << c.phi0.b << "," << c.phi0.k << ")"
     << " T=" << c.t_end;
  return os.str();
}

void validate_config(const ScenarioConfig& c) {
  if (!(c.t_end > 0.0))
    throw Error(ErrorCode::invalid_config, "T_end must be positive");
  if (!(c.t_end > c.monitor_start()))
    throw Error(ErrorCode::invalid_config, "T_end must exceed t_min");
  if (!(c.sigma > 0.0 && c.sigma <= 0.5))
    throw Error(ErrorCode::invalid_config, "sigma must lie in (0, 0.5]");
  if (c.backend == Backend::flat_torus && !(c.torus_length > 0.0))
    throw Error(ErrorCode::invalid_config, "L must be positive");
}

void record_stamp(FlowTrajectory& traj, const MetricState& m,
                  const ScalarField& u) {
  ScalarField r = scalar_curvature(m);
  const double rmin = field_min(r);
  traj.times.push_back(m.time);
  traj.states.push_back(m);
  traj.fields.push_back(u);
  traj.min_r.push_back(rmin);
  traj.max_r.push_back(field_max(r));
  if (rmin < kCurvatureSlack) traj.hypothesis_violated = true;
}

FlowTrajectory run_forward_impl(const ScenarioConfig& config,
                                const ScalarField* u0_override,
                                const SourceFn* source, bool store_all) {
  validate_config(config);
  if (config.equation == EquationKind::conjugate)
    throw Error(ErrorCode::wrong_equation,
                "run_forward integrates log_heat or soliton_heat");
  GridPtr grid =
      build_grid(config.backend, config.grid_n,
                 config.backend == Backend::flat_torus
                     ? std::optional<double>(config.torus_length)
                     : std::nullopt);
  MetricState metric;
  if (config.backend == Backend::flat_torus) {
    metric = make_torus_state(config.dim, grid, config.torus_length, 0.0);
  } else {
    metric = make_sphere_state(
        grid, sample_family(*grid, config.backend, 0.0, config.phi0), 0.0);
    if (field_min(scalar_curvature(metric)) < 0.0)
      throw Error(ErrorCode::invalid_geometry,
                  "initial scalar curvature is negative");
  }
  ScalarField u = u0_override != nullptr
                      ? *u0_override
                      : sample_family(*grid, config.backend,
                                      config.torus_length, config.u0);

  FlowTrajectory traj;
  traj.equation = config.equation;
  traj.backend = config.backend;
  traj.dim = metric.dim;
  traj.t_end_requested = config.t_end;
  traj.monitor_lo = config.monitor_start();
  traj.fingerprint = make_fingerprint(config);
  record_stamp(traj, metric, u);

  const double h = grid->spacing;
  while (metric.time < config.t_end - 1e-13) {
    if (config.backend == Backend::conformal_sphere) {
      double conformal_min = std::exp(2.0 * field_min(metric.phi));
      if (conformal_min <= kExtinctionFloor) {
        traj.truncated = true;
        break;
      }
    }
    const double dt_max =
        config.sigma * h * h / diffusion_bound(metric);
    const double dt = std::min(dt_max, config.t_end - metric.time);
    rk4_step(metric, u, config.equation, dt, source, config.evolve_metric);
    if (!u.all_finite() || !metric.phi.all_finite())
      throw Error(ErrorCode::blowup_error,
                  "non-finite value at t = " + std::to_string(metric.time));
    if (store_all) {
      record_stamp(traj, metric, u);
    } else {
      traj.times.back() = metric.time;
      traj.states.back() = metric;
      traj.fields.back() = u;
    }
  }
  return traj;
}

}  // namespace

const char* to_string(EquationKind k) {
  switch (k) {
    case EquationKind::log_heat: return "log_heat";
    case EquationKind::soliton_heat: return "soliton_heat";
    case EquationKind::conjugate: return "conjugate";
  }
  return "unknown";
}

ScalarField sample_family(const Grid& grid, Backend backend,
                          double torus_length, const DataFamily& fam) {
  ScalarField out(grid.n_nodes);
  for (std::size_t i = 0; i < grid.n_nodes; ++i) {
    const double x = grid.nodes[i];
    const double phase = backend == Backend::flat_torus
                             ? kTwoPi * fam.k * x / torus_length
                             : fam.k * x;
    out[i] = fam.a + fam.b * std::cos(phase);
  }
  return out;
}

std::pair<MetricState, ScalarField> step(const MetricState& metric,
                                         const ScalarField& u,
                                         EquationKind equation, double dt,
                                         double sigma) {
  if (equation == EquationKind::conjugate)
    throw Error(ErrorCode::wrong_equation,
                "step handles log_heat and soliton_heat only");
  if (u.size() != metric.grid->n_nodes)
    throw Error(ErrorCode::shape_error, "u does not match grid");
  const double h = metric.grid->spacing;
  const double dt_max = sigma * h * h / diffusion_bound(metric);
  if (!(dt > 0.0) || dt > dt_max * (1.0 + 1e-12))
    throw Error(ErrorCode::cfl_error,
                "dt = " + std::to_string(dt) + " exceeds stability bound " +
                    std::to_string(dt_max));
  MetricState m = metric;
  ScalarField v = u;
  rk4_step(m, v, equation, dt, nullptr, true);
  if (!v.all_finite() || !m.phi.all_finite())
    throw Error(ErrorCode::blowup_error,
                "non-finite value at t = " + std::to_string(m.time));
  return {std::move(m), std::move(v)};
}

FlowTrajectory run_forward(const ScenarioConfig& config) {
  return run_forward_impl(config, nullptr, nullptr, true);
}

FlowTrajectory run_conjugate(const FlowTrajectory& metric_trajectory,
                             const ScalarField& f_terminal) {
  const auto& src = metric_trajectory;
  if (src.n_stamps() < 2)
    throw Error(ErrorCode::interpolation_error,
                "metric trajectory needs at least two stamps");
  const std::size_t n = src.states.front().grid->n_nodes;
  if (f_terminal.size() != n)
    throw Error(ErrorCode::shape_error, "f_T does not match grid");
  if (!(field_min(f_terminal) > 0.0))
    throw Error(ErrorCode::positivity_error, "f_T must be strictly positive");

  const auto& ops = kernels::active_ops();
  const std::size_t m_last = src.n_stamps() - 1;
  const bool sphere = src.backend == Backend::conformal_sphere;

  FlowTrajectory traj;
  traj.equation = EquationKind::conjugate;
  traj.backend = src.backend;
  traj.dim = src.dim;
  traj.t_end_requested = src.t_end_requested;
  traj.monitor_lo = src.monitor_lo;
  traj.times = src.times;
  traj.states = src.states;
  traj.min_r = src.min_r;
  traj.max_r = src.max_r;
  traj.hypothesis_violated = src.hypothesis_violated;
  traj.truncated = src.truncated;
  traj.fingerprint = "conjugate over [" + src.fingerprint + "]";
  traj.fields.resize(src.n_stamps());
  traj.mass.resize(src.n_stamps());

  // f_tau = Lap_{g(t)} f - R f at clock t = T - tau.
  auto f_rhs = [&](const MetricState& m, const ScalarField& f, ScalarField& out) {
    ScalarField lap = laplacian(m, f);
    ScalarField r = scalar_curvature(m);
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = lap[i] - r[i] * f[i];
  };
  // Metric at a time inside [t_k, t_{k+1}], linear in t.
  auto metric_at = [&](std::size_t k, double w, double t) {
    if (!sphere) {
      MetricState m = src.states[k];
      m.time = t;
      return m;
    }
    ScalarField phi(n);
    const ScalarField& pa = src.states[k].phi;
    const ScalarField& pb = src.states[k + 1].phi;
    for (std::size_t i = 0; i < n; ++i)
      phi[i] = (1.0 - w) * pa[i] + w * pb[i];
    MetricState m = src.states[k];
    m.phi = std::move(phi);
    m.time = t;
    return m;
  };

  ScalarField f = f_terminal;
  traj.fields[m_last] = f;
  traj.mass[m_last] = integrate_measure(src.states[m_last], f);

  ScalarField k1, k2, k3, k4, f_s(n);
  for (std::size_t k = m_last; k-- > 0;) {
    const double ta = src.times[k];
    const double tb = src.times[k + 1];
    const double dtau = tb - ta;
    // Stages in tau; stage offset c*dtau sits at clock time tb - c*dtau.
    MetricState m_hi = metric_at(k, 1.0, tb);
    MetricState m_mid = metric_at(k, 0.5, 0.5 * (ta + tb));
    MetricState m_lo = metric_at(k, 0.0, ta);
    f_rhs(m_hi, f, k1);
    ops.axpy(f.data(), 0.5 * dtau, k1.data(), f_s.data(), n);
    f_rhs(m_mid, f_s, k2);
    ops.axpy(f.data(), 0.5 * dtau, k2.data(), f_s.data(), n);
    f_rhs(m_mid, f_s, k3);
    ops.axpy(f.data(), dtau, k3.data(), f_s.data(), n);
    f_rhs(m_lo, f_s, k4);
    ScalarField f_next(n);
    ops.rk4_combine(f.data(), k1.data(), k2.data(), k3.data(), k4.data(),
                    dtau / 6.0, f_next.data(), n);
    f = std::move(f_next);
    if (!f.all_finite() || !(field_min(f) > 0.0))
      throw Error(ErrorCode::blowup_error,
                  "conjugate solution lost positivity at t = " +
                      std::to_string(ta));
    traj.fields[k] = f;
    traj.mass[k] = integrate_measure(src.states[k], f);
  }
  return traj;
}

ConvergenceReport manufactured_run(const ScenarioConfig& config,
                                   const ManufacturedTarget& target) {
  if (config.equation == EquationKind::conjugate)
    throw Error(ErrorCode::wrong_equation,
                "manufactured runs use log_heat or soliton_heat");
  if (config.backend == Backend::conformal_sphere &&
      (config.phi0.b != 0.0 || target.k != 1))
    throw Error(ErrorCode::invalid_parameter,
                "sphere targets support constant phi0 and the cos(theta) mode");

  const double length = config.torus_length;
  const double amp = target.amp, rate = target.rate;
  const double wavenumber =
      config.backend == Backend::flat_torus ? kTwoPi * target.k / length : 0.0;

  auto mode = [&](double x) {
    if (config.backend == Backend::conformal_sphere) return std::cos(x);
    if (target.k == 0) return 1.0;
    return target.sine ? std::sin(wavenumber * x) : std::cos(wavenumber * x);
  };
  auto mode_deriv = [&](double x) {
    if (config.backend == Backend::conformal_sphere) return -std::sin(x);
    if (target.k == 0) return 0.0;
    return target.sine ? wavenumber * std::cos(wavenumber * x)
                       : -wavenumber * std::sin(wavenumber * x);
  };
  const double lap_eig = config.backend == Backend::conformal_sphere
                             ? -2.0
                             : -wavenumber * wavenumber;
  const double conformal = config.backend == Backend::conformal_sphere
                               ? std::exp(-2.0 * config.phi0.a)
                               : 1.0;
  const double r_const = config.backend == Backend::conformal_sphere
                             ? 2.0 * conformal
                             : 0.0;

  auto exact = [&](double x, double t) { return amp * std::exp(rate * t) * mode(x); };
  // S = u*_t - Lap u* + |grad u*|^2 + R + c(t) u* on the frozen metric.
  SourceFn source = [&](const MetricState& m, double t, ScalarField& s) {
    const double c = decay_coefficient(config.equation, t);
    const double e = amp * std::exp(rate * t);
    for (std::size_t i = 0; i < m.grid->n_nodes; ++i) {
      const double x = m.grid->nodes[i];
      const double ustar = e * mode(x);
      const double grad = conformal * e * mode_deriv(x) * e * mode_deriv(x);
      s[i] = rate * ustar - conformal * lap_eig * ustar + grad + r_const +
             c * ustar;
    }
  };

  ConvergenceReport rep;
  double errs[2] = {0.0, 0.0};
  std::size_t ns[2] = {config.grid_n, 2 * config.grid_n};
  for (int pass = 0; pass < 2; ++pass) {
    ScenarioConfig cfg = config;
    cfg.grid_n = ns[pass];
    cfg.evolve_metric = false;
    GridPtr grid =
        build_grid(cfg.backend, cfg.grid_n,
                   cfg.backend == Backend::flat_torus
                       ? std::optional<double>(cfg.torus_length)
                       : std::nullopt);
    ScalarField u0(grid->n_nodes);
    for (std::size_t i = 0; i < grid->n_nodes; ++i)
      u0[i] = exact(grid->nodes[i], 0.0);
    FlowTrajectory traj = run_forward_impl(cfg, &u0, &source, false);
    const MetricState& m = traj.states.back();
    const ScalarField& u = traj.fields.back();
    double err = 0.0;
    for (std::size_t i = 0; i < grid->n_nodes; ++i)
      err = std::max(err, std::fabs(u[i] - exact(grid->nodes[i], m.time)));
    errs[pass] = err;
  }
  rep.n_coarse = ns[0];
  rep.n_fine = ns[1];
  rep.err_coarse = errs[0];
  rep.err_fine = errs[1];
  rep.order = std::log2(errs[0] / errs[1]);
  return rep;
}

}  // namespace rham
