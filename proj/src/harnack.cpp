#include "rham/harnack.hpp"

#include <cmath>
#include <numbers>

#include "rham/errors.hpp"

namespace rham {

namespace {

std::size_t nearest_stamp(const FlowTrajectory& traj, double t) {
  std::size_t best = 0;
  double dist = std::fabs(traj.times[0] - t);
  for (std::size_t k = 1; k < traj.n_stamps(); ++k) {
    const double d = std::fabs(traj.times[k] - t);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

ScalarField v_field(const MetricState& metric, const ScalarField& f,
                    double tau, int dim) {
  if (!(tau > 0.0)) throw Error(ErrorCode::invalid_time, "tau must be positive");
  if (f.size() != metric.grid->n_nodes)
    throw Error(ErrorCode::shape_error, "f does not match grid");
  if (!(field_min(f) > 0.0))
    throw Error(ErrorCode::domain_error, "f must be strictly positive");
  const double shift = 0.5 * dim * std::log(4.0 * std::numbers::pi * tau);
  ScalarField v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = -std::log(f[i]) - shift;
  return v;
}

}  // namespace

const char* to_string(TheoremId id) {
  switch (id) {
    case TheoremId::thm_1_1: return "thm_1_1";
    case TheoremId::thm_1_2: return "thm_1_2";
    case TheoremId::thm_4_1: return "thm_4_1";
    case TheoremId::thm_3_6_P: return "thm_3_6_P";
    case TheoremId::corollary_2_3: return "corollary_2_3";
  }
  return "unknown";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::hypothesis_breach: return "hypothesis_breach";
  }
  return "unknown";
}

ScalarField compute_H(const MetricState& metric, const ScalarField& u,
                      double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_time, "t must be positive");
  ScalarField lap = laplacian(metric, u);
  ScalarField grad = gradient_norm_sq(metric, u);
  ScalarField r = scalar_curvature(metric);
  const double c = 2.0 * static_cast<double>(metric.dim) / t;
  ScalarField out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = ((2.0 * lap[i] - grad[i]) - 3.0 * r[i]) - c;
  return out;
}

PFields compute_P(const MetricState& metric, const ScalarField& f, double tau) {
  ScalarField v = v_field(metric, f, tau, metric.dim);
  ScalarField lap = laplacian(metric, v);
  ScalarField grad = gradient_norm_sq(metric, v);
  ScalarField r = scalar_curvature(metric);
  const double c = 2.0 * static_cast<double>(metric.dim) / tau;
  PFields out;
  out.p.values.resize(f.size());
  out.p_tilde.values.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.p_tilde[i] = (2.0 * lap[i] - grad[i]) + r[i];
    out.p[i] = out.p_tilde[i] - c;
  }
  return out;
}

ScalarField trace_harnack(const MetricState& metric, const ScalarField& u,
                          double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_time, "t must be positive");
  ScalarField r = scalar_curvature(metric);
  ScalarField rt = scalar_curvature_time_derivative(metric);
  ScalarField ig = inner_grad(metric, r, u);
  ScalarField grad = gradient_norm_sq(metric, u);
  ScalarField out(u.size());
  // On surfaces Rc = (R/2) g, so 2 Rc(grad u, grad u) = R |grad u|^2; the
  // flat torus contributes nothing.
  for (std::size_t i = 0; i < u.size(); ++i)
    out[i] = rt[i] + r[i] / t + 2.0 * ig[i] + r[i] * grad[i];
  return out;
}

double evolution_residual_H(const FlowTrajectory& traj, double t) {
  if (traj.equation == EquationKind::conjugate)
    throw Error(ErrorCode::wrong_equation,
                "H evolution applies to forward trajectories");
  const std::size_t k = nearest_stamp(traj, t);
  if (k == 0 || k + 1 >= traj.n_stamps())
    throw Error(ErrorCode::invalid_time, "stamp has no interior neighbors");
  const double tk = traj.times[k];
  ScalarField h_prev =
      compute_H(traj.states[k - 1], traj.fields[k - 1], traj.times[k - 1]);
  ScalarField h_next =
      compute_H(traj.states[k + 1], traj.fields[k + 1], traj.times[k + 1]);
  const MetricState& m = traj.states[k];
  const ScalarField& u = traj.fields[k];
  ScalarField h_mid = compute_H(m, u, tk);
  ScalarField lap_h = laplacian(m, h_mid);
  ScalarField ig_hu = inner_grad(m, h_mid, u);
  ScalarField deficit = hessian_deficit_norm_sq(m, u, -1, 1.0 / tk);
  ScalarField grad = gradient_norm_sq(m, u);
  ScalarField lap_u = laplacian(m, u);
  ScalarField trace = trace_harnack(m, u, tk);
  const double extra = traj.equation == EquationKind::log_heat
                           ? 1.0
                           : 2.0 / (tk + 2.0);
  const double span = traj.times[k + 1] - traj.times[k - 1];
  double res = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double dh_dt = (h_next[i] - h_prev[i]) / span;
    const double rhs = lap_h[i] - 2.0 * ig_hu[i] - 2.0 * deficit[i] -
                       (2.0 / tk) * h_mid[i] - (2.0 / tk) * grad[i] -
                       2.0 * trace[i] +
                       extra * (-2.0 * lap_u[i] + 2.0 * grad[i]);
    res = std::max(res, std::fabs(dh_dt - rhs));
  }
  return res;
}

double evolution_residual_P(const FlowTrajectory& traj, double tau) {
  if (traj.equation != EquationKind::conjugate)
    throw Error(ErrorCode::wrong_equation,
                "P evolution applies to conjugate trajectories");
  const double t_total = traj.t_final();
  const std::size_t k = nearest_stamp(traj, t_total - tau);
  if (k == 0 || k + 2 >= traj.n_stamps())
    throw Error(ErrorCode::invalid_time, "stamp has no interior neighbors");
  auto p_at = [&](std::size_t j) {
    return compute_P(traj.states[j], traj.fields[j], t_total - traj.times[j]);
  };
  PFields p_prev = p_at(k - 1);
  PFields p_next = p_at(k + 1);
  PFields p_mid = p_at(k);
  const double tau_k = t_total - traj.times[k];
  const MetricState& m = traj.states[k];
  ScalarField v = v_field(m, traj.fields[k], tau_k, m.dim);
  ScalarField lap_p = laplacian(m, p_mid.p);
  ScalarField ig_pv = inner_grad(m, p_mid.p, v);
  ScalarField deficit = hessian_deficit_norm_sq(m, v, +1, 1.0 / tau_k);
  ScalarField grad_v = gradient_norm_sq(m, v);
  ScalarField r = scalar_curvature(m);
  const double span = traj.times[k + 1] - traj.times[k - 1];  // in t
  double res = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    // tau decreases as t increases, hence the reversed difference.
    const double dp_dtau = (p_prev.p[i] - p_next.p[i]) / span;
    const double rhs = lap_p[i] - 2.0 * ig_pv[i] - 2.0 * deficit[i] -
                       (2.0 / tau_k) * p_mid.p[i] -
                       2.0 * grad_v[i] / tau_k - 2.0 * r[i] / tau_k;
    res = std::max(res, std::fabs(dp_dtau - rhs));
  }
  return res;
}

HarnackReport verify_theorem(const FlowTrajectory& traj, TheoremId id,
                             double tolerance) {
  HarnackReport rep;
  rep.theorem = id;
  rep.tolerance = tolerance;
  rep.scenario_fingerprint = traj.fingerprint;

  const bool forward_id = id == TheoremId::thm_1_1 || id == TheoremId::thm_1_2;
  const bool conj_id = id == TheoremId::thm_4_1 || id == TheoremId::thm_3_6_P;
  if (!forward_id && !conj_id)
    throw Error(ErrorCode::wrong_equation,
                "corollary_2_3 is verified by the path optimizer");
  if (forward_id) {
    const EquationKind want = id == TheoremId::thm_1_1
                                  ? EquationKind::log_heat
                                  : EquationKind::soliton_heat;
    if (traj.equation != want)
      throw Error(ErrorCode::wrong_equation,
                  std::string(to_string(id)) + " needs a " + to_string(want) +
                      " trajectory, got " + to_string(traj.equation));
  } else if (traj.equation != EquationKind::conjugate) {
    throw Error(ErrorCode::wrong_equation,
                std::string(to_string(id)) + " needs a conjugate trajectory");
  }

  if (forward_id) {
    rep.window_lo = traj.monitor_lo;
    rep.window_hi = traj.t_final();
    const double n = static_cast<double>(traj.dim);
    double bound = 0.0;
    if (id == TheoremId::thm_1_1) {
      bound = n / 4.0;
      bound = std::min(bound, (n / 4.0) * (1.0 - 5.0 / (rep.window_hi + 1.0)));
      if (rep.window_hi < 4.0) bound = std::min(bound, 0.0);
    }
    double violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < traj.n_stamps(); ++k) {
      const double t = traj.times[k];
      if (t < rep.window_lo || t > rep.window_hi) continue;
      ScalarField h = compute_H(traj.states[k], traj.fields[k], t);
      const double sup = field_max(h);
      rep.times.push_back(t);
      rep.sup_series.push_back(sup);
      rep.min_r_series.push_back(traj.min_r[k]);
      violation = std::max(violation, sup - bound);
    }
    if (rep.times.empty())
      throw Error(ErrorCode::invalid_window, "no stamps in monitored window");
    rep.max_violation = violation;
  } else {
    const double t_total = traj.t_final();
    const double tau_min = traj.monitor_lo;
    rep.window_lo = tau_min;
    rep.window_hi = t_total;
    std::vector<double> sup;  // max_M of P-tilde (4.1) or P (3.6)
    for (std::size_t k = 0; k < traj.n_stamps(); ++k) {
      const double tau = t_total - traj.times[k];
      if (tau < tau_min) continue;
      PFields p = compute_P(traj.states[k], traj.fields[k], tau);
      const double s =
          id == TheoremId::thm_4_1 ? field_max(p.p_tilde) : field_max(p.p);
      rep.times.push_back(traj.times[k]);
      rep.sup_series.push_back(s);
      rep.min_r_series.push_back(traj.min_r[k]);
      sup.push_back(s);
    }
    if (sup.empty())
      throw Error(ErrorCode::invalid_window, "no stamps in monitored window");
    double violation = -std::numeric_limits<double>::infinity();
    if (id == TheoremId::thm_4_1) {
      // max_M P-tilde must be nondecreasing in t.
      for (std::size_t k = 0; k + 1 < sup.size(); ++k)
        violation = std::max(violation, sup[k] - sup[k + 1]);
      if (sup.size() == 1) violation = 0.0;
    } else {
      // P <= 0, conditional on nonnegative scalar curvature throughout.
      bool r_nonneg = true;
      for (double r : traj.min_r)
        if (r < -1e-8) r_nonneg = false;
      if (!r_nonneg) {
        rep.max_violation = 0.0;
        rep.verdict = Verdict::hypothesis_breach;
        return rep;
      }
      for (double s : sup) violation = std::max(violation, s);
    }
    rep.max_violation = violation;
  }

  if (traj.hypothesis_violated)
    rep.verdict = Verdict::hypothesis_breach;
  else
    rep.verdict =
        rep.max_violation <= tolerance ? Verdict::pass : Verdict::fail;
  return rep;
}

}  // namespace rham
