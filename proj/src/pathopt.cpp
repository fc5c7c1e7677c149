#include "rham/pathopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rham/errors.hpp"

namespace rham {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Minimal-length representative of a torus displacement, ties broken toward
// the nonnegative side.
double wrap_displacement(double d, double length) {
  d = std::fmod(d, length);
  if (d > 0.5 * length) d -= length;
  if (d < -0.5 * length) d += length;
  if (d == -0.5 * length) d = 0.5 * length;
  return d;
}

double wrap_position(double x, double length) {
  x = std::fmod(x, length);
  if (x < 0.0) x += length;
  return x;
}

// Caches per-stamp curvature (and conformal factor) fields and interpolates
// them linearly in x and t.
class PathEvaluator {
 public:
  explicit PathEvaluator(const FlowTrajectory& traj) : traj_(traj) {
    const auto& g = *traj.states.front().grid;
    n_ = g.n_nodes;
    h_ = g.spacing;
    periodic_ = g.kind == GridKind::periodic;
    sphere_ = traj.backend == Backend::conformal_sphere;
    r_.resize(traj.n_stamps());
    e2phi_.resize(traj.n_stamps());
  }

  const FlowTrajectory& traj() const { return traj_; }
  bool sphere() const { return sphere_; }
  double length() const { return traj_.states.front().grid->length; }
  std::size_t nodes() const { return n_; }

  double node_value(const ScalarField& a, double x) const {
    if (periodic_) {
      const double u = x / h_;
      double ip = 0.0;
      double frac = std::modf(u, &ip);
      std::size_t i0 = static_cast<std::size_t>(ip) % n_;
      std::size_t i1 = (i0 + 1) % n_;
      if (frac < 0.0) {  // negative x
        frac += 1.0;
        i0 = (i0 + n_ - 1) % n_;
        i1 = (i0 + 1) % n_;
      }
      return (1.0 - frac) * a[i0] + frac * a[i1];
    }
    // Staggered polar grid; mirror closure makes the end values flat.
    const double u = x / h_ - 0.5;
    if (u <= 0.0) return a[0];
    if (u >= static_cast<double>(n_ - 1)) return a[n_ - 1];
    const std::size_t i0 = static_cast<std::size_t>(u);
    const double frac = u - static_cast<double>(i0);
    return (1.0 - frac) * a[i0] + frac * a[i0 + 1];
  }

  // Slice index j with times[j] <= t <= times[j+1].
  std::size_t slice_of(double t) const {
    const auto& ts = traj_.times;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t j = static_cast<std::size_t>(it - ts.begin());
    if (j > 0) --j;
    if (j + 1 >= ts.size()) j = ts.size() - 2;
    return j;
  }

  double r_at(double x, double t) const {
    const std::size_t j = slice_of(t);
    const double w = (t - traj_.times[j]) / (traj_.times[j + 1] - traj_.times[j]);
    return (1.0 - w) * node_value(curvature(j), x) +
           w * node_value(curvature(j + 1), x);
  }

  double e2phi_at(double x, double t) const {
    if (!sphere_) return 1.0;
    const std::size_t j = slice_of(t);
    const double w = (t - traj_.times[j]) / (traj_.times[j + 1] - traj_.times[j]);
    return (1.0 - w) * node_value(conformal(j), x) +
           w * node_value(conformal(j + 1), x);
  }

  // Contribution of one elementary interval [q0, q1] traversed at constant
  // velocity v; xm is the (wrapped) midpoint position.
  double contribution(double q0, double q1, double xm, double v) const {
    const double tm = 0.5 * (q0 + q1);
    const double n = static_cast<double>(traj_.dim);
    const double speed_sq = (sphere_ ? e2phi_at(xm, tm) : 1.0) * v * v;
    return (q1 - q0) * std::exp(tm) *
           (speed_sq + r_at(xm, tm) + 2.0 * n / tm + 0.25 * n);
  }

  // Straight segment covering exactly the stamp interval k -> k+1.  The
  // arithmetic mirrors path_action's elementary-interval evaluation so sums
  // of slice costs and path_action agree bit for bit.
  double slice_cost(std::size_t k, double xa, double xb) const {
    const double q0 = traj_.times[k];
    const double q1 = traj_.times[k + 1];
    double d = xb - xa;
    if (periodic_) d = wrap_displacement(d, length());
    const double v = d / (q1 - q0);
    const double tm = 0.5 * (q0 + q1);
    double xm = xa + v * (tm - q0);
    if (periodic_) xm = wrap_position(xm, length());
    return contribution(q0, q1, xm, v);
  }

 private:
  const ScalarField& curvature(std::size_t j) const {
    if (r_[j].size() == 0) r_[j] = scalar_curvature(traj_.states[j]);
    return r_[j];
  }
  const ScalarField& conformal(std::size_t j) const {
    if (e2phi_[j].size() == 0) {
      const ScalarField& phi = traj_.states[j].phi;
      ScalarField e(n_);
      for (std::size_t i = 0; i < n_; ++i) e[i] = std::exp(2.0 * phi[i]);
      e2phi_[j] = std::move(e);
    }
    return e2phi_[j];
  }

  const FlowTrajectory& traj_;
  std::size_t n_ = 0;
  double h_ = 0.0;
  bool periodic_ = false;
  bool sphere_ = false;
  mutable std::vector<ScalarField> r_;
  mutable std::vector<ScalarField> e2phi_;
};

void require_log_heat(const FlowTrajectory& traj) {
  if (traj.equation != EquationKind::log_heat)
    throw Error(ErrorCode::wrong_equation,
                "path action is defined over log_heat trajectories");
}

void require_window(const FlowTrajectory& traj, double t) {
  if (!(t > 0.0)) throw Error(ErrorCode::invalid_time, "t must be positive");
  if (t < traj.times.front() - 1e-12 || t > traj.times.back() + 1e-12)
    throw Error(ErrorCode::invalid_window,
                "time outside the trajectory window");
}

std::size_t nearest_stamp_index(const FlowTrajectory& traj, double t) {
  std::size_t best = 0;
  double dist = kInf;
  for (std::size_t k = 0; k < traj.n_stamps(); ++k) {
    const double d = std::fabs(traj.times[k] - t);
    if (d < dist) {
      dist = d;
      best = k;
    }
  }
  return best;
}

std::size_t nearest_node_index(const Grid& grid, double x, bool periodic) {
  double best_d = kInf;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.n_nodes; ++i) {
    double d = std::fabs(grid.nodes[i] - x);
    if (periodic) d = std::fabs(wrap_displacement(grid.nodes[i] - x, grid.length));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace

double path_action(const FlowTrajectory& traj, const SpaceTimePath& path) {
  require_log_heat(traj);
  if (path.times.size() < 2 || path.times.size() != path.positions.size())
    throw Error(ErrorCode::invalid_parameter, "path needs >= 2 nodes");
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i)
    if (!(path.times[i] < path.times[i + 1]))
      throw Error(ErrorCode::invalid_time, "path times must increase");
  require_window(traj, path.times.front());
  require_window(traj, path.times.back());

  PathEvaluator ev(traj);
  const bool periodic = !ev.sphere();

  // Per-segment velocities from the minimal displacement representative.
  std::vector<double> velocity(path.times.size() - 1);
  for (std::size_t s = 0; s + 1 < path.times.size(); ++s) {
    double d = path.positions[s + 1] - path.positions[s];
    if (periodic) d = wrap_displacement(d, ev.length());
    velocity[s] = d / (path.times[s + 1] - path.times[s]);
  }

  // Breakpoints: every stored stamp inside the path range plus the path nodes.
  std::vector<double> cuts;
  for (double t : path.times) cuts.push_back(t);
  for (double t : traj.times)
    if (t > path.times.front() && t < path.times.back()) cuts.push_back(t);
  std::sort(cuts.begin(), cuts.end());

  double total = 0.0;
  std::size_t seg = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double q0 = cuts[i], q1 = cuts[i + 1];
    if (!(q1 > q0)) continue;
    while (seg + 2 < path.times.size() && path.times[seg + 1] <= q0 + 1e-15)
      ++seg;
    const double tm = 0.5 * (q0 + q1);
    double xm = path.positions[seg] + velocity[seg] * (tm - path.times[seg]);
    if (periodic) xm = wrap_position(xm, ev.length());
    total += ev.contribution(q0, q1, xm, velocity[seg]);
  }
  return total;
}

OptimizeResult optimize_path(const FlowTrajectory& traj, const PathQuery& q,
                             const OptimizeOptions& options) {
  require_log_heat(traj);
  if (!(q.t1 < q.t2))
    throw Error(ErrorCode::invalid_window, "query requires t1 < t2");
  require_window(traj, q.t1);
  require_window(traj, q.t2);

  PathEvaluator ev(traj);
  const Grid& grid = *traj.states.front().grid;
  const bool periodic = !ev.sphere();
  const std::size_t n = grid.n_nodes;

  const std::size_t k1 = nearest_stamp_index(traj, q.t1);
  const std::size_t k2 = nearest_stamp_index(traj, q.t2);
  if (k2 < k1 + 4)
    throw Error(ErrorCode::resolution_error,
                "fewer than 4 stamps between t1 and t2");
  if (!(traj.times[k1] > 0.0))
    throw Error(ErrorCode::invalid_time, "t1 must be positive");
  const std::size_t i1 = nearest_node_index(grid, q.x1, periodic);
  const std::size_t i2 = nearest_node_index(grid, q.x2, periodic);

  OptimizeResult result;
  result.snapped = {grid.nodes[i1], traj.times[k1], grid.nodes[i2],
                    traj.times[k2]};

  std::size_t window = options.jump_window;
  if (window == 0) window = std::max<std::size_t>(2, (n + 7) / 8);

  const std::size_t slices = k2 - k1;  // transitions
  // DP forward in time; ties break toward the smaller predecessor index.
  std::vector<double> best(n, kInf), next(n);
  std::vector<std::vector<int>> back(slices, std::vector<int>(n, -1));
  best[i1] = 0.0;

  auto index_dist = [&](std::size_t a, std::size_t b) {
    const std::size_t d = a > b ? a - b : b - a;
    return periodic ? std::min(d, n - d) : d;
  };

  for (std::size_t s = 0; s < slices; ++s) {
    const std::size_t k = k1 + s;
    std::fill(next.begin(), next.end(), kInf);
    for (std::size_t jp = 0; jp < n; ++jp) {
      if (best[jp] == kInf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (index_dist(jp, j) > window) continue;
        const double c = best[jp] + ev.slice_cost(k, grid.nodes[jp], grid.nodes[j]);
        if (c < next[j]) {
          next[j] = c;
          back[s][j] = static_cast<int>(jp);
        }
      }
    }
    best.swap(next);
  }
  if (best[i2] == kInf)
    throw Error(ErrorCode::resolution_error, "jump window leaves no feasible path");
  const double dp_value = best[i2];

  // Reconstruct the DP path.
  SpaceTimePath dp_path;
  dp_path.times.resize(slices + 1);
  dp_path.positions.resize(slices + 1);
  {
    std::size_t j = i2;
    for (std::size_t s = slices; s-- > 0;) {
      dp_path.times[s + 1] = traj.times[k1 + s + 1];
      dp_path.positions[s + 1] = grid.nodes[j];
      j = static_cast<std::size_t>(back[s][j]);
    }
    dp_path.times[0] = traj.times[k1];
    dp_path.positions[0] = grid.nodes[i1];
  }

  auto total_action = [&](const SpaceTimePath& p) {
    double a = 0.0;
    for (std::size_t s = 0; s + 1 < p.times.size(); ++s)
      a += ev.slice_cost(k1 + s, p.positions[s], p.positions[s + 1]);
    return a;
  };

  if (!options.refine) {
    dp_path.action = dp_value;
    result.gamma = dp_value;
    result.path = std::move(dp_path);
    result.sweep_actions.push_back(dp_value);
    return result;
  }

  // Straight-line candidate as an alternative seed.
  SpaceTimePath straight;
  straight.times = dp_path.times;
  straight.positions.resize(slices + 1);
  {
    double d = grid.nodes[i2] - grid.nodes[i1];
    if (periodic) d = wrap_displacement(d, ev.length());
    const double span = traj.times[k2] - traj.times[k1];
    for (std::size_t s = 0; s <= slices; ++s) {
      double x = grid.nodes[i1] + d * (traj.times[k1 + s] - traj.times[k1]) / span;
      if (periodic) x = wrap_position(x, ev.length());
      straight.positions[s] = x;
    }
  }
  const double straight_value = total_action(straight);

  SpaceTimePath path = straight_value < dp_value ? straight : dp_path;
  double action = std::min(straight_value, dp_value);
  result.sweep_actions.push_back(action);

  // Coordinate descent on interior node positions; golden-section line search
  // in a bracket of one jump window around the current position.
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  const double radius = static_cast<double>(window) * grid.spacing;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    for (std::size_t kk = 1; kk < path.positions.size() - 1; ++kk) {
      auto local = [&](double p) {
        return ev.slice_cost(k1 + kk - 1, path.positions[kk - 1], p) +
               ev.slice_cost(k1 + kk, p, path.positions[kk + 1]);
      };
      double lo = path.positions[kk] - radius;
      double hi = path.positions[kk] + radius;
      if (!periodic) {
        lo = std::max(lo, 1e-9);
        hi = std::min(hi, grid.length - 1e-9);
      }
      double a = lo, b = hi;
      double c1 = b - golden * (b - a), c2 = a + golden * (b - a);
      double f1 = local(c1), f2 = local(c2);
      for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
          b = c2;
          c2 = c1;
          f2 = f1;
          c1 = b - golden * (b - a);
          f1 = local(c1);
        } else {
          a = c1;
          c1 = c2;
          f1 = f2;
          c2 = a + golden * (b - a);
          f2 = local(c2);
        }
      }
      const double cand = 0.5 * (a + b);
      if (local(cand) < local(path.positions[kk])) path.positions[kk] = cand;
    }
    const double swept = total_action(path);
    result.sweep_actions.push_back(swept);
    if (action - swept < 1e-13 * (1.0 + std::fabs(action))) {
      action = std::min(action, swept);
      break;
    }
    action = swept;
  }

  path.action = action;
  result.gamma = action;
  result.path = std::move(path);
  return result;
}

HarnackReport verify_integrated_harnack(const FlowTrajectory& traj,
                                        const std::vector<PathQuery>& queries,
                                        double tolerance) {
  require_log_heat(traj);
  if (queries.empty())
    throw Error(ErrorCode::invalid_window, "no queries supplied");
  HarnackReport rep;
  rep.theorem = TheoremId::corollary_2_3;
  rep.tolerance = tolerance;
  rep.scenario_fingerprint = traj.fingerprint;
  rep.window_lo = traj.monitor_lo;
  rep.window_hi = traj.t_final();

  double worst = -kInf;
  for (const auto& q : queries) {
    if (!(q.t1 < q.t2))
      throw Error(ErrorCode::invalid_window, "query requires t1 < t2");
    OptimizeResult opt = optimize_path(traj, q);
    const std::size_t ka = nearest_stamp_index(traj, opt.snapped.t1);
    const std::size_t kb = nearest_stamp_index(traj, opt.snapped.t2);
    const Grid& grid = *traj.states.front().grid;
    const bool periodic = traj.backend == Backend::flat_torus;
    const std::size_t ia = nearest_node_index(grid, opt.snapped.x1, periodic);
    const std::size_t ib = nearest_node_index(grid, opt.snapped.x2, periodic);
    const double u1 = traj.fields[ka][ia];
    const double u2 = traj.fields[kb][ib];
    const double e1 = std::exp(opt.snapped.t1);
    const double e2 = std::exp(opt.snapped.t2);
    // e^{t1} ln f1 <= e^{t2} ln f2 + Gamma/2, with ln f = -u.
    const double margin = (e2 * u2 - e1 * u1 - 0.5 * opt.gamma) / e2;
    const double reverse = (e1 * u1 - e2 * u2 - 0.5 * opt.gamma) / e2;
    rep.times.push_back(opt.snapped.t2);
    rep.sup_series.push_back(margin);
    rep.aux_series.push_back(reverse);
    rep.min_r_series.push_back(traj.min_r[kb]);
    worst = std::max(worst, margin);
  }
  rep.max_violation = worst;
  if (traj.hypothesis_violated)
    rep.verdict = Verdict::hypothesis_breach;
  else
    rep.verdict = worst <= tolerance ? Verdict::pass : Verdict::fail;
  return rep;
}

std::vector<PathQuery> default_query_lattice(const FlowTrajectory& traj,
                                             std::size_t count) {
  const Grid& grid = *traj.states.front().grid;
  const std::size_t n = grid.n_nodes;
  const double lo = std::max(traj.monitor_lo, traj.times.front());
  const double hi = traj.t_final();
  const double span = hi - lo;
  std::vector<PathQuery> out;
  out.reserve(count);
  for (std::size_t q = 0; q < count; ++q) {
    const std::size_t ia = (q * n) / count % n;
    const std::size_t ib = ((3 * q + 5) * n / (2 * count)) % n;
    PathQuery pq;
    pq.x1 = grid.nodes[ia];
    pq.x2 = grid.nodes[ib];
    pq.t1 = lo + span * (0.10 + 0.04 * static_cast<double>(q));
    pq.t2 = lo + span * (0.55 + 0.04 * static_cast<double>(q));
    out.push_back(pq);
  }
  return out;
}

}  // namespace rham
