#include "rham/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rham/errors.hpp"
#include "rham/kernels.hpp"

namespace rham {

namespace {

constexpr double kPi = std::numbers::pi;

void require_state(const MetricState& state) {
  if (state.backend == Backend::conformal_sphere && !state.phi.all_finite())
    throw Error(ErrorCode::corrupted_state, "non-finite conformal exponent");
}

void require_aligned(const MetricState& state, const ScalarField& a,
                     const char* what) {
  if (a.size() != state.grid->n_nodes)
    throw Error(ErrorCode::shape_error,
                std::string(what) + " has " + std::to_string(a.size()) +
                    " nodes, grid has " + std::to_string(state.grid->n_nodes));
}

// Fill a (n+2)-entry padded copy of a with the backend's ghost values.
void fill_padded(const Grid& grid, const ScalarField& a,
                 std::vector<double>& pad) {
  const std::size_t n = grid.n_nodes;
  pad.resize(n + 2);
  std::copy(a.values.begin(), a.values.end(), pad.begin() + 1);
  if (grid.kind == GridKind::periodic) {
    pad[0] = a[n - 1];
    pad[n + 1] = a[0];
  } else {
    // Mirror across theta = 0 and theta = pi: a(-s) = a(s), a(pi+s) = a(pi-s).
    pad[0] = a[0];
    pad[n + 1] = a[n - 1];
  }
}

ScalarField exp_scaled(const ScalarField& a, double s) {
  ScalarField out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::exp(s * a[i]);
  return out;
}

}  // namespace

GridPtr build_grid(Backend backend, std::size_t n,
                   std::optional<double> torus_length) {
  if (n < 8)
    throw Error(ErrorCode::invalid_resolution,
                "N = " + std::to_string(n) + ", need N >= 8");
  auto grid = std::make_shared<Grid>();
  grid->n_nodes = n;
  grid->nodes.resize(n);
  if (backend == Backend::flat_torus) {
    if (!torus_length.has_value())
      throw Error(ErrorCode::invalid_geometry, "torus requires side length L");
    const double length = *torus_length;
    if (!(length > 0.0))
      throw Error(ErrorCode::invalid_geometry, "torus side length L <= 0");
    grid->kind = GridKind::periodic;
    grid->length = length;
    grid->spacing = length / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      grid->nodes[i] = static_cast<double>(i) * grid->spacing;
  } else {
    grid->kind = GridKind::polar_staggered;
    grid->length = kPi;
    grid->spacing = kPi / static_cast<double>(n);
    grid->cot_nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      grid->nodes[i] = (static_cast<double>(i) + 0.5) * grid->spacing;
      grid->cot_nodes[i] = std::cos(grid->nodes[i]) / std::sin(grid->nodes[i]);
    }
  }
  return grid;
}

MetricState make_torus_state(int dim, GridPtr grid, double torus_length,
                             double time) {
  if (dim < 1 || dim > 3)
    throw Error(ErrorCode::invalid_geometry, "torus dimension must be 1..3");
  MetricState s;
  s.backend = Backend::flat_torus;
  s.dim = dim;
  s.grid = std::move(grid);
  s.torus_length = torus_length;
  s.time = time;
  return s;
}

MetricState make_sphere_state(GridPtr grid, ScalarField phi, double time) {
  MetricState s;
  s.backend = Backend::conformal_sphere;
  s.dim = 2;
  if (phi.size() != grid->n_nodes)
    throw Error(ErrorCode::shape_error, "phi does not match grid");
  s.grid = std::move(grid);
  s.phi = std::move(phi);
  s.time = time;
  return s;
}

void node_derivatives(const Grid& grid, const ScalarField& a, ScalarField* d1,
                      ScalarField* d2) {
  const std::size_t n = grid.n_nodes;
  static thread_local std::vector<double> pad;
  fill_padded(grid, a, pad);
  const auto& ops = kernels::active_ops();
  if (d1 != nullptr) {
    d1->values.resize(n);
    ops.diff1(pad.data(), d1->data(), n, 1.0 / (2.0 * grid.spacing));
  }
  if (d2 != nullptr) {
    d2->values.resize(n);
    ops.diff2(pad.data(), d2->data(), n, 1.0 / (grid.spacing * grid.spacing));
  }
}

ScalarField scalar_curvature(const MetricState& state) {
  require_state(state);
  const std::size_t n = state.grid->n_nodes;
  if (state.backend == Backend::flat_torus) return ScalarField(n, 0.0);
  ScalarField d1, d2;
  node_derivatives(*state.grid, state.phi, &d1, &d2);
  const auto& cot = state.grid->cot_nodes;
  ScalarField out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lap_s2 = d2[i] + cot[i] * d1[i];
    out[i] = std::exp(-2.0 * state.phi[i]) * (2.0 - 2.0 * lap_s2);
  }
  return out;
}

ScalarField laplacian(const MetricState& state, const ScalarField& a) {
  require_state(state);
  require_aligned(state, a, "field");
  ScalarField d1, d2;
  node_derivatives(*state.grid, a, &d1, &d2);
  if (state.backend == Backend::flat_torus) return d2;
  const std::size_t n = state.grid->n_nodes;
  ScalarField w = exp_scaled(state.phi, -2.0);
  ScalarField out(n);
  kernels::active_ops().weighted_stencil(w.data(), d2.data(),
                                         state.grid->cot_nodes.data(),
                                         d1.data(), out.data(), n);
  return out;
}

ScalarField inner_grad(const MetricState& state, const ScalarField& a,
                       const ScalarField& b) {
  require_state(state);
  require_aligned(state, a, "first field");
  require_aligned(state, b, "second field");
  const std::size_t n = state.grid->n_nodes;
  ScalarField da, db;
  node_derivatives(*state.grid, a, &da, nullptr);
  node_derivatives(*state.grid, b, &db, nullptr);
  ScalarField out(n);
  if (state.backend == Backend::flat_torus) {
    kernels::active_ops().product(da.data(), db.data(), out.data(), n);
  } else {
    ScalarField w = exp_scaled(state.phi, -2.0);
    kernels::active_ops().weighted_product(w.data(), da.data(), db.data(),
                                           out.data(), n);
  }
  return out;
}

ScalarField gradient_norm_sq(const MetricState& state, const ScalarField& a) {
  return inner_grad(state, a, a);
}

ScalarField hessian_deficit_norm_sq(const MetricState& state,
                                    const ScalarField& a, int sign,
                                    double lambda) {
  require_state(state);
  require_aligned(state, a, "field");
  if (!std::isfinite(lambda))
    throw Error(ErrorCode::invalid_parameter, "lambda must be finite");
  if (sign != 1 && sign != -1)
    throw Error(ErrorCode::invalid_parameter, "sign must be +1 or -1");
  const std::size_t n = state.grid->n_nodes;
  ScalarField out(n);
  if (state.backend == Backend::flat_torus) {
    // Hess a has a single nonzero component a_xx; Rc = 0.  The remaining
    // dim-1 diagonal entries of the deficit are -lambda each.
    ScalarField d2;
    node_derivatives(*state.grid, a, nullptr, &d2);
    const double rest = static_cast<double>(state.dim - 1) * lambda * lambda;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = d2[i] - lambda;
      out[i] = t * t + rest;
    }
    return out;
  }
  // Axisymmetric conformal sphere, mixed components of Hess a:
  //   (Hess a)^theta_theta = e^{-2 phi} (a'' - phi' a')
  //   (Hess a)^vphi_vphi   = e^{-2 phi} (cot theta + phi') a'
  // and Rc = (R/2) g.
  ScalarField p1, da1, da2;
  node_derivatives(*state.grid, state.phi, &p1, nullptr);
  node_derivatives(*state.grid, a, &da1, &da2);
  ScalarField r = scalar_curvature(state);
  const auto& cot = state.grid->cot_nodes;
  const double s = static_cast<double>(sign);
  for (std::size_t i = 0; i < n; ++i) {
    const double em2 = std::exp(-2.0 * state.phi[i]);
    const double t1 = em2 * (da2[i] - p1[i] * da1[i]) + s * 0.5 * r[i] - lambda;
    const double t2 =
        em2 * ((cot[i] + p1[i]) * da1[i]) + s * 0.5 * r[i] - lambda;
    out[i] = t1 * t1 + t2 * t2;
  }
  return out;
}

ScalarField ricci_flow_rhs(const MetricState& state) {
  require_state(state);
  const std::size_t n = state.grid->n_nodes;
  if (state.backend == Backend::flat_torus) return ScalarField(n, 0.0);
  ScalarField r = scalar_curvature(state);
  ScalarField out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = -0.5 * r[i];
  return out;
}

ScalarField scalar_curvature_time_derivative(const MetricState& state) {
  require_state(state);
  const std::size_t n = state.grid->n_nodes;
  if (state.backend == Backend::flat_torus) return ScalarField(n, 0.0);
  ScalarField r = scalar_curvature(state);
  ScalarField lap_r = laplacian(state, r);
  ScalarField out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lap_r[i] + r[i] * r[i];
  return out;
}

double integrate_measure(const MetricState& state, const ScalarField& a) {
  require_state(state);
  require_aligned(state, a, "field");
  const std::size_t n = state.grid->n_nodes;
  const double h = state.grid->spacing;
  double sum = 0.0;
  if (state.backend == Backend::flat_torus) {
    double cross = 1.0;  // volume of the constant transverse directions
    for (int d = 1; d < state.dim; ++d) cross *= state.torus_length;
    for (std::size_t i = 0; i < n; ++i) sum += a[i];
    return sum * h * cross;
  }
  // dmu = 2 pi e^{2 phi} sin(theta) dtheta, midpoint rule on the staggered grid.
  for (std::size_t i = 0; i < n; ++i)
    sum += a[i] * std::exp(2.0 * state.phi[i]) * std::sin(state.grid->nodes[i]);
  return 2.0 * kPi * h * sum;
}

}  // namespace rham
