#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rham/field.hpp"

namespace rham {

enum class Backend { flat_torus, conformal_sphere };

enum class GridKind { periodic, polar_staggered };

// Uniform 1-d sample grid.  The polar grid is staggered: nodes sit at
// theta_i = (i + 1/2) * pi/N, so neither pole carries a node and cot(theta)
// stays finite in every stencil.
struct Grid {
  GridKind kind;
  std::size_t n_nodes;
  double spacing;
  double length;  // periodic extent L (periodic grids), pi for polar
  std::vector<double> nodes;
  std::vector<double> cot_nodes;  // polar grids only
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr build_grid(Backend backend, std::size_t n,
                   std::optional<double> torus_length = std::nullopt);

// Geometry snapshot at one instant of the flow.  The sphere backend carries
// the conformal exponent phi of g = e^{2 phi} g_{S^2} (axisymmetric, so phi is
// a function of the polar angle only); the torus metric is the flat one and
// never changes.
struct MetricState {
  Backend backend;
  int dim;  // n: 1..3 for the torus, 2 for the sphere
  GridPtr grid;
  double torus_length = 0.0;
  ScalarField phi;  // sphere only
  double time = 0.0;
};

MetricState make_torus_state(int dim, GridPtr grid, double torus_length,
                             double time = 0.0);
MetricState make_sphere_state(GridPtr grid, ScalarField phi, double time = 0.0);

// Centered second-order first/second derivatives with ghost closure
// (periodic wrap on the torus, mirror values across the poles).
void node_derivatives(const Grid& grid, const ScalarField& a, ScalarField* d1,
                      ScalarField* d2);

ScalarField scalar_curvature(const MetricState& state);
ScalarField laplacian(const MetricState& state, const ScalarField& a);
ScalarField gradient_norm_sq(const MetricState& state, const ScalarField& a);
ScalarField inner_grad(const MetricState& state, const ScalarField& a,
                       const ScalarField& b);
// |Hess a + sign*Rc - lambda*g|^2 pointwise; sign is +1 or -1.
ScalarField hessian_deficit_norm_sq(const MetricState& state,
                                    const ScalarField& a, int sign,
                                    double lambda);
// d phi/dt under the Ricci flow (zero field on the torus).
ScalarField ricci_flow_rhs(const MetricState& state);
// dR/dt along the flow: Delta_g R + R^2 on surfaces, zero on the torus.
ScalarField scalar_curvature_time_derivative(const MetricState& state);
double integrate_measure(const MetricState& state, const ScalarField& a);

}  // namespace rham
