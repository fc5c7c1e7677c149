#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rham/geometry.hpp"

namespace rham {

// log_heat:     u_t = Lap u - |grad u|^2 - R - u
// soliton_heat: u_t = Lap u - |grad u|^2 - R - u/(1 + t/2)
// conjugate:    f_tau = Lap_{g(t)} f - R f,  tau = T - t  (backward sweep)
enum class EquationKind { log_heat, soliton_heat, conjugate };

const char* to_string(EquationKind k);

// One-mode data family: a + b*cos(k*theta) on the sphere,
// a + b*cos(2 pi k x / L) on the torus.  k = 0 means the constant a + b.
struct DataFamily {
  double a = 0.0;
  double b = 0.0;
  int k = 1;
};

struct ScenarioConfig {
  Backend backend = Backend::flat_torus;
  int dim = 1;
  std::size_t grid_n = 64;
  double torus_length = 6.283185307179586476925286766559;  // 2 pi
  DataFamily phi0;  // sphere initial conformal exponent
  DataFamily u0;    // forward initial data (terminal f = e^{-u0} for conjugate)
  EquationKind equation = EquationKind::log_heat;
  double t_end = 1.0;
  double t_min = 0.0;  // 0 selects the default 0.05 * t_end
  double sigma = 0.25;
  bool evolve_metric = true;  // manufactured runs freeze the metric

  double monitor_start() const { return t_min > 0.0 ? t_min : 0.05 * t_end; }
};

struct FlowTrajectory {
  EquationKind equation = EquationKind::log_heat;
  Backend backend = Backend::flat_torus;
  int dim = 1;
  double t_end_requested = 0.0;
  double monitor_lo = 0.0;  // forward: t window start; conjugate: tau_min
  std::vector<double> times;
  std::vector<MetricState> states;
  std::vector<ScalarField> fields;  // u for forward runs, f for conjugate
  std::vector<double> min_r;
  std::vector<double> max_r;
  std::vector<double> mass;  // conjugate runs only
  bool hypothesis_violated = false;
  bool truncated = false;
  std::string fingerprint;

  std::size_t n_stamps() const { return times.size(); }
  double t_final() const { return times.back(); }
};

// Evaluate the data family on the backend's grid coordinates.
ScalarField sample_family(const Grid& grid, Backend backend,
                          double torus_length, const DataFamily& fam);

// One coupled RK4 step of the metric and the scalar equation.
std::pair<MetricState, ScalarField> step(const MetricState& metric,
                                         const ScalarField& u,
                                         EquationKind equation, double dt,
                                         double sigma = 0.25);

FlowTrajectory run_forward(const ScenarioConfig& config);

// Conjugate solve backward over the stored metric states; f_terminal is the
// data at t = T.  Metric values between stamps are linear in t.
FlowTrajectory run_conjugate(const FlowTrajectory& metric_trajectory,
                             const ScalarField& f_terminal);

// Manufactured target u*(x,t) = amp * e^{rate t} * m(x); m is cos/sin of the
// k-th mode on the torus (k = 0 gives the constant), cos(theta) on the sphere.
struct ManufacturedTarget {
  double amp = 1.0;
  double rate = -1.0;
  int k = 1;
  bool sine = true;  // torus mode shape
};

struct ConvergenceReport {
  std::size_t n_coarse = 0, n_fine = 0;
  double err_coarse = 0.0, err_fine = 0.0;
  double order = 0.0;
};

ConvergenceReport manufactured_run(const ScenarioConfig& config,
                                   const ManufacturedTarget& target);

}  // namespace rham
