#pragma once

#include <string>
#include <vector>

#include "rham/flow.hpp"

namespace rham {

enum class TheoremId { thm_1_1, thm_1_2, thm_4_1, thm_3_6_P, corollary_2_3 };
enum class Verdict { pass, fail, hypothesis_breach };

const char* to_string(TheoremId id);
const char* to_string(Verdict v);

struct HarnackReport {
  TheoremId theorem = TheoremId::thm_1_1;
  double window_lo = 0.0, window_hi = 0.0;
  std::vector<double> times;       // monitored stamps (t, or tau-indexed by t)
  std::vector<double> sup_series;  // sup_M of the monitored quantity
  std::vector<double> min_r_series;
  std::vector<double> aux_series;  // corollary runs: reverse-direction slack
  double max_violation = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::pass;
  std::string scenario_fingerprint;
};

// H = 2 Lap u - |grad u|^2 - 3R - 2n/t
ScalarField compute_H(const MetricState& metric, const ScalarField& u,
                      double t);

struct PFields {
  ScalarField p;        // 2 Lap v - |grad v|^2 + R - 2n/tau
  ScalarField p_tilde;  // P + 2n/tau
};
PFields compute_P(const MetricState& metric, const ScalarField& f, double tau);

// dR/dt + R/t + 2 grad R . grad u + 2 Rc(grad u, grad u)
ScalarField trace_harnack(const MetricState& metric, const ScalarField& u,
                          double t);

// max-norm residual of the evolution identity for H (resp. P) at an interior
// stored stamp, with the time derivative taken as a centered difference.
double evolution_residual_H(const FlowTrajectory& traj, double t);
double evolution_residual_P(const FlowTrajectory& traj, double tau);

// Default tolerance used by the verification suite.
inline double default_tolerance(double h) {
  return std::max(1e-6, 5.0 * h * h);
}

HarnackReport verify_theorem(const FlowTrajectory& traj, TheoremId id,
                             double tolerance);

}  // namespace rham
