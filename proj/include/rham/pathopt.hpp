#pragma once

#include <vector>

#include "rham/harnack.hpp"

namespace rham {

// Discretized space-time path gamma: positions at strictly increasing times.
struct SpaceTimePath {
  std::vector<double> times;
  std::vector<double> positions;
  double action = 0.0;
};

struct PathQuery {
  double x1 = 0.0, t1 = 0.0;
  double x2 = 0.0, t2 = 0.0;
};

// Action of one fixed path: quadrature of e^t (|gamma'|^2 + R + 2n/t + n/4)
// over the stored stamp intervals, midpoint-weighted per elementary interval.
double path_action(const FlowTrajectory& traj, const SpaceTimePath& path);

struct OptimizeOptions {
  std::size_t jump_window = 0;  // 0 selects max(2, ceil(N/8))
  bool refine = true;
  int max_sweeps = 8;
};

struct OptimizeResult {
  double gamma = 0.0;
  SpaceTimePath path;
  PathQuery snapped;  // query after snapping to stamps and grid nodes
  std::vector<double> sweep_actions;  // seed action, then one entry per sweep
};

// Dynamic programming over the space-time lattice followed by coordinate
// descent on the node positions.
OptimizeResult optimize_path(const FlowTrajectory& traj, const PathQuery& q,
                             const OptimizeOptions& options = {});

HarnackReport verify_integrated_harnack(const FlowTrajectory& traj,
                                        const std::vector<PathQuery>& queries,
                                        double tolerance);

// Deterministic endpoint pairs spread over the grid and monitored window.
std::vector<PathQuery> default_query_lattice(const FlowTrajectory& traj,
                                             std::size_t count = 10);

}  // namespace rham
