#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>

#include "rham/errors.hpp"
#include "rham/flow.hpp"

using namespace rham;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScenarioConfig torus_config(EquationKind eq, std::size_t n = 64) {
  ScenarioConfig cfg;
  cfg.backend = Backend::flat_torus;
  cfg.dim = 1;
  cfg.grid_n = n;
  cfg.equation = eq;
  cfg.t_end = 1.0;
  return cfg;
}

ScenarioConfig sphere_config(EquationKind eq, double t_end, std::size_t n = 64) {
  ScenarioConfig cfg;
  cfg.backend = Backend::conformal_sphere;
  cfg.dim = 2;
  cfg.grid_n = n;
  cfg.equation = eq;
  cfg.t_end = t_end;
  return cfg;
}

}  // namespace

TEST_CASE("constant data on the flat torus reduces to an exact ODE") {
  // log_heat with u0 = -1: u(t) = -e^{-t}.
  auto cfg = torus_config(EquationKind::log_heat);
  cfg.u0 = {-1.0, 0.0, 0};
  FlowTrajectory traj = run_forward(cfg);
  CHECK(traj.t_final() == doctest::Approx(1.0).epsilon(1e-12));
  const double expect_log = -std::exp(-1.0);
  for (double x : traj.fields.back().values)
    CHECK(std::fabs(x - expect_log) < 1e-8);

  // soliton_heat with u0 = 2: u(t) = 2 / (1 + t/2)^2.
  cfg = torus_config(EquationKind::soliton_heat);
  cfg.u0 = {2.0, 0.0, 0};
  traj = run_forward(cfg);
  const double expect_sol = 2.0 / (1.5 * 1.5);
  for (double x : traj.fields.back().values)
    CHECK(std::fabs(x - expect_sol) < 1e-8);
}

TEST_CASE("round sphere shrinks on the exact schedule") {
  auto cfg = sphere_config(EquationKind::log_heat, 0.4);
  cfg.u0 = {0.5, 0.0, 0};
  FlowTrajectory traj = run_forward(cfg);
  CHECK_FALSE(traj.truncated);
  CHECK_FALSE(traj.hypothesis_violated);
  for (std::size_t k = 0; k < traj.n_stamps(); ++k) {
    const double t = traj.times[k];
    const double conformal = 1.0 - 2.0 * t;
    for (double p : traj.states[k].phi.values)
      CHECK(std::fabs(std::exp(2.0 * p) - conformal) < 1e-8);
    CHECK(traj.min_r[k] == doctest::Approx(2.0 / conformal).epsilon(1e-6));
    CHECK(traj.max_r[k] == doctest::Approx(2.0 / conformal).epsilon(1e-6));
  }
}

TEST_CASE("near-extinction runs are truncated, not crashed") {
  auto cfg = sphere_config(EquationKind::log_heat, 0.6);
  cfg.u0 = {0.0, 0.0, 0};
  FlowTrajectory traj = run_forward(cfg);
  CHECK(traj.truncated);
  CHECK(traj.t_final() < 0.51);
  CHECK(traj.t_final() > 0.45);
}

TEST_CASE("initially negative curvature on the sphere is rejected") {
  auto cfg = sphere_config(EquationKind::log_heat, 0.1);
  cfg.phi0 = {0.0, 1.0, 1};  // R = e^{-2 cos t}(2 + 4 cos t) < 0 near the south pole
  CHECK_THROWS_AS(run_forward(cfg), Error);
}

TEST_CASE("step enforces the time-step ceiling and the equation kind") {
  auto grid = build_grid(Backend::flat_torus, 16, kTwoPi);
  MetricState m = make_torus_state(1, grid, kTwoPi);
  ScalarField u(16, 0.0);
  const double h = grid->spacing;
  CHECK_THROWS_WITH_AS(step(m, u, EquationKind::log_heat, 0.5 * h * h, 0.25),
                       doctest::Contains("cfl"), Error);
  CHECK_THROWS_AS(step(m, u, EquationKind::conjugate, 0.1 * h * h, 0.25), Error);
  auto [m2, u2] = step(m, u, EquationKind::log_heat, 0.1 * h * h, 0.25);
  CHECK(u2.size() == 16);
}

TEST_CASE("one time integrator step is locally fourth order") {
  // Constant data on the torus: u' = -u with u(0) = 1, local error dt^5/120.
  auto grid = build_grid(Backend::flat_torus, 8, kTwoPi);
  MetricState m = make_torus_state(1, grid, kTwoPi);
  ScalarField u(8, 1.0);
  auto local_err = [&](double dt) {
    auto [m2, u2] = step(m, u, EquationKind::log_heat, dt, 0.25);
    return std::fabs(u2[0] - std::exp(-dt));
  };
  const double e1 = local_err(0.1);
  const double e2 = local_err(0.05);
  CHECK(e1 == doctest::Approx(std::pow(0.1, 5) / 120.0).epsilon(0.1));
  CHECK(e1 / e2 == doctest::Approx(32.0).epsilon(0.15));
}

TEST_CASE("backward solve reproduces the single-mode decay oracle") {
  // Stationary flat torus, f(x, tau) = 1 + 0.5 e^{-tau} cos x.
  auto cfg = torus_config(EquationKind::log_heat, 128);
  cfg.t_end = 1.0;
  FlowTrajectory fwd = run_forward(cfg);
  ScalarField f_term(128);
  for (std::size_t i = 0; i < 128; ++i)
    f_term[i] = 1.0 + 0.5 * std::cos(fwd.states[0].grid->nodes[i]);
  FlowTrajectory conj = run_conjugate(fwd, f_term);
  CHECK(conj.equation == EquationKind::conjugate);
  CHECK(conj.n_stamps() == fwd.n_stamps());

  double err = 0.0;
  for (std::size_t k = 0; k < conj.n_stamps(); ++k) {
    const double tau = conj.t_final() - conj.times[k];
    const ScalarField& f = conj.fields[k];
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double x = conj.states[k].grid->nodes[i];
      err = std::max(err,
                     std::fabs(f[i] - (1.0 + 0.5 * std::exp(-tau) * std::cos(x))));
    }
  }
  CHECK(err < 1e-3);

  // Zero scalar curvature: total f-measure is conserved to roundoff.
  double drift = 0.0;
  for (double msv : conj.mass) drift = std::max(drift, std::fabs(msv - conj.mass.back()));
  CHECK(drift < 1e-10);
}

TEST_CASE("backward solve rejects nonpositive terminal data") {
  auto cfg = torus_config(EquationKind::log_heat, 32);
  FlowTrajectory fwd = run_forward(cfg);
  ScalarField f_term(32, 1.0);
  f_term[5] = 0.0;
  CHECK_THROWS_AS(run_conjugate(fwd, f_term), Error);
}

TEST_CASE("repeat runs are bitwise identical") {
  auto cfg = sphere_config(EquationKind::soliton_heat, 0.3);
  cfg.u0 = {0.2, 0.1, 1};
  cfg.phi0 = {0.0, 0.05, 1};
  FlowTrajectory a = run_forward(cfg);
  FlowTrajectory b = run_forward(cfg);
  REQUIRE(a.n_stamps() == b.n_stamps());
  const ScalarField& ua = a.fields.back();
  const ScalarField& ub = b.fields.back();
  CHECK(std::memcmp(ua.data(), ub.data(), ua.size() * sizeof(double)) == 0);
  CHECK(a.fingerprint == b.fingerprint);
}

TEST_CASE("manufactured solutions converge at second order in space") {
  ManufacturedTarget target{0.5, -1.0, 1, true};
  {
    auto cfg = torus_config(EquationKind::log_heat, 32);
    cfg.t_end = 0.5;
    ConvergenceReport rep = manufactured_run(cfg, target);
    CHECK(rep.n_fine == 2 * rep.n_coarse);
    CHECK(rep.err_fine < rep.err_coarse);
    CHECK(rep.order > 1.7);
    CHECK(rep.order < 2.3);
  }
  {
    auto cfg = torus_config(EquationKind::soliton_heat, 32);
    cfg.t_end = 0.5;
    ConvergenceReport rep = manufactured_run(cfg, target);
    CHECK(rep.order > 1.7);
    CHECK(rep.order < 2.3);
  }
  {
    auto cfg = sphere_config(EquationKind::log_heat, 0.25, 32);
    ManufacturedTarget sph{0.3, -1.0, 1, false};
    ConvergenceReport rep = manufactured_run(cfg, sph);
    CHECK(rep.order > 1.7);
    CHECK(rep.order < 2.3);
  }
  {
    // sphere targets other than the first polar mode are not supported
    auto cfg = sphere_config(EquationKind::log_heat, 0.25, 32);
    ManufacturedTarget bad{0.3, -1.0, 2, false};
    CHECK_THROWS_AS(manufactured_run(cfg, bad), Error);
  }
}

TEST_CASE("manufactured constant mode needs no source and is integrator-exact") {
  ManufacturedTarget target{0.7, -1.0, 0, true};
  auto cfg = torus_config(EquationKind::log_heat, 32);
  cfg.t_end = 0.5;
  ConvergenceReport rep = manufactured_run(cfg, target);
  CHECK(rep.err_coarse < 1e-8);
  CHECK(rep.err_fine < 1e-8);
}
