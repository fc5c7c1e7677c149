#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "rham/errors.hpp"
#include "rham/geometry.hpp"

using namespace rham;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * kPi;

MetricState unit_sphere(std::size_t n) {
  auto grid = build_grid(Backend::conformal_sphere, n);
  return make_sphere_state(grid, ScalarField(n, 0.0));
}

MetricState torus1(std::size_t n, double length = kTwoPi) {
  auto grid = build_grid(Backend::flat_torus, n, length);
  return make_torus_state(1, grid, length);
}

ScalarField sampled(const MetricState& m, double (*f)(double)) {
  ScalarField out(m.grid->n_nodes);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(m.grid->nodes[i]);
  return out;
}

double linf_error(const ScalarField& got, const MetricState& m,
                  double (*expect)(double)) {
  double e = 0.0;
  for (std::size_t i = 0; i < got.size(); ++i)
    e = std::max(e, std::fabs(got[i] - expect(m.grid->nodes[i])));
  return e;
}

}  // namespace

TEST_CASE("build_grid: staggered polar nodes") {
  auto g = build_grid(Backend::conformal_sphere, 8);
  CHECK(g->spacing == doctest::Approx(kPi / 8).epsilon(1e-15));
  CHECK(g->nodes.front() == doctest::Approx(kPi / 16));
  CHECK(g->nodes.back() == doctest::Approx(kPi - kPi / 16));
  // no node at the poles
  for (double t : g->nodes) CHECK((t > 0.0 && t < kPi));
}

TEST_CASE("build_grid: uniform periodic nodes") {
  auto g = build_grid(Backend::flat_torus, 8, kTwoPi);
  CHECK(g->spacing == doctest::Approx(kPi / 4));
  CHECK(g->nodes[0] == 0.0);
  CHECK(g->nodes[1] == doctest::Approx(kPi / 4));
  CHECK(g->nodes[7] == doctest::Approx(7 * kPi / 4));
}

TEST_CASE("build_grid: preconditions") {
  CHECK_THROWS_WITH_AS(build_grid(Backend::conformal_sphere, 7), doctest::Contains("invalid-resolution"), Error);
  CHECK_THROWS_AS(build_grid(Backend::flat_torus, 8, -1.0), Error);
  CHECK_THROWS_AS(build_grid(Backend::flat_torus, 8), Error);
}

TEST_CASE("scalar curvature: round sphere and flat torus") {
  auto sphere = unit_sphere(32);
  ScalarField r = scalar_curvature(sphere);
  for (double x : r.values) CHECK(x == doctest::Approx(2.0).epsilon(1e-13));

  auto torus = torus1(32);
  ScalarField r0 = scalar_curvature(torus);
  for (double x : r0.values) CHECK(x == 0.0);
}

TEST_CASE("scalar curvature: phi = 0.1 cos(theta)") {
  // cos(theta) is a Delta_{S^2} eigenfunction with eigenvalue -2, so
  // R = e^{-0.2 cos t}(2 + 0.4 cos t) exactly in the continuum.
  const std::size_t n = 256;
  auto grid = build_grid(Backend::conformal_sphere, n);
  ScalarField phi(n);
  for (std::size_t i = 0; i < n; ++i) phi[i] = 0.1 * std::cos(grid->nodes[i]);
  auto state = make_sphere_state(grid, phi);
  ScalarField r = scalar_curvature(state);
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::cos(grid->nodes[i]);
    err = std::max(err, std::fabs(r[i] - std::exp(-0.2 * c) * (2.0 + 0.4 * c)));
  }
  CHECK(err < 5e-4);  // O(h^2)

  // corruption is detected
  phi[3] = NAN;
  auto bad = make_sphere_state(grid, phi);
  CHECK_THROWS_AS(scalar_curvature(bad), Error);
}

TEST_CASE("laplacian: eigenfunction oracles converge at second order") {
  struct Case {
    bool sphere;
    double (*f)(double);
    double (*lap)(double);
  };
  static auto cos1 = [](double t) { return std::cos(t); };
  (void)cos1;
  Case cases[] = {
      {true, [](double t) { return std::cos(t); },
       [](double t) { return -2.0 * std::cos(t); }},
      {true,
       [](double t) {
         const double c = std::cos(t);
         return 0.5 * (3.0 * c * c - 1.0);  // Legendre P2
       },
       [](double t) {
         const double c = std::cos(t);
         return -6.0 * 0.5 * (3.0 * c * c - 1.0);
       }},
      {false, [](double t) { return std::cos(t); },
       [](double t) { return -std::cos(t); }},
  };
  for (const auto& c : cases) {
    double errs[2];
    std::size_t idx = 0;
    for (std::size_t n : {64, 128}) {
      MetricState m = c.sphere ? unit_sphere(n) : torus1(n);
      errs[idx++] = linf_error(laplacian(m, sampled(m, c.f)), m, c.lap);
    }
    const double order = std::log2(errs[0] / errs[1]);
    CHECK(order == doctest::Approx(2.0).epsilon(0.15));
  }
}

TEST_CASE("laplacian: constants and shape errors") {
  auto m = unit_sphere(16);
  ScalarField c(16, 3.25);
  ScalarField lap = laplacian(m, c);
  for (double x : lap.values) CHECK(x == 0.0);
  CHECK_THROWS_AS(laplacian(m, ScalarField(8, 0.0)), Error);
}

TEST_CASE("gradient_norm_sq: oracles") {
  {
    auto m = unit_sphere(128);
    ScalarField g = gradient_norm_sq(m, sampled(m, [](double t) { return std::cos(t); }));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double s = std::sin(m.grid->nodes[i]);
      err = std::max(err, std::fabs(g[i] - s * s));
    }
    CHECK(err < 2e-3);
  }
  {
    auto m = torus1(128);
    ScalarField g = gradient_norm_sq(m, sampled(m, [](double x) { return std::sin(x); }));
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double c = std::cos(m.grid->nodes[i]);
      err = std::max(err, std::fabs(g[i] - c * c));
    }
    CHECK(err < 2e-3);
  }
  {
    auto m = torus1(32);
    ScalarField g = gradient_norm_sq(m, ScalarField(32, 5.0));
    for (double x : g.values) CHECK(x == 0.0);
  }
}

TEST_CASE("inner_grad: bilinear, symmetric, definitional identity") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (bool sphere : {false, true}) {
    MetricState m = sphere ? unit_sphere(48) : torus1(48);
    ScalarField a(48), b(48), c(48);
    for (std::size_t i = 0; i < 48; ++i) {
      a[i] = dist(rng);
      b[i] = dist(rng);
      c[i] = dist(rng);
    }
    ScalarField ab = inner_grad(m, a, b);
    ScalarField ba = inner_grad(m, b, a);
    for (std::size_t i = 0; i < 48; ++i)
      CHECK(ab[i] == doctest::Approx(ba[i]).epsilon(1e-12));

    // inner_grad(a, a) is gradient_norm_sq(a) bit for bit
    ScalarField aa = inner_grad(m, a, a);
    ScalarField gg = gradient_norm_sq(m, a);
    CHECK(std::memcmp(aa.data(), gg.data(), 48 * sizeof(double)) == 0);
    for (double x : aa.values) CHECK(x >= 0.0);

    // bilinearity: <a+2c, b> = <a,b> + 2<c,b>
    ScalarField a2c(48);
    for (std::size_t i = 0; i < 48; ++i) a2c[i] = a[i] + 2.0 * c[i];
    ScalarField lhs = inner_grad(m, a2c, b);
    ScalarField cb = inner_grad(m, c, b);
    for (std::size_t i = 0; i < 48; ++i)
      CHECK(lhs[i] == doctest::Approx(ab[i] + 2.0 * cb[i]).epsilon(1e-11));

    // constant second argument kills the product
    ScalarField z = inner_grad(m, a, ScalarField(48, 4.0));
    for (double x : z.values) CHECK(x == 0.0);
  }
}

TEST_CASE("hessian deficit: constant-field values") {
  {
    // torus n=1, a constant, lambda = 1/t with t = 0.5: |-(1/t) g|^2 = 1/t^2
    auto m = torus1(16);
    ScalarField d = hessian_deficit_norm_sq(m, ScalarField(16, 2.0), -1, 2.0);
    for (double x : d.values) CHECK(x == doctest::Approx(4.0).epsilon(1e-14));
  }
  {
    // sphere phi=0 (R=2), a constant, lambda = 1: 2*(R/2 + 1)^2 = 8
    auto m = unit_sphere(16);
    ScalarField d = hessian_deficit_norm_sq(m, ScalarField(16, 0.0), -1, 1.0);
    for (double x : d.values) CHECK(x == doctest::Approx(8.0).epsilon(1e-13));
  }
  auto m = torus1(16);
  CHECK_THROWS_AS(hessian_deficit_norm_sq(m, ScalarField(16, 0.0), -1, NAN), Error);
}

TEST_CASE("hessian deficit: discrete trace inequality") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> dist(-0.5, 0.5);
  for (bool sphere : {false, true}) {
    for (int dim : {1, 2, 3}) {
      if (sphere && dim != 2) continue;
      const std::size_t n = 64;
      MetricState m;
      if (sphere) {
        auto grid = build_grid(Backend::conformal_sphere, n);
        ScalarField phi(n);
        for (std::size_t i = 0; i < n; ++i)
          phi[i] = 0.05 * std::cos(grid->nodes[i]) + 0.02 * dist(rng);
        m = make_sphere_state(grid, phi);
      } else {
        m = make_torus_state(dim, build_grid(Backend::flat_torus, n, kTwoPi), kTwoPi);
      }
      ScalarField a(n);
      for (std::size_t i = 0; i < n; ++i) a[i] = dist(rng);
      ScalarField r = scalar_curvature(m);
      for (int sign : {-1, 1}) {
        for (double lam : {0.1, 1.0, 7.3, 100.0}) {
          ScalarField deficit = hessian_deficit_norm_sq(m, a, sign, lam);
          ScalarField lap = laplacian(m, a);
          const double nn = static_cast<double>(m.dim);
          for (std::size_t i = 0; i < n; ++i) {
            const double tr = lap[i] + sign * r[i] - nn * lam;
            CHECK(deficit[i] >= tr * tr / nn - 1e-12 * (1.0 + tr * tr));
          }
        }
      }
    }
  }
}

TEST_CASE("ricci_flow_rhs") {
  auto torus = torus1(16);
  for (double x : ricci_flow_rhs(torus).values) CHECK(x == 0.0);
  auto sphere = unit_sphere(16);
  for (double x : ricci_flow_rhs(sphere).values)
    CHECK(x == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("scalar curvature time derivative") {
  auto torus = torus1(16);
  for (double x : scalar_curvature_time_derivative(torus).values) CHECK(x == 0.0);
  auto sphere = unit_sphere(32);
  for (double x : scalar_curvature_time_derivative(sphere).values)
    CHECK(x == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("integrate_measure") {
  {
    auto m = unit_sphere(64);
    CHECK(integrate_measure(m, ScalarField(64, 1.0)) ==
          doctest::Approx(4.0 * kPi).epsilon(1e-4));
    ScalarField c2 = sampled(m, [](double t) {
      const double c = std::cos(t);
      return c * c;
    });
    CHECK(integrate_measure(m, c2) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-3));
  }
  {
    auto m = torus1(64);
    CHECK(integrate_measure(m, ScalarField(64, 1.0)) ==
          doctest::Approx(kTwoPi).epsilon(1e-14));
  }
  {
    // phi == c: area scales by e^{2c}
    const std::size_t n = 128;
    auto grid = build_grid(Backend::conformal_sphere, n);
    auto m = make_sphere_state(grid, ScalarField(n, 0.3));
    CHECK(integrate_measure(m, ScalarField(n, 1.0)) ==
          doctest::Approx(4.0 * kPi * std::exp(0.6)).epsilon(1e-4));
  }
  {
    // n=2 torus picks up a factor L for the transverse direction
    auto grid = build_grid(Backend::flat_torus, 32, 2.0);
    auto m = make_torus_state(2, grid, 2.0);
    CHECK(integrate_measure(m, ScalarField(32, 1.0)) == doctest::Approx(4.0).epsilon(1e-13));
  }
}
