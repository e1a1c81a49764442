#include <doctest.h>

#include <cmath>

#include "momap/critical.hpp"
#include "momap/harness.hpp"

using namespace momap;

namespace {

// bumps at x0 = (1,0), xi0 = (1,0), t0 = 0 with radii 0.5, 0.5, 1
Amplitude reference_amplitude() {
  AmplitudeConfig c;
  c.kind = "bump";
  c.x.center = {1.0, 0.0};
  c.x.radius = 0.5;
  c.xi.center = {1.0, 0.0};
  c.xi.radius = 0.5;
  c.t.center = {0.0};
  c.t.radius = 1.0;
  return amplitude_from_config(c, 2, 1);
}

// supports separated from the critical set: xi nowhere parallel to x
Amplitude null_amplitude() {
  AmplitudeConfig c;
  c.kind = "bump";
  c.x.center = {1.0, 0.0};
  c.x.radius = 0.2;
  c.xi.center = {0.0, 1.0};
  c.xi.radius = 0.2;
  c.t.center = {0.0};
  c.t.radius = 30.0;
  return amplitude_from_config(c, 2, 1);
}

constexpr double kL0Reference = 0.15126149107741288;

}  // namespace

TEST_CASE("regularity on the zero level") {
  const GroupAction a = builtin_action("so2");
  CHECK(is_regular(a, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 0.0), 1));
  CHECK_FALSE(is_regular(a, Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), 1));
  // off the zero level the question is ill-posed
  CHECK_THROWS_AS(
      is_regular(a, Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0), 1),
      std::invalid_argument);

  const GroupAction so3 = builtin_action("so3");
  CHECK(is_regular(so3, Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(2, 0, 0), 2));
}

TEST_CASE("projection onto the critical set") {
  const GroupAction a = builtin_action("so2");
  PhasePoint seed{Eigen::Vector2d(1.01, 0.02), Eigen::Vector2d(0.99, -0.015),
                  Eigen::VectorXd::Constant(1, 0.03)};
  const ProjectionResult r = project_to_crit(a, seed);
  CHECK(r.converged);
  CHECK(r.residual < 1e-9);
  CHECK(r.distance < 0.1);
  const CriticalityDiagnostic d = is_critical(a, r.point);
  CHECK(d.critical);
}

TEST_CASE("transversal spectrum at the golden planar point") {
  const GroupAction a = builtin_action("so2");
  PhasePoint p{Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(1.0, 0.0),
               Eigen::VectorXd::Zero(1)};
  const CritPointData cd = transversal_data(a, p, 1);
  REQUIRE(cd.spectrum.size() == 5);
  CHECK(std::abs(cd.spectrum[0] + std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(cd.spectrum[4] - std::sqrt(2.0)) < 1e-12);
  for (int i = 1; i < 4; ++i) CHECK(std::abs(cd.spectrum[i]) < 1e-12);
  CHECK(cd.tangent_dim == 3);  // 2n + d - 2 kappa
  CHECK(std::abs(cd.transversal_det_abs - 2.0) < 1e-12);
  CHECK(cd.signature == 0);
  CHECK(std::abs(cd.min_abs_nonzero - std::sqrt(2.0)) < 1e-12);
}

TEST_CASE("transversal spectrum on the rotation-group critical set") {
  const GroupAction a = builtin_action("so3");
  PhasePoint p{Eigen::Vector3d(1.0, 0.0, 0.0), Eigen::Vector3d(2.0, 0.0, 0.0),
               Eigen::VectorXd::Zero(3)};
  p.t[0] = 0.7;  // algebra direction fixing the common axis
  const CritPointData cd = transversal_data(a, p, 2);
  CHECK(cd.tangent_dim == 5);
  CHECK(cd.signature == 0);
  CHECK(cd.min_abs_nonzero > 0.1);
}

TEST_CASE("chart quadrature reproduces the reference leading coefficient") {
  const GroupAction a = builtin_action("so2");
  SurfaceConfig cfg;
  cfg.method = "chart_grid";
  cfg.nodes = 96;
  const L0Result r = integrate_L0_chart(a, reference_amplitude(), 1, cfg,
                                        ExecMode::parallel, 64);
  CHECK_FALSE(r.empty_support);
  CHECK(r.n_accepted > 0);
  CHECK(r.max_abs_signature == 0);
  CHECK(std::abs(r.L0 - kL0Reference) < 1e-7);
  CHECK(r.err_estimate < 1e-7);
  CHECK(r.method == "chart_grid");

  // serial and parallel execution agree bitwise
  const L0Result rs = integrate_L0_chart(a, reference_amplitude(), 1, cfg,
                                         ExecMode::serial, 64);
  CHECK(rs.L0 == r.L0);
}

TEST_CASE("chart quadrature reports empty support for separated amplitudes") {
  const GroupAction a = builtin_action("so2");
  SurfaceConfig cfg;
  cfg.nodes = 96;
  const L0Result r = integrate_L0_chart(a, null_amplitude(), 1, cfg,
                                        ExecMode::parallel, 64);
  CHECK(r.empty_support);
  CHECK(r.L0 == 0.0);
  CHECK(!r.warnings.empty());
}

TEST_CASE("chart quadrature rejects non-planar actions") {
  const GroupAction a = builtin_action("so3");
  SurfaceConfig cfg;
  Amplitude amp = reference_amplitude();
  CHECK_THROWS_AS(integrate_L0_chart(a, amp, 2, cfg, ExecMode::serial, 8),
                  std::runtime_error);
}

TEST_CASE("slab sampler cross-checks the chart value") {
  const GroupAction a = builtin_action("so2");
  SurfaceConfig cfg;
  cfg.method = "slab_monte_carlo";
  cfg.samples = 1000000;
  cfg.eps_sweep = {0.08, 0.04};
  const L0Result r = integrate_L0_slab(a, reference_amplitude(), 1, cfg, 42,
                                       ExecMode::parallel, 64);
  CHECK_FALSE(r.empty_support);
  CHECK(r.n_accepted > 200);
  CHECK(r.max_abs_signature == 0);
  const double tol = std::max(6.0 * r.err_estimate, 0.08 * kL0Reference);
  CHECK(std::abs(r.L0 - kL0Reference) < tol);

  // fixed shard count makes the estimate independent of the thread count
  const L0Result rs = integrate_L0_slab(a, reference_amplitude(), 1, cfg, 42,
                                        ExecMode::serial, 64);
  CHECK(rs.L0 == r.L0);
  CHECK(rs.n_accepted == r.n_accepted);
}
