#include <doctest.h>

#include <cmath>
#include <complex>

#include "momap/harness.hpp"
#include "momap/oracle.hpp"

using namespace momap;

namespace {

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

// reference values computed by the level-set reduction, cross-checked by
// direct tensor quadrature to ~1e-6 relative
constexpr double kMu0 = 0.02;
constexpr double kI0 = 1.889108859605e-02;
constexpr double kMu5 = 0.027407019694402478;
constexpr double kI5 = 2.574362315101e-02;
constexpr double kMu11 = 0.04;
constexpr double kI11 = 3.705442476875e-02;

constexpr double kBumpHat0 = 1.2069003224;  // 1-d bump transform at zero
constexpr double kA0 = 0.15126149107741288;

}  // namespace

TEST_CASE("cubic table reproduces lines and refuses extrapolation") {
  std::vector<double> y;
  for (int i = 0; i <= 4; ++i) y.push_back(2.0 + 3.0 * (0.25 * i));
  CubicTable t(0.0, 0.25, y);
  CHECK(t.eval(0.37) == doctest::Approx(2.0 + 3.0 * 0.37).epsilon(1e-12));
  CHECK(t.eval(0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(t.eval(1.0) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(t.x_min() == 0.0);
  CHECK(t.x_max() == 1.0);
  CHECK_THROWS(t.eval(-0.01));
  CHECK_THROWS(t.eval(1.01));
}

TEST_CASE("transform of the compact profile: zero frequency and decay") {
  RadialFactor f;
  f.kind = ProfileKind::bump;
  f.center = Eigen::VectorXd::Zero(1);
  f.radius = 1.0;
  TFactorHat hat(f, 120.0);
  CHECK(std::abs(hat.radial(0.0) - kBumpHat0) < 1e-8);
  CHECK(std::abs(hat.radial(10.0) - 3.97e-2) < 3e-4);
  CHECK(std::abs(hat.radial(100.0) - 6.1e-6) < 3e-7);
  CHECK_FALSE(hat.has_center());
  // the table carries a 5% + 1 margin past u_max, so probe beyond it
  CHECK_NOTHROW(hat.radial(125.0));
  CHECK_THROWS(hat.radial(140.0));

  // centered factor picks up a pure modulation
  RadialFactor g = f;
  g.center[0] = 0.4;
  TFactorHat hatc(g, 20.0);
  Eigen::VectorXd u(1);
  u << 3.0;
  const std::complex<double> v = hatc.eval(u);
  CHECK(std::abs(std::abs(v) - std::abs(hat.radial(3.0))) < 1e-12);
  CHECK(std::abs(std::abs(std::arg(v)) - 3.0 * 0.4) < 1e-12);

  // the gaussian transform is closed-form
  RadialFactor gg;
  gg.kind = ProfileKind::gaussian;
  gg.center = Eigen::VectorXd::Zero(1);
  gg.radius = 1.0;
  TFactorHat hatg(gg, 10.0);
  CHECK(std::abs(hatg.radial(2.0) - std::sqrt(2.0 * M_PI) * std::exp(-2.0)) <
        1e-12);
}

TEST_CASE("level-set reduction reproduces the frozen leading data") {
  const GroupAction a = builtin_action("so2");
  const SemiAnalyticSO2 semi(a, reference_amplitude());
  CHECK(std::abs(semi.A0() - kA0) < 2e-6 * kA0);
  // I(mu) = mu int A(mu u) bhat(u) du, so I(mu)/mu -> A(0) 2 pi b(0) with
  // b(0) = 1 for the bump profile; this is the 2 pi mu L0 law at kappa = 1.
  CHECK(std::abs(semi.slope() - 2.0 * M_PI * kA0) < 1e-4 * semi.slope());

  CHECK(std::abs(semi.eval_I(kMu0).real() - kI0) < 1e-5 * kI0);
  CHECK(std::abs(semi.eval_I(kMu5).real() - kI5) < 1e-5 * kI5);
  CHECK(std::abs(semi.eval_I(kMu11).real() - kI11) < 1e-5 * kI11);
  CHECK(semi.eval_I(kMu0).imag() == 0.0);
}

TEST_CASE("reference evaluator hits the frozen sweep values") {
  const GroupAction a = builtin_action("so2");
  OracleConfig cfg;  // fourier, base 32, 8 nodes per wave, cap 256
  const Oracle oracle(a, reference_amplitude(), cfg, 0.02);
  CHECK(oracle.nodes_per_dim() == 96);
  CHECK(std::abs(oracle.sup_moment() - 1.5) < 1e-12);

  const OracleRow r0 = oracle.eval(kMu0, ExecMode::parallel, 64);
  CHECK(r0.method == "fourier_reduced");
  CHECK(r0.value.imag() == 0.0);  // centered t-factor: the phase is real
  CHECK(std::abs(r0.value.real() - kI0) < 5e-5 * kI0);
  CHECK(r0.err_estimate < 1e-5 * kI0);

  const OracleRow r5 = oracle.eval(kMu5, ExecMode::parallel, 64);
  CHECK(std::abs(r5.value.real() - kI5) < 5e-5 * kI5);

  const OracleRow r11 = oracle.eval(kMu11, ExecMode::parallel, 64);
  CHECK(std::abs(r11.value.real() - kI11) < 5e-5 * kI11);
}

TEST_CASE("both quadrature paths agree away from the cap") {
  const GroupAction a = builtin_action("so2");
  OracleConfig cfg;
  const Oracle oracle(a, reference_amplitude(), cfg, 0.3);
  const std::complex<double> red =
      oracle.eval_reduced_once(0.3, true, ExecMode::parallel, 64);
  const std::complex<double> full =
      oracle.eval_full_once(0.3, true, ExecMode::parallel, 64);
  CHECK(std::abs(red - full) < 1e-6 * std::abs(red));

  // sharded evaluation is bitwise reproducible across modes
  const OracleRow rp = oracle.eval(0.3, ExecMode::parallel, 64);
  const OracleRow rs = oracle.eval(0.3, ExecMode::serial, 64);
  CHECK(rp.value.real() == rs.value.real());
  CHECK(rp.value.imag() == rs.value.imag());
  CHECK(rp.err_estimate == rs.err_estimate);
}

TEST_CASE("separated supports yield a negligible integral") {
  const GroupAction a = builtin_action("so2");
  const Amplitude amp = null_amplitude();
  OracleConfig cfg;
  const Oracle oracle(a, amp, cfg, 0.05);
  const OracleRow r = oracle.eval(0.05, ExecMode::parallel, 64);
  CHECK(std::abs(r.value) <= 1e-8 * amp.mass());
}
