#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "momap/harness.hpp"

using namespace momap;

namespace {

std::vector<OracleRow> synthetic_sweep(double (*f)(double)) {
  // geometric grid, deliberately passed in descending order: the fit sorts
  std::vector<OracleRow> rows;
  for (double mu : make_mu_grid({0.02, 0.1, 10}))
    rows.insert(rows.begin(), {mu, {f(mu), 0.0}, 1e-12, "synthetic"});
  return rows;
}

RunConfig null_run_config() {
  RunConfig c;
  c.action.n = 2;
  c.action.name = "so2";
  c.amplitude.x.center = {1.0, 0.0};
  c.amplitude.x.radius = 0.2;
  c.amplitude.xi.center = {0.0, 1.0};
  c.amplitude.xi.radius = 0.2;
  c.amplitude.t.center = {0.0};
  c.amplitude.t.radius = 30.0;
  c.mu_grid = {0.05, 0.3, 5};
  c.seed = 42;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("linear model is recovered exactly from a synthetic sweep") {
  auto rows = synthetic_sweep(
      +[](double mu) { return 2.0 * M_PI * mu * 3.0 + 5.0 * mu * mu; });
  const FitResult fit = fit_leading_term(rows, 1, 8);
  CHECK(fit.n_points_used == 8);
  CHECK(std::abs(fit.L0_fitted - 3.0) < 1e-10);
  CHECK(std::abs(fit.next_order_coeff - 5.0 / (2.0 * M_PI)) < 1e-8);
  CHECK(fit.max_residual < 1e-12);
  CHECK(fit.in_asymptotic_regime);
  CHECK(std::abs(fit.kappa_fitted - 1.0) < 0.05);
}

TEST_CASE("fractional powers surface in the fitted exponent") {
  auto rows = synthetic_sweep(+[](double mu) { return std::pow(mu, 1.5); });
  const FitResult fit = fit_leading_term(rows, 1, 8);
  CHECK(std::abs(fit.kappa_fitted - 1.5) < 1e-3);
}

TEST_CASE("oscillatory contamination trips the regime guard") {
  auto rows = synthetic_sweep(+[](double mu) {
    return 2.0 * M_PI * mu * (3.0 + std::sin(150.0 * mu));
  });
  const FitResult fit = fit_leading_term(rows, 1, 8);
  CHECK_FALSE(fit.in_asymptotic_regime);
  CHECK(!fit.regime_note.empty());
}

TEST_CASE("the fit needs at least four points") {
  std::vector<OracleRow> rows = {{0.1, {1.0, 0.0}, 1e-12, "s"},
                                 {0.2, {2.0, 0.0}, 1e-12, "s"},
                                 {0.3, {3.0, 0.0}, 1e-12, "s"}};
  CHECK_THROWS_AS(fit_leading_term(rows, 1, 8), std::invalid_argument);
}

TEST_CASE("actions resolve from config by name or explicit generators") {
  ActionConfig by_name;
  by_name.n = 3;
  by_name.name = "so3";
  CHECK(action_from_config(by_name).d() == 3);

  ActionConfig wrong;
  wrong.n = 4;
  wrong.name = "so3";
  CHECK_THROWS_AS(action_from_config(wrong), std::invalid_argument);

  ActionConfig expl;
  expl.n = 2;
  expl.name = "custom";
  Eigen::MatrixXd J(2, 2);
  J << 0, -2, 2, 0;  // non-unit scale: constructor orthonormalizes
  expl.generators = {J};
  const GroupAction a = action_from_config(expl);
  CHECK(a.name() == "custom");
  CHECK(std::abs(algebra_inner(a.generator(0), a.generator(0)) - 1.0) < 1e-12);
}

TEST_CASE("separated-support pipeline verifies the null verdict") {
  const RunConfig cfg = null_run_config();
  const PipelineResult r = verify_pipeline(cfg);
  CHECK(r.kappa == 1);
  CHECK(r.l0.empty_support);
  REQUIRE(r.verdicts.size() == 1);
  CHECK(r.verdicts[0] == "PASS_NULL");
  CHECK(r.pass);
  REQUIRE(r.sweep.size() == 1);
  CHECK(r.sweep[0].mu == 0.05);

  const nlohmann::json rep = make_report(r);
  CHECK(rep.at("pass").get<bool>());
  CHECK(rep.at("version").get<std::string>() == kVersion);
  CHECK(rep.at("surface").at("empty_support").get<bool>());
  CHECK(rep.at("kappa_declared").get<int>() == 1);
  CHECK(rep.at("config_hash").get<std::string>() == config_hash_hex(cfg));
  CHECK(rep.at("amplitude").at("mass").get<double>() > 0.0);
  CHECK_FALSE(rep.contains("fit"));

  const std::string csv = sweep_csv(r.sweep);
  CHECK(csv.rfind("mu,re_I,im_I,err_estimate,method\n", 0) == 0);
  CHECK(csv.find("0.05") != std::string::npos);
}

TEST_CASE("report emission is byte-stable") {
  const PipelineResult r = verify_pipeline(null_run_config());
  const auto dir1 = std::filesystem::temp_directory_path() / "momap_rep_a";
  const auto dir2 = std::filesystem::temp_directory_path() / "momap_rep_b";
  emit_report(r, dir1.string());
  emit_report(r, dir2.string());
  CHECK(slurp(dir1 / "report.json") == slurp(dir2 / "report.json"));
  CHECK(slurp(dir1 / "sweep.csv") == slurp(dir2 / "sweep.csv"));
  CHECK(!slurp(dir1 / "report.json").empty());
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("gaussian amplitudes carry a support caveat in the report") {
  PipelineResult r;
  r.config = null_run_config();
  r.config.amplitude.kind = "gaussian";
  r.l0.empty_support = true;
  r.verdicts = {"PASS_NULL"};
  r.pass = true;
  const nlohmann::json rep = make_report(r);
  CHECK(rep.at("amplitude").contains("note"));
}
