#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "momap/action.hpp"
#include "momap/amplitude.hpp"
#include "momap/config.hpp"
#include "momap/critical.hpp"
#include "momap/oracle.hpp"

namespace momap {

struct FitResult {
  double L0_fitted = 0.0;
  double next_order_coeff = 0.0;  // c1 in Re I/(2 pi mu)^kappa ~ L0 + c1 mu
  double max_residual = 0.0;      // of the linear model, in scaled units
  double kappa_fitted = 0.0;      // unconstrained log-log slope of |I|
  int n_points_used = 0;
  bool in_asymptotic_regime = true;
  std::string regime_note;
};

// Least squares of Re I/(2 pi mu)^kappa against L0 + c1 mu over the
// smallest fit_points mu values. The regime guard compares the model
// residual against the oracle's own error estimates and a 2 percent floor;
// a grid that has not entered the asymptotic regime fails it.
FitResult fit_leading_term(const std::vector<OracleRow>& sweep, int kappa,
                           int fit_points = 8);

// so2 (n=2), so3 (n=3), torus2 (n=4); generators orthonormal under the
// algebra inner product.
GroupAction builtin_action(const std::string& name);

// Explicit generators when given, builtin fallback by name otherwise.
GroupAction action_from_config(const ActionConfig& c);

struct PipelineResult {
  RunConfig config;
  int kappa = 0;
  L0Result l0;
  std::vector<OracleRow> sweep;  // ascending mu
  FitResult fit;
  double amplitude_mass = 0.0;
  std::vector<std::string> verdicts;
  bool pass = false;
};

// stratify -> kappa -> surface integral -> oracle sweep -> fit -> verdicts.
// An amplitude supported away from the critical set short-circuits to the
// null verdict: the oracle value at the smallest mu must be negligible
// against the amplitude mass.
PipelineResult verify_pipeline(const RunConfig& cfg);

nlohmann::json make_report(const PipelineResult& r);
std::string sweep_csv(const std::vector<OracleRow>& sweep);

// Writes report.json and sweep.csv under out_dir; bit-stable for a fixed
// config (no timestamps, fixed key order, shortest-round-trip numbers).
void emit_report(const PipelineResult& r, const std::string& out_dir);

}  // namespace momap
