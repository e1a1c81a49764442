#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "momap/amplitude.hpp"
#include "momap/phase.hpp"
#include "momap/reduce.hpp"

namespace momap {

// A point (x, xi) on the zero level of the moment map belongs to the top
// stratum exactly when the isotropy algebra of the pair has the generic
// dimension d - kappa. Throws std::invalid_argument when the point is not
// on the zero level (scaled tolerance 1e-8).
bool is_regular(const GroupAction& a, const Eigen::VectorXd& x,
                const Eigen::VectorXd& xi, int kappa);

struct ProjectionResult {
  PhasePoint point;
  bool converged = false;
  int iterations = 0;
  double residual = 0.0;  // |grad psi| at the final point
  double distance = 0.0;  // |final - seed|
};

// Gauss-Newton on grad psi = 0 with a rank-revealing least-squares step;
// quadratic near the smooth part of the critical set.
ProjectionResult project_to_crit(const GroupAction& a, const PhasePoint& seed,
                                 int max_iter = 50);

struct CritPointData {
  Eigen::VectorXd spectrum;        // all eigenvalues, ascending
  int tangent_dim = 0;             // count of eigenvalues below the kernel cut
  double transversal_det_abs = 0;  // product of |nonzero| eigenvalues
  int signature = 0;               // (#positive - #negative) among nonzero
  double min_abs_nonzero = 0;
};

// Spectral data of the phase Hessian at a critical point. The kernel cut is
// 1e-8 * max|eigenvalue|. If the kernel dimension does not match the
// critical-set dimension 2n + d - 2*kappa, the clean-intersection premise is
// violated at this point and a std::runtime_error says so.
CritPointData transversal_data(const GroupAction& a, const PhasePoint& p,
                               int kappa);

struct L0Result {
  double L0 = 0.0;
  double err_estimate = 0.0;
  std::string method;
  std::uint64_t n_accepted = 0;
  double contamination_fraction = 0.0;
  int max_abs_signature = 0;
  bool empty_support = false;
  std::vector<std::string> warnings;
  nlohmann::json details;
};

// Deterministic chart quadrature of the leading-coefficient surface
// integral; available for the planar rotation action (n = 2, d = 1), where
// the top stratum carries the global chart x = r*u(theta), xi = s*u(theta),
// t = 0. Integration ranges are restricted to the amplitude support.
L0Result integrate_L0_chart(const GroupAction& a, const Amplitude& amp,
                            int kappa, const SurfaceConfig& cfg, ExecMode mode,
                            int n_shards);

// Slab Monte Carlo for any action: sample the support box, keep points
// where 2*kappa pivoted components of grad psi are below eps, weight by the
// co-area factor, and sweep eps with Richardson extrapolation. Guards:
// points whose full gradient is large, whose projection to the critical set
// is distant, or whose projection is singular are excluded; the singular
// fraction is reported as contamination.
L0Result integrate_L0_slab(const GroupAction& a, const Amplitude& amp,
                           int kappa, const SurfaceConfig& cfg,
                           std::uint64_t seed, ExecMode mode, int n_shards);

L0Result integrate_L0(const GroupAction& a, const Amplitude& amp, int kappa,
                      const SurfaceConfig& cfg, std::uint64_t seed,
                      ExecMode mode, int n_shards);

}  // namespace momap
