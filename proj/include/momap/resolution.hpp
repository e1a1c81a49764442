#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "momap/action.hpp"

namespace momap {

// One level of an isotropy-reduction branch. Dimensions per level:
//   c  - spherical fiber directions introduced at this level
//   d  - algebra directions leaving the previous isotropy (zero at level 1,
//        where the center carries the full algebra)
//   e  - dimension of the isotropy along this level's center
// Frames are constant matrices: the chart stays smooth across the center
// because nothing in it depends on the center coordinates except through
// the explicit trigonometric formulas.
struct BranchLevel {
  int c = 0, d = 0, e = 0;
  StratumSignature signature;
  Eigen::MatrixXd center_frame;  // level 1: basis of the fixed subspace;
                                 // level 2: basis of W, center = unit sphere of W
  Eigen::MatrixXd fiber_frame;   // n x c, orthonormal
  Eigen::MatrixXd a_frame;       // d_total x d coefficient directions
  Eigen::MatrixXd b_frame;       // d_total x e coefficient directions
};

struct IsotropyBranch {
  int N = 0;  // depth, 1 or 2
  int kappa = 0;
  std::vector<BranchLevel> levels;
};

// Packed chart coordinate layout, in order:
// [p | theta_p | tau (N) | theta_v | alpha | beta | xi]
struct ChartLayout {
  int dim_p = 0, dim_theta_p = 0, n_tau = 0, dim_theta_v = 0;
  int dim_alpha = 0, dim_beta = 0, dim_xi = 0;
  int off_p = 0, off_theta_p = 0, off_tau = 0, off_theta_v = 0;
  int off_alpha = 0, off_beta = 0, off_xi = 0;
  int total = 0;
};

ChartLayout chart_layout(const GroupAction& a, const IsotropyBranch& b);

// Derives the branch structure from the sampled stratification. Throws
// std::runtime_error with "unsupported depth" when the chain of singular
// strata is longer than two levels, and with "unsupported center geometry"
// when the deepest stratum does not carry the full algebra as isotropy or a
// level-two center is empty.
std::vector<IsotropyBranch> build_isotropy_tree(const GroupAction& a,
                                                std::uint64_t seed = 1234);

struct AmbientPoint {
  Eigen::VectorXd x;  // point in R^n
  Eigen::VectorXd t;  // algebra coefficients in the generator frame
};

// tau-parametrized chart map (the xi block of the coordinates is not
// consumed here; it passes through to the phase evaluation unchanged).
AmbientPoint chart_to_ambient(const GroupAction& a, const IsotropyBranch& b,
                              const Eigen::VectorXd& coords);

// Monomial substitution tau = delta(sigma) straightening the exceptional
// divisor: depth 1 is the identity; depth 2 maps (s1, s2) to (s1^2 s2,
// s1 s2). Writes |det D delta| to jac if given.
Eigen::VectorXd delta_substitution(const IsotropyBranch& b,
                                   const Eigen::VectorXd& sigma,
                                   double* jac = nullptr);

// Weak transform: the phase in the chart divided by the full monomial
// tau_1 * ... * tau_N, in closed form (exact, not a numerical quotient).
double weak_transform(const GroupAction& a, const IsotropyBranch& b,
                      const Eigen::VectorXd& coords);

// Same, with the tau slots of the coordinates holding sigma.
double weak_transform_sigma(const GroupAction& a, const IsotropyBranch& b,
                            const Eigen::VectorXd& coords_sigma);

struct FactorizationCheck {
  double max_residual = 0.0;
  int n_points = 0;
  bool pass = false;
};

// psi(zeta(c)) == tau_1 ... tau_N * weak_transform(c) over random chart
// points; residual scale-relative at 1e-11.
FactorizationCheck check_factorization(const GroupAction& a,
                                       const IsotropyBranch& b, int n_points,
                                       std::uint64_t seed);

struct CriticalityConditions {
  bool grad_zero = false;
  bool cond_algebra = false;     // alpha = 0 and sum_r beta_r B_r v = 0
  bool cond_xi_perp_E = false;   // xi normal to every level's A-span
  bool cond_xi_perp_F = false;   // xi normal to the B-span at the fiber point
  bool consistent = false;       // grad_zero == conjunction
  double grad_norm = 0.0;
};

// Stationarity of the weak transform in sigma coordinates versus the
// structural conditions, at one chart point.
CriticalityConditions check_criticality_conditions(const GroupAction& a,
                                        const IsotropyBranch& b,
                                        const Eigen::VectorXd& coords_sigma);

struct CriticalityBattery {
  int n_points = 0;
  int n_discrepancies = 0;
  bool pass = false;
};

// Constructed critical points (including sigma = 0) plus single-condition
// perturbations of each; counts points where stationarity and the
// conditions disagree.
CriticalityBattery run_criticality_battery(const GroupAction& a,
                                     const IsotropyBranch& b, int n_points,
                                     std::uint64_t seed);

struct KernelCheck {
  int chart_dim = 0;
  int expected_kernel = 0;
  int measured_kernel = 0;
  double min_abs_nonzero = 0.0;
  bool pass = false;
};

// Finite-difference Hessian of the weak transform (sigma coordinates) at a
// critical chart point; kernel dimension must be chart_dim - 2 kappa.
KernelCheck check_transversal_nondegeneracy(const GroupAction& a,
                                            const IsotropyBranch& b,
                                            const Eigen::VectorXd& coords_sigma);

struct BorderedCheck {
  double max_block_residual = 0.0;
  bool pass = false;
};

// At tau = 0 criticals the Hessian restricted to (alpha, beta, xi) is the
// bordered block matrix with zero diagonal blocks and the coupling rows
// A_r p (alpha) and B_r v (beta); compares the finite-difference blocks
// against those vectors at 1e-6.
BorderedCheck check_bordered_blocks(const GroupAction& a,
                                    const IsotropyBranch& b,
                                    const Eigen::VectorXd& coords_sigma);

struct KappaCheck {
  std::vector<int> dim_E;  // per level
  int dim_F = 0;
  int kappa_sum = 0;
  bool dims_match = false;   // dim E^(j) == d^(j), dim F == e_N - principal
  bool direct_sum = false;   // stacked rank equals the dimension sum
  bool pass = false;
};

KappaCheck check_kappa_decomposition(const GroupAction& a,
                                     const IsotropyBranch& b,
                                     const Eigen::VectorXd& coords);

struct JacobianExponentCheck {
  std::vector<double> measured;
  std::vector<int> expected;  // c_j + sum of d up to j - 1 per level
  double max_error = 0.0;
  bool pass = false;
};

// Scales each tau_j alone toward 0 at a generic chart point and fits the
// decay exponent of |det D(chart map)| (xi excluded; the map is square).
JacobianExponentCheck check_jacobian_exponent(const GroupAction& a,
                                              const IsotropyBranch& b,
                                              std::uint64_t seed);

struct AlphaChartCheck {
  double min_grad_norm = 0.0;      // over the sampled chart box
  double decay_exponent = 0.0;     // of the model chart integral
  bool applicable = false;
};

// The companion chart normalizing an algebra coordinate instead of the
// geometric sphere coordinate (depth-2 branches with algebra directions).
// The xi-gradient of its weak transform is xi-independent and bounded away
// from zero on the chart box; the model integral with the chart's Jacobian
// monomial decays at order kappa + 1.
AlphaChartCheck check_alpha_chart_nonstationary(const GroupAction& a,
                                                const IsotropyBranch& b,
                                                int n_samples,
                                                std::uint64_t seed,
                                                bool with_decay_fit);

struct CertificateOptions {
  int n_factorization = 10000;
  int n_criticality = 1000;
  int n_kernel = 50;
  int n_bordered = 100;
  int n_kappa = 100;
  int n_alpha_samples = 2000;
  bool alpha_decay_fit = true;
};

nlohmann::json branch_certificate(const GroupAction& a,
                                  const IsotropyBranch& b,
                                  const CertificateOptions& opt,
                                  std::uint64_t seed);

}  // namespace momap
