#include "momap/phase.hpp"

namespace momap {

Eigen::VectorXd moment_map(const GroupAction& a, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xi) {
  return a.orbit_map(x).transpose() * xi;
}

double psi(const GroupAction& a, const PhasePoint& p) {
  return p.t.dot(moment_map(a, p.x, p.xi));
}

Eigen::VectorXd grad_psi(const GroupAction& a, const PhasePoint& p) {
  const int n = a.n(), d = a.d();
  const Eigen::MatrixXd X = a.algebra_element(p.t);
  Eigen::VectorXd g(2 * n + d);
  g.segment(0, n) = X.transpose() * p.xi;
  g.segment(n, n) = X * p.x;
  g.segment(2 * n, d) = moment_map(a, p.x, p.xi);
  return g;
}

Eigen::MatrixXd hess_psi(const GroupAction& a, const PhasePoint& p) {
  const int n = a.n(), d = a.d();
  const Eigen::MatrixXd X = a.algebra_element(p.t);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 * n + d, 2 * n + d);
  // d2/dx_i dxi_j <Xx, xi> = X_ji
  H.block(0, n, n, n) = X.transpose();
  H.block(n, 0, n, n) = X;
  for (int j = 0; j < d; ++j) {
    const Eigen::VectorXd cx = a.generator(j).transpose() * p.xi;  // d2/dx dt_j
    const Eigen::VectorXd cxi = a.generator(j) * p.x;              // d2/dxi dt_j
    H.block(0, 2 * n + j, n, 1) = cx;
    H.block(2 * n + j, 0, 1, n) = cx.transpose();
    H.block(n, 2 * n + j, n, 1) = cxi;
    H.block(2 * n + j, n, 1, n) = cxi.transpose();
  }
  return H;
}

CriticalityDiagnostic is_critical(const GroupAction& a, const PhasePoint& p,
                                  double tol) {
  if (tol <= 0.0)
    tol = 1e-9 * (1.0 + p.x.norm()) * (1.0 + p.xi.norm()) * (1.0 + p.t.norm());
  CriticalityDiagnostic diag;
  diag.grad_norm = grad_psi(a, p).norm();
  diag.critical = diag.grad_norm <= tol;
  diag.on_zero_level = moment_map(a, p.x, p.xi).norm() <= tol;
  const Eigen::MatrixXd X = a.algebra_element(p.t);
  diag.in_isotropy = (X * p.x).norm() <= tol && (X * p.xi).norm() <= tol;
  return diag;
}

}  // namespace momap
