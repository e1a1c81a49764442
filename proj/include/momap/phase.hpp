#pragma once

#include <Eigen/Dense>
#include <string>

#include "momap/action.hpp"

namespace momap {

// Point of the extended phase space R^n_x x R^n_xi x R^d_t; the algebra
// element is X = sum_i t_i X_i in the orthonormalized generator frame.
struct PhasePoint {
  Eigen::VectorXd x, xi, t;

  Eigen::VectorXd packed() const {
    Eigen::VectorXd v(x.size() + xi.size() + t.size());
    v << x, xi, t;
    return v;
  }
  static PhasePoint unpack(const Eigen::VectorXd& v, int n, int d) {
    return {v.segment(0, n), v.segment(n, n), v.segment(2 * n, d)};
  }
};

// component i is <X_i x, xi>
Eigen::VectorXd moment_map(const GroupAction& a, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& xi);

// <Xx, xi> = t . moment_map(x, xi)
double psi(const GroupAction& a, const PhasePoint& p);

// blocks: d_x psi = tX xi, d_xi psi = X x, d_t_i psi = <X_i x, xi>
Eigen::VectorXd grad_psi(const GroupAction& a, const PhasePoint& p);

// exact bilinear-structure Hessian in (x, xi, t) order; diagonal blocks zero
Eigen::MatrixXd hess_psi(const GroupAction& a, const PhasePoint& p);

struct CriticalityDiagnostic {
  bool critical = false;
  bool on_zero_level = false;  // ||moment_map|| <= tol
  bool in_isotropy = false;    // ||Xx||, ||Xxi|| <= tol
  double grad_norm = 0.0;
};

// Default tolerance is absolute 1e-9 scaled by (1+|x|)(1+|xi|)(1+|t|).
CriticalityDiagnostic is_critical(const GroupAction& a, const PhasePoint& p,
                                  double tol = -1.0);

}  // namespace momap
