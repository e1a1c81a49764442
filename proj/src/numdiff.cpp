#include "momap/numdiff.hpp"

namespace momap {

Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                            double h) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  Eigen::VectorXd p = x;
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    auto central = [&](double step) {
      p[i] = xi + step;
      const double fp = f(p);
      p[i] = xi - step;
      const double fm = f(p);
      p[i] = xi;
      return (fp - fm) / (2.0 * step);
    };
    const double d1 = central(h);
    const double d2 = central(0.5 * h);
    g[i] = (4.0 * d2 - d1) / 3.0;
  }
  return g;
}

Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                            double h) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd p = x;
  Eigen::MatrixXd J;
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    auto central = [&](double step) -> Eigen::VectorXd {
      p[i] = xi + step;
      const Eigen::VectorXd fp = f(p);
      p[i] = xi - step;
      const Eigen::VectorXd fm = f(p);
      p[i] = xi;
      return (fp - fm) / (2.0 * step);
    };
    const Eigen::VectorXd d1 = central(h);
    const Eigen::VectorXd d2 = central(0.5 * h);
    if (J.size() == 0) J.resize(d1.size(), n);
    J.col(i) = (4.0 * d2 - d1) / 3.0;
  }
  return J;
}

Eigen::MatrixXd fd_hessian(const ScalarField& f, const Eigen::VectorXd& x,
                           double h) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  Eigen::VectorXd p = x;
  const double f0 = f(x);
  for (int i = 0; i < n; ++i) {
    const double xi = x[i];
    p[i] = xi + 2.0 * h;
    const double fpp = f(p);
    p[i] = xi + h;
    const double fp = f(p);
    p[i] = xi - h;
    const double fm = f(p);
    p[i] = xi - 2.0 * h;
    const double fmm = f(p);
    p[i] = xi;
    H(i, i) = (-fpp + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fmm) / (12.0 * h * h);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double xi = x[i], xj = x[j];
      p[i] = xi + h; p[j] = xj + h;
      const double fa = f(p);
      p[j] = xj - h;
      const double fb = f(p);
      p[i] = xi - h; p[j] = xj + h;
      const double fc = f(p);
      p[j] = xj - h;
      const double fd = f(p);
      p[i] = xi; p[j] = xj;
      H(i, j) = H(j, i) = (fa - fb - fc + fd) / (4.0 * h * h);
    }
  }
  return H;
}

}  // namespace momap
