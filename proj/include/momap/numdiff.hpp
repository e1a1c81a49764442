#pragma once

#include <Eigen/Dense>
#include <functional>

namespace momap {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Central differences with one Richardson step: O(h^4) gradient error.
Eigen::VectorXd fd_gradient(const ScalarField& f, const Eigen::VectorXd& x,
                            double h = 1e-3);

// Column j is the O(h^4) central difference of f along coordinate j.
Eigen::MatrixXd fd_jacobian(const VectorField& f, const Eigen::VectorXd& x,
                            double h = 1e-3);

// Symmetric second differences, O(h^2). Off-diagonal entries use the
// four-point cross stencil; the diagonal uses the five-point stencil.
Eigen::MatrixXd fd_hessian(const ScalarField& f, const Eigen::VectorXd& x,
                           double h = 2e-4);

}  // namespace momap
