#pragma once

#include <cstddef>
#include <vector>

namespace momap {

// Gauss-Legendre rule on [-1, 1]. Nodes are exactly antisymmetric and
// weights exactly symmetric (computed on one half and mirrored), which keeps
// integrals of odd functions at exact zero.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

// Cached by node count; thread-safe. Do not mutate the returned rule.
const GaussRule& gauss_legendre(int n);

// Affine image of the rule on [a, b].
GaussRule gauss_legendre_on(int n, double a, double b);

}  // namespace momap
