#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace momap {

// Orthogonal action of a compact group on R^n, given by a basis of its Lie
// algebra of skew-symmetric generators. The inner product on the algebra is
// <A,B> = tr(tA B)/2, under which the shipped generator sets are orthonormal;
// user-supplied bases are orthonormalized once at construction and all
// coefficient vectors downstream refer to the orthonormalized frame.
class GroupAction {
 public:
  GroupAction(int n, std::vector<Eigen::MatrixXd> generators, std::string name);

  int n() const { return n_; }
  int d() const { return static_cast<int>(gens_.size()); }
  const std::string& name() const { return name_; }
  const Eigen::MatrixXd& generator(int i) const { return gens_[i]; }
  const std::vector<Eigen::MatrixXd>& generators() const { return gens_; }

  // X = sum_i t_i X_i
  Eigen::MatrixXd algebra_element(const Eigen::VectorXd& t) const;

  // n x d matrix with columns X_i x
  Eigen::MatrixXd orbit_map(const Eigen::VectorXd& x) const;

 private:
  int n_;
  std::vector<Eigen::MatrixXd> gens_;
  std::string name_;
};

double algebra_inner(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

struct ValidationReport {
  std::vector<std::string> violations;
  double skew_residual = 0.0;
  double gram_min_eig = 0.0;
  double bracket_residual = 0.0;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_action(const GroupAction& a);

struct IsotropyData {
  int dimension = 0;
  // columns are orthonormal coefficient vectors in R^d
  Eigen::MatrixXd algebra_basis;
  double max_violation = 0.0;  // max ||Y x|| (and ||Y xi||) over the basis
};

inline constexpr double kRankRelTol = 1e-10;

IsotropyData isotropy_algebra(const GroupAction& a, const Eigen::VectorXd& x);
IsotropyData isotropy_algebra_pair(const GroupAction& a, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xi);

int principal_orbit_dimension(const GroupAction& a, int sample_count,
                              std::uint64_t seed);

struct StratumSignature {
  int isotropy_dim = 0;
  int fixed_subspace_dim = 0;
  bool operator<(const StratumSignature& o) const {
    if (isotropy_dim != o.isotropy_dim) return isotropy_dim > o.isotropy_dim;
    return fixed_subspace_dim > o.fixed_subspace_dim;
  }
  bool operator==(const StratumSignature& o) const {
    return isotropy_dim == o.isotropy_dim &&
           fixed_subspace_dim == o.fixed_subspace_dim;
  }
};

// One signature can cover several components (e.g. distinct invariant
// coordinate planes with isomorphic isotropy). Components are separated by
// single-linkage clustering of the isotropy-span projectors, which keeps
// continuously varying families together while splitting discrete patterns.
struct StratumComponent {
  std::vector<Eigen::VectorXd> representatives;
  Eigen::MatrixXd isotropy_projector;  // d x d, at the first representative
};

using Stratification = std::map<StratumSignature, std::vector<StratumComponent>>;

Stratification stratify_sample(const GroupAction& a, int sample_count,
                               std::uint64_t seed, double box_halfwidth = 1.5);

}  // namespace momap
