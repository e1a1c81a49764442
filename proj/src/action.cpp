#include "momap/action.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "momap/rng.hpp"

namespace momap {

namespace {

Eigen::VectorXd random_unit_vector(Xoshiro256& rng, int n) {
  // Box-Muller on fixed-order uniforms keeps the stream reproducible.
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const double u1 = rng.uniform01();
    const double u2 = rng.uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    v[i] = r * std::cos(2.0 * M_PI * u2);
  }
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(n, 0);
}

// Null space basis of M (columns orthonormal), relative threshold on the
// largest singular value floored at 1.
Eigen::MatrixXd null_space(const Eigen::MatrixXd& M, double rel_tol) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cutoff = rel_tol * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > cutoff) ++rank;
  const int dim = static_cast<int>(M.cols()) - rank;
  return svd.matrixV().rightCols(dim);
}

}  // namespace

GroupAction::GroupAction(int n, std::vector<Eigen::MatrixXd> generators,
                         std::string name)
    : n_(n), gens_(std::move(generators)), name_(std::move(name)) {
  if (n_ < 1 || gens_.empty())
    throw std::invalid_argument("GroupAction: need n >= 1 and at least one generator");
  for (const auto& X : gens_)
    if (X.rows() != n_ || X.cols() != n_)
      throw std::invalid_argument("GroupAction: generator shape mismatch with n");
  // Gram-Schmidt in the algebra metric. Shipped bases are already
  // orthonormal and pass through unchanged up to roundoff-free operations.
  for (std::size_t i = 0; i < gens_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double c = algebra_inner(gens_[i], gens_[j]);
      if (c != 0.0) gens_[i] -= c * gens_[j];
    }
    const double nrm = std::sqrt(algebra_inner(gens_[i], gens_[i]));
    if (nrm < 1e-12)
      throw std::invalid_argument("GroupAction: generators are linearly dependent");
    if (nrm != 1.0) gens_[i] /= nrm;
  }
}

Eigen::MatrixXd GroupAction::algebra_element(const Eigen::VectorXd& t) const {
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < d(); ++i) X += t[i] * gens_[i];
  return X;
}

Eigen::MatrixXd GroupAction::orbit_map(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd M(n_, d());
  for (int i = 0; i < d(); ++i) M.col(i) = gens_[i] * x;
  return M;
}

double algebra_inner(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  return 0.5 * (A.transpose() * B).trace();
}

ValidationReport validate_action(const GroupAction& a) {
  ValidationReport rep;
  const int d = a.d();

  double skew = 0.0;
  for (const auto& X : a.generators())
    skew = std::max(skew, (X + X.transpose()).cwiseAbs().maxCoeff());
  rep.skew_residual = skew;
  if (skew > 1e-12) rep.violations.push_back("generators not skew-symmetric");

  Eigen::MatrixXd gram(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      gram(i, j) = algebra_inner(a.generator(i), a.generator(j));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  rep.gram_min_eig = es.eigenvalues().minCoeff();
  if (rep.gram_min_eig < 1e-10)
    rep.violations.push_back("generators not linearly independent");

  // brackets must stay inside the span: project and measure the remainder
  double bracket = 0.0;
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Eigen::MatrixXd C = a.generator(i) * a.generator(j) -
                          a.generator(j) * a.generator(i);
      Eigen::MatrixXd R = C;
      for (int k = 0; k < d; ++k)
        R -= algebra_inner(C, a.generator(k)) * a.generator(k);
      bracket = std::max(bracket, R.cwiseAbs().maxCoeff());
    }
  }
  rep.bracket_residual = bracket;
  if (bracket > 1e-10)
    rep.violations.push_back("brackets leave the generator span");

  return rep;
}

IsotropyData isotropy_algebra(const GroupAction& a, const Eigen::VectorXd& x) {
  IsotropyData iso;
  iso.algebra_basis = null_space(a.orbit_map(x), kRankRelTol);
  iso.dimension = static_cast<int>(iso.algebra_basis.cols());
  for (int k = 0; k < iso.dimension; ++k) {
    const Eigen::MatrixXd Y = a.algebra_element(iso.algebra_basis.col(k));
    iso.max_violation = std::max(iso.max_violation, (Y * x).norm());
  }
  return iso;
}

IsotropyData isotropy_algebra_pair(const GroupAction& a, const Eigen::VectorXd& x,
                                   const Eigen::VectorXd& xi) {
  IsotropyData iso;
  Eigen::MatrixXd M(2 * a.n(), a.d());
  M.topRows(a.n()) = a.orbit_map(x);
  M.bottomRows(a.n()) = a.orbit_map(xi);
  iso.algebra_basis = null_space(M, kRankRelTol);
  iso.dimension = static_cast<int>(iso.algebra_basis.cols());
  for (int k = 0; k < iso.dimension; ++k) {
    const Eigen::MatrixXd Y = a.algebra_element(iso.algebra_basis.col(k));
    iso.max_violation =
        std::max(iso.max_violation, std::max((Y * x).norm(), (Y * xi).norm()));
  }
  return iso;
}

int principal_orbit_dimension(const GroupAction& a, int sample_count,
                              std::uint64_t seed) {
  if (sample_count < 1)
    throw std::invalid_argument("principal_orbit_dimension: sample_count >= 1");
  Xoshiro256 rng(seed);
  int kappa = 0;
  for (int s = 0; s < sample_count; ++s) {
    const Eigen::VectorXd x = random_unit_vector(rng, a.n());
    kappa = std::max(kappa, a.d() - isotropy_algebra(a, x).dimension);
  }
  return kappa;
}

namespace {

int fixed_subspace_dim(const GroupAction& a, const IsotropyData& iso) {
  if (iso.dimension == 0) return a.n();  // vacuous condition fixes everything
  Eigen::MatrixXd stacked(iso.dimension * a.n(), a.n());
  for (int k = 0; k < iso.dimension; ++k)
    stacked.middleRows(k * a.n(), a.n()) =
        a.algebra_element(iso.algebra_basis.col(k));
  return static_cast<int>(null_space(stacked, kRankRelTol).cols());
}

}  // namespace

Stratification stratify_sample(const GroupAction& a, int sample_count,
                               std::uint64_t seed, double box_halfwidth) {
  Xoshiro256 rng(seed);
  Stratification strata;

  // Random box samples land in maximal-dimension strata; to see thin strata
  // we also sample each candidate invariant subspace: intersections of
  // generator kernels over all coefficient directions seen so far, plus the
  // fixed spaces of single generators and the origin.
  std::vector<Eigen::VectorXd> points;
  for (int s = 0; s < sample_count; ++s) {
    Eigen::VectorXd x(a.n());
    for (int i = 0; i < a.n(); ++i) x[i] = rng.uniform(-box_halfwidth, box_halfwidth);
    points.push_back(x);
  }
  points.push_back(Eigen::VectorXd::Zero(a.n()));
  for (int i = 0; i < a.d(); ++i) {
    const Eigen::MatrixXd K = null_space(a.generator(i), kRankRelTol);
    if (K.cols() == 0) continue;
    for (int s = 0; s < std::max(4, sample_count / 8); ++s) {
      Eigen::VectorXd c(K.cols());
      for (int j = 0; j < K.cols(); ++j) c[j] = rng.uniform(-box_halfwidth, box_halfwidth);
      points.push_back(K * c);
    }
  }

  struct Tagged {
    StratumSignature sig;
    Eigen::VectorXd x;
    Eigen::MatrixXd proj;
  };
  std::vector<Tagged> tagged;
  for (const auto& x : points) {
    const IsotropyData iso = isotropy_algebra(a, x);
    StratumSignature sig;
    sig.isotropy_dim = iso.dimension;
    sig.fixed_subspace_dim = fixed_subspace_dim(a, iso);
    Eigen::MatrixXd proj =
        iso.dimension == 0
            ? Eigen::MatrixXd::Zero(a.d(), a.d())
            : Eigen::MatrixXd(iso.algebra_basis * iso.algebra_basis.transpose());
    tagged.push_back({sig, x, proj});
  }

  // group by signature, then single-linkage split on projector distance
  std::map<StratumSignature, std::vector<const Tagged*>> by_sig;
  for (const auto& t : tagged) by_sig[t.sig].push_back(&t);

  const double link_tol = 0.3;
  for (auto& [sig, items] : by_sig) {
    std::vector<int> comp(items.size(), -1);
    int n_comp = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (comp[i] >= 0) continue;
      comp[i] = n_comp;
      // breadth-first linkage
      std::vector<std::size_t> queue{i};
      while (!queue.empty()) {
        const std::size_t q = queue.back();
        queue.pop_back();
        for (std::size_t j = 0; j < items.size(); ++j) {
          if (comp[j] >= 0) continue;
          if ((items[q]->proj - items[j]->proj).norm() < link_tol) {
            comp[j] = n_comp;
            queue.push_back(j);
          }
        }
      }
      ++n_comp;
    }
    std::vector<StratumComponent> comps(n_comp);
    for (std::size_t i = 0; i < items.size(); ++i) {
      auto& c = comps[comp[i]];
      if (c.representatives.size() < 8) c.representatives.push_back(items[i]->x);
      if (c.isotropy_projector.size() == 0) c.isotropy_projector = items[i]->proj;
    }
    strata[sig] = std::move(comps);
  }
  return strata;
}

}  // namespace momap
