#include <doctest.h>

#include <cmath>

#include "momap/action.hpp"
#include "momap/harness.hpp"

using namespace momap;

TEST_CASE("builtin generator sets are orthonormal and valid") {
  for (const char* name : {"so2", "so3", "torus2"}) {
    const GroupAction a = builtin_action(name);
    const ValidationReport r = validate_action(a);
    CHECK_MESSAGE(r.ok(), name);
    CHECK(r.skew_residual < 1e-14);
    CHECK(std::abs(r.gram_min_eig - 1.0) < 1e-12);
    CHECK(r.bracket_residual < 1e-12);
    for (int i = 0; i < a.d(); ++i)
      for (int j = 0; j < a.d(); ++j) {
        const double g = algebra_inner(a.generator(i), a.generator(j));
        CHECK(std::abs(g - (i == j ? 1.0 : 0.0)) < 1e-14);
      }
  }
  CHECK_THROWS_AS(builtin_action("su5"), std::invalid_argument);
}

TEST_CASE("validation flags a non-skew generator") {
  Eigen::MatrixXd S(2, 2);
  S << 1, 0, 0, 1;
  const GroupAction a(2, {S}, "bad");
  CHECK_FALSE(validate_action(a).ok());
}

TEST_CASE("orbit map columns are generator images") {
  const GroupAction a = builtin_action("so3");
  Eigen::Vector3d x(0.3, -0.7, 1.1);
  const Eigen::MatrixXd M = a.orbit_map(x);
  REQUIRE(M.cols() == 3);
  for (int i = 0; i < 3; ++i)
    CHECK((M.col(i) - a.generator(i) * x).norm() < 1e-14);
  Eigen::Vector3d t(0.5, -0.25, 2.0);
  CHECK((a.algebra_element(t) -
         (0.5 * a.generator(0) - 0.25 * a.generator(1) + 2.0 * a.generator(2)))
            .norm() < 1e-14);
}

TEST_CASE("isotropy dimensions at generic and special points") {
  const GroupAction so2 = builtin_action("so2");
  CHECK(isotropy_algebra(so2, Eigen::Vector2d(0.7, 0.1)).dimension == 0);
  CHECK(isotropy_algebra(so2, Eigen::Vector2d::Zero()).dimension == 1);

  const GroupAction so3 = builtin_action("so3");
  const IsotropyData iso = isotropy_algebra(so3, Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK(iso.dimension == 1);
  CHECK(iso.max_violation < 1e-10);
  CHECK(isotropy_algebra(so3, Eigen::Vector3d::Zero()).dimension == 3);

  const GroupAction t2 = builtin_action("torus2");
  Eigen::VectorXd plane1(4);
  plane1 << 0.9, -0.4, 0.0, 0.0;  // second plane collapsed
  CHECK(isotropy_algebra(t2, plane1).dimension == 1);
  Eigen::VectorXd generic(4);
  generic << 0.9, -0.4, 0.3, 0.8;
  CHECK(isotropy_algebra(t2, generic).dimension == 0);
}

TEST_CASE("pair isotropy joins both constraints") {
  const GroupAction so3 = builtin_action("so3");
  Eigen::Vector3d x(1.0, 0.0, 0.0), xi_par(2.0, 0.0, 0.0), xi_gen(0.0, 1.0, 0.0);
  CHECK(isotropy_algebra_pair(so3, x, xi_par).dimension == 1);
  CHECK(isotropy_algebra_pair(so3, x, xi_gen).dimension == 0);
}

TEST_CASE("principal orbit dimensions") {
  CHECK(principal_orbit_dimension(builtin_action("so2"), 400, 1) == 1);
  CHECK(principal_orbit_dimension(builtin_action("so3"), 400, 1) == 2);
  CHECK(principal_orbit_dimension(builtin_action("torus2"), 400, 1) == 2);
}

TEST_CASE("sampled stratification finds thin strata and components") {
  const GroupAction so2 = builtin_action("so2");
  const Stratification s2 = stratify_sample(so2, 2000, 7);
  bool origin = false, generic = false;
  for (const auto& [sig, comps] : s2) {
    if (sig.isotropy_dim == 1) origin = true;
    if (sig.isotropy_dim == 0) generic = true;
    CHECK(!comps.empty());
  }
  CHECK(origin);
  CHECK(generic);

  // the two invariant planes carry isomorphic isotropy but are distinct
  // components under the projector clustering
  const GroupAction t2 = builtin_action("torus2");
  const Stratification st = stratify_sample(t2, 4000, 7);
  bool saw_mid = false;
  for (const auto& [sig, comps] : st) {
    if (sig.isotropy_dim == 1) {
      saw_mid = true;
      CHECK(comps.size() == 2);
      REQUIRE(comps[0].representatives.size() > 0);
      REQUIRE(comps[1].representatives.size() > 0);
      // projectors of the two components are orthogonal rank-1 blocks
      const double overlap =
          (comps[0].isotropy_projector * comps[1].isotropy_projector).norm();
      CHECK(overlap < 1e-8);
    }
    if (sig.isotropy_dim == 2)
      for (const auto& c : comps)
        for (const auto& rep : c.representatives) CHECK(rep.norm() < 1e-12);
  }
  CHECK(saw_mid);
}
