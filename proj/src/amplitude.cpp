#include "momap/amplitude.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "momap/quadrature.hpp"

namespace momap {

double bump_profile(double r) {
  const double r2 = r * r;
  if (r2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r2));
}

double gaussian_profile(double r) { return std::exp(-0.5 * r * r); }

double unit_profile_mass(ProfileKind kind, int dim) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("unit_profile_mass: dim must be 1, 2 or 3");
  if (kind == ProfileKind::gaussian) return std::pow(2.0 * M_PI, 0.5 * dim);
  // Bump masses by radial quadrature, computed once.
  static const std::array<double, 3> m = [] {
    const GaussRule r = gauss_legendre_on(200, 0.0, 1.0);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
      const double rho = bump_profile(r.x[i]);
      s1 += r.w[i] * rho;
      s2 += r.w[i] * rho * r.x[i];
      s3 += r.w[i] * rho * r.x[i] * r.x[i];
    }
    return std::array<double, 3>{2.0 * s1, 2.0 * M_PI * s2, 4.0 * M_PI * s3};
  }();
  return m[dim - 1];
}

double RadialFactor::eval(const Eigen::VectorXd& v) const {
  const double r = (v - center).norm() / radius;
  return kind == ProfileKind::bump ? bump_profile(r) : gaussian_profile(r);
}

double RadialFactor::mass() const {
  return unit_profile_mass(kind, dim()) * std::pow(radius, dim());
}

Box RadialFactor::support() const {
  const double half = kind == ProfileKind::bump ? radius : 6.0 * radius;
  Box b;
  b.lo = center.array() - half;
  b.hi = center.array() + half;
  return b;
}

Amplitude amplitude_from_config(const AmplitudeConfig& c, int n, int d) {
  const ProfileKind kind = c.kind == "gaussian" ? ProfileKind::gaussian : ProfileKind::bump;
  auto factor = [&](const FactorConfig& f, int want_dim) {
    RadialFactor rf;
    rf.kind = kind;
    rf.center = Eigen::Map<const Eigen::VectorXd>(f.center.data(),
                                                  static_cast<Eigen::Index>(f.center.size()));
    rf.radius = f.radius;
    if (rf.dim() != want_dim)
      throw std::invalid_argument("amplitude factor center has wrong dimension");
    return rf;
  };
  Amplitude a;
  a.scale = c.scale;
  a.x = factor(c.x, n);
  a.xi = factor(c.xi, n);
  a.t = factor(c.t, d);
  return a;
}

}  // namespace momap
