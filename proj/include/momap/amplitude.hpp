#pragma once

#include <Eigen/Dense>

#include "momap/config.hpp"

namespace momap {

enum class ProfileKind { bump, gaussian };

// Flat-at-the-edge compactly supported profile, normalized to 1 at the
// origin: exp(1 - 1/(1-r^2)) for |r| < 1, exactly 0.0 otherwise. The exact
// zero matters: support tests downstream compare against 0 bit-for-bit.
double bump_profile(double r);

// exp(-r^2/2), unit width
double gaussian_profile(double r);

// L^1 mass of the unit-radius, unit-height profile in R^dim, dim in {1,2,3}.
double unit_profile_mass(ProfileKind kind, int dim);

struct Box {
  Eigen::VectorXd lo, hi;
  double volume() const {
    double v = 1.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
  double max_side() const {
    double s = 0.0;
    for (Eigen::Index i = 0; i < lo.size(); ++i) s = std::max(s, hi[i] - lo[i]);
    return s;
  }
};

// One radial factor of the product amplitude. For the Gaussian kind the
// radius plays the role of the width and the reported support box is the
// 6-sigma box (density below 1.6e-8 outside).
struct RadialFactor {
  ProfileKind kind = ProfileKind::bump;
  Eigen::VectorXd center;
  double radius = 1.0;

  double eval(const Eigen::VectorXd& v) const;
  double mass() const;
  Box support() const;
  int dim() const { return static_cast<int>(center.size()); }
};

// a(x, xi, t) = scale * fx(x) * fxi(xi) * ft(t)
struct Amplitude {
  double scale = 1.0;
  RadialFactor x, xi, t;

  double eval(const Eigen::VectorXd& xv, const Eigen::VectorXd& xiv,
              const Eigen::VectorXd& tv) const {
    return scale * x.eval(xv) * xi.eval(xiv) * t.eval(tv);
  }
  double mass() const { return scale * x.mass() * xi.mass() * t.mass(); }
};

Amplitude amplitude_from_config(const AmplitudeConfig& c, int n, int d);

}  // namespace momap
