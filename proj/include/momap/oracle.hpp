#pragma once

#include <Eigen/Dense>
#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "momap/amplitude.hpp"
#include "momap/config.hpp"
#include "momap/phase.hpp"
#include "momap/reduce.hpp"

namespace momap {

struct OracleRow {
  double mu = 0.0;
  std::complex<double> value;
  double err_estimate = 0.0;  // absolute, from the node-refinement comparison
  std::string method;
};

// Natural cubic spline on a uniform grid; eval throws outside the grid.
class CubicTable {
 public:
  CubicTable() = default;
  CubicTable(double x0, double dx, std::vector<double> y);
  double eval(double v) const;
  double x_min() const { return x0_; }
  double x_max() const { return x0_ + dx_ * (static_cast<double>(n_) - 1.0); }

 private:
  double x0_ = 0.0, dx_ = 1.0;
  std::size_t n_ = 0;
  std::vector<double> c0_, c1_, c2_, c3_;  // per-interval cubic coefficients
};

// Fourier transform of one radial amplitude factor (the t-factor), as a
// function of the frequency vector. Bump profiles are tabulated on the
// unit-radius frequency axis (step 0.05, cubic interpolation) with the
// d-dimensional radial kernel; the Gaussian transform is closed-form.
// Frequencies beyond the tabulated range raise a std::runtime_error rather
// than extrapolate.
class TFactorHat {
 public:
  TFactorHat(const RadialFactor& factor, double u_max);

  // radial part at frequency magnitude u >= 0 (no center modulation)
  double radial(double u) const;

  // full transform at frequency vector u, including the center phase
  std::complex<double> eval(const Eigen::VectorXd& u) const;

  double u_max() const { return u_max_; }
  bool has_center() const { return has_center_; }

 private:
  RadialFactor f_;
  bool has_center_ = false;
  double u_max_ = 0.0;
  CubicTable table_;  // bump kinds only
};

// Oscillatory-integral reference evaluator. Node counts per dimension are
// fixed once per sweep from the smallest mu (resolution is monotone in mu),
// and every value is re-evaluated on a 1.5x finer grid; the difference is
// the error estimate, and a relative disagreement above 1e-4 aborts the
// evaluation as unresolved oscillation.
class Oracle {
 public:
  Oracle(const GroupAction& a, const Amplitude& amp, const OracleConfig& cfg,
         double mu_min);
  ~Oracle();

  OracleRow eval(double mu, ExecMode mode, int n_shards) const;

  // t-integral replaced by the transform of the t-factor at m/mu
  std::complex<double> eval_reduced_once(double mu, bool fine, ExecMode mode,
                                         int n_shards) const;
  // full (2n+d)-dimensional tensor quadrature; requires 2n+d <= 5
  std::complex<double> eval_full_once(double mu, bool fine, ExecMode mode,
                                      int n_shards) const;

  std::complex<double> fourier_reduce_X(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& xi,
                                        double mu) const;

  int nodes_per_dim() const;
  int nodes_t() const;
  double sup_moment() const;
  const TFactorHat& t_hat() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Exact reduction for the planar rotation action: with the level-set
// aggregate A(s) of the amplitude over {omega = s} (weighted by the co-area
// factor), I(mu) = int bhat(s/mu) A(s) ds and the leading slope of
// I(mu)/(2 pi mu) is b(0) A(0). A is tabulated by deterministic 3-dim
// quadrature in the level-set chart and interpolated.
class SemiAnalyticSO2 {
 public:
  SemiAnalyticSO2(const GroupAction& a, const Amplitude& amp, int nodes = 64,
                  double ds = 0.005);

  double A0() const { return a0_; }
  double A(double s) const;
  double slope() const;  // of I(mu)/mu at 0: 2 pi b(0) A(0)
  std::complex<double> eval_I(double mu) const;

 private:
  Amplitude amp_;
  double s_sup_ = 0.0;
  double a0_ = 0.0;
  double b0_ = 0.0;
  CubicTable table_;
  std::unique_ptr<TFactorHat> hat_;
};

}  // namespace momap
