#include "momap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momap/quadrature.hpp"

namespace momap {

namespace {

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 : std::sin(x) / x; }

double dot_n(const double* a, const double* b, int n) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

// Componentwise sup of |moment_map| over the product of two boxes; each
// component is bilinear in (x, xi), so the maximum sits at a corner pair.
// The returned 2-norm bound sqrt(sum_r sup_r^2) is rigorous.
double sup_moment_norm(const GroupAction& a, const Box& bx, const Box& bxi) {
  const int n = a.n(), d = a.d();
  Eigen::VectorXd mmax = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd x(n), xi(n);
  for (int cx = 0; cx < (1 << n); ++cx) {
    for (int i = 0; i < n; ++i) x[i] = (cx >> i) & 1 ? bx.hi[i] : bx.lo[i];
    for (int cxi = 0; cxi < (1 << n); ++cxi) {
      for (int i = 0; i < n; ++i) xi[i] = (cxi >> i) & 1 ? bxi.hi[i] : bxi.lo[i];
      mmax = mmax.cwiseMax(moment_map(a, x, xi).cwiseAbs());
    }
  }
  return mmax.norm();
}

}  // namespace

CubicTable::CubicTable(double x0, double dx, std::vector<double> y)
    : x0_(x0), dx_(dx), n_(y.size()) {
  if (n_ < 4) throw std::invalid_argument("CubicTable needs at least 4 points");
  // Natural cubic spline: second derivatives from the standard tridiagonal
  // system, then per-interval monomial coefficients in (v - x_i).
  const std::size_t n = n_;
  std::vector<double> m(n, 0.0), diag(n, 2.0), rhs(n, 0.0), upper(n, 0.5);
  for (std::size_t i = 1; i + 1 < n; ++i)
    rhs[i] = 3.0 * (y[i + 1] - 2.0 * y[i] + y[i - 1]) / (dx * dx);
  // Thomas solve on the interior (natural: m[0] = m[n-1] = 0).
  std::vector<double> cp(n, 0.0), dp(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double denom = diag[i] - 0.5 * (i > 1 ? cp[i - 1] : 0.0);
    cp[i] = upper[i] / denom;
    dp[i] = (rhs[i] - 0.5 * (i > 1 ? dp[i - 1] : 0.0)) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m[i] = dp[i] - cp[i] * m[i + 1];
    if (i == 1) break;
  }
  c0_.resize(n - 1);
  c1_.resize(n - 1);
  c2_.resize(n - 1);
  c3_.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    c0_[i] = y[i];
    c1_[i] = (y[i + 1] - y[i]) / dx - dx * (2.0 * m[i] + m[i + 1]) / 6.0;
    c2_[i] = 0.5 * m[i];
    c3_[i] = (m[i + 1] - m[i]) / (6.0 * dx);
  }
}

double CubicTable::eval(double v) const {
  const double s = (v - x0_) / dx_;
  if (s < -1e-9 || s > static_cast<double>(n_ - 1) + 1e-9)
    throw std::out_of_range("CubicTable: argument outside the table");
  std::size_t i = s <= 0.0 ? 0 : static_cast<std::size_t>(s);
  if (i >= n_ - 1) i = n_ - 2;
  const double t = v - (x0_ + dx_ * static_cast<double>(i));
  return c0_[i] + t * (c1_[i] + t * (c2_[i] + t * c3_[i]));
}

TFactorHat::TFactorHat(const RadialFactor& factor, double u_max)
    : f_(factor), u_max_(u_max) {
  has_center_ = f_.center.norm() > 0.0;
  if (f_.kind == ProfileKind::gaussian) return;
  const int d = f_.dim();
  if (d < 1 || d > 3)
    throw std::invalid_argument("TFactorHat: bump transform implemented for d in {1,2,3}");
  // Unit-radius table with a 5% margin beyond the requested range.
  const double dv = 0.05;
  const double vmax = f_.radius * u_max * 1.05 + 1.0;
  const std::size_t count = static_cast<std::size_t>(std::ceil(vmax / dv)) + 1;
  const GaussRule rule = gauss_legendre_on(400, 0.0, 1.0);
  std::vector<double> y(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double v = dv * static_cast<double>(k);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      const double r = rule.x[i];
      const double rho = bump_profile(r);
      double kern;
      if (d == 1) kern = 2.0 * std::cos(v * r);
      else if (d == 2) kern = 2.0 * M_PI * std::cyl_bessel_j(0.0, v * r) * r;
      else kern = 4.0 * M_PI * sinc(v * r) * r * r;
      s += rule.w[i] * rho * kern;
    }
    y[k] = s;
  }
  table_ = CubicTable(0.0, dv, std::move(y));
}

double TFactorHat::radial(double u) const {
  const int d = f_.dim();
  if (f_.kind == ProfileKind::gaussian) {
    const double w = f_.radius;
    return std::pow(2.0 * M_PI, 0.5 * d) * std::pow(w, d) *
           std::exp(-0.5 * w * w * u * u);
  }
  const double v = f_.radius * u;
  if (v > table_.x_max())
    throw std::runtime_error(
        "oracle accuracy: frequency " + std::to_string(u) +
        " outside the tabulated transform range (rebuild with a smaller mu_min)");
  return std::pow(f_.radius, d) * table_.eval(v);
}

std::complex<double> TFactorHat::eval(const Eigen::VectorXd& u) const {
  const double r = radial(u.norm());
  if (!has_center_) return {r, 0.0};
  const double ph = u.dot(f_.center);
  return {r * std::cos(ph), r * std::sin(ph)};
}

namespace {

// One factor block of the tensor grid, compressed to the nodes where the
// factor is nonzero. Weights are folded into the stored value.
struct BlockGrid {
  std::size_t count = 0;
  int n = 0, d = 0;
  std::vector<double> wval;   // factor value * tensor weight
  std::vector<double> coord;  // n doubles per entry
  std::vector<double> orbit;  // d*n doubles per entry; x-block only
};

BlockGrid build_block(const GroupAction* act_for_orbit, const RadialFactor& f,
                      int nodes) {
  const int n = f.dim();
  BlockGrid b;
  b.n = n;
  b.d = act_for_orbit ? act_for_orbit->d() : 0;
  const Box box = f.support();
  std::vector<GaussRule> rules(n);
  for (int i = 0; i < n; ++i) rules[i] = gauss_legendre_on(nodes, box.lo[i], box.hi[i]);
  std::vector<int> idx(n, 0);
  Eigen::VectorXd v(n);
  while (true) {
    double w = 1.0;
    for (int i = 0; i < n; ++i) {
      v[i] = rules[i].x[idx[i]];
      w *= rules[i].w[idx[i]];
    }
    const double fv = f.eval(v);
    if (fv != 0.0) {
      b.wval.push_back(fv * w);
      for (int i = 0; i < n; ++i) b.coord.push_back(v[i]);
      if (act_for_orbit) {
        const Eigen::MatrixXd om = act_for_orbit->orbit_map(v);  // n x d
        for (int r = 0; r < b.d; ++r)
          for (int i = 0; i < n; ++i) b.orbit.push_back(om(i, r));
      }
      ++b.count;
    }
    int k = 0;
    while (k < n && ++idx[k] == nodes) idx[k++] = 0;
    if (k == n) break;
  }
  return b;
}

}  // namespace

struct Oracle::Impl {
  GroupAction a;
  Amplitude amp;
  OracleConfig cfg;
  double mu_min = 0.0;
  double sup_m = 0.0;
  int nodes_c = 0, nodes_f = 0, nodes_tc = 0, nodes_tf = 0;
  TFactorHat hat;
  BlockGrid xc, xf, xic, xif;   // x and xi blocks, coarse and fine
  BlockGrid tc, tf;             // t blocks for the full path

  Impl(const GroupAction& act, const Amplitude& am, const OracleConfig& c,
       double mmin)
      : a(act), amp(am), cfg(c), mu_min(mmin),
        sup_m(sup_moment_norm(act, am.x.support(), am.xi.support())),
        hat(am.t, sup_m / mmin) {
    if (mmin <= 0.0) throw std::invalid_argument("oracle: mu_min must be positive");
    const double side = std::max(amp.x.support().max_side(), amp.xi.support().max_side());
    const double want = cfg.nodes_per_wave * side * (sup_m / mu_min) / (2.0 * M_PI);
    nodes_c = std::max(cfg.base_nodes, static_cast<int>(std::ceil(want)));
    nodes_c = std::min(nodes_c, cfg.max_nodes);
    nodes_f = static_cast<int>(std::ceil(cfg.refine_factor * nodes_c));
    const double tside = amp.t.support().max_side();
    const double twant = cfg.nodes_per_wave * tside * (sup_m / mu_min) / (2.0 * M_PI);
    nodes_tc = std::min(std::max(cfg.base_nodes, static_cast<int>(std::ceil(twant))), cfg.max_nodes);
    nodes_tf = static_cast<int>(std::ceil(cfg.refine_factor * nodes_tc));

    xc = build_block(&a, amp.x, nodes_c);
    xf = build_block(&a, amp.x, nodes_f);
    xic = build_block(nullptr, amp.xi, nodes_c);
    xif = build_block(nullptr, amp.xi, nodes_f);
    if (2 * a.n() + a.d() <= 5) {
      tc = build_block(nullptr, amp.t, nodes_tc);
      tf = build_block(nullptr, amp.t, nodes_tf);
    }
  }

  std::complex<double> reduced(const BlockGrid& X, const BlockGrid& Xi,
                               double mu, ExecMode mode, int n_shards) const {
    if (amp.t.kind == ProfileKind::bump && sup_m / mu > hat.u_max())
      throw std::runtime_error(
          "oracle accuracy: mu below the tabulated frequency range");
    const int n = a.n(), d = a.d();
    const bool mod = hat.has_center();
    const double* tc_center = mod ? amp.t.center.data() : nullptr;
    const std::size_t S =
        std::max<std::size_t>(1, std::min<std::size_t>(n_shards, X.count));
    struct Part { double re = 0.0, im = 0.0; };
    auto parts = run_shards<Part>(S, mode, [&](std::size_t k) {
      Part p;
      const std::size_t lo = k * X.count / S, hi = (k + 1) * X.count / S;
      double m[8];
      for (std::size_t i = lo; i < hi; ++i) {
        const double wx = X.wval[i];
        const double* ox = &X.orbit[i * d * n];
        for (std::size_t j = 0; j < Xi.count; ++j) {
          const double* xiv = &Xi.coord[j * n];
          double m2 = 0.0;
          for (int r = 0; r < d; ++r) {
            m[r] = dot_n(ox + r * n, xiv, n);
            m2 += m[r] * m[r];
          }
          const double b = hat.radial(std::sqrt(m2) / mu);
          const double w = wx * Xi.wval[j] * b;
          if (mod) {
            const double ph = dot_n(m, tc_center, d) / mu;
            p.re += w * std::cos(ph);
            p.im += w * std::sin(ph);
          } else {
            p.re += w;
          }
        }
      }
      return p;
    });
    std::vector<double> re(parts.size()), im(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      re[i] = parts[i].re;
      im[i] = parts[i].im;
    }
    return {pairwise_sum(re), pairwise_sum(im)};
  }

  std::complex<double> full(const BlockGrid& X, const BlockGrid& Xi,
                            const BlockGrid& T, double mu, ExecMode mode,
                            int n_shards) const {
    const int n = a.n(), d = a.d();
    const std::size_t S =
        std::max<std::size_t>(1, std::min<std::size_t>(n_shards, X.count));
    struct Part { double re = 0.0, im = 0.0; };
    auto parts = run_shards<Part>(S, mode, [&](std::size_t k) {
      Part p;
      const std::size_t lo = k * X.count / S, hi = (k + 1) * X.count / S;
      double m[8];
      for (std::size_t i = lo; i < hi; ++i) {
        const double wx = X.wval[i];
        const double* ox = &X.orbit[i * d * n];
        for (std::size_t j = 0; j < Xi.count; ++j) {
          const double* xiv = &Xi.coord[j * n];
          for (int r = 0; r < d; ++r) m[r] = dot_n(ox + r * n, xiv, n);
          const double wxj = wx * Xi.wval[j];
          for (std::size_t l = 0; l < T.count; ++l) {
            const double ph = dot_n(m, &T.coord[l * d], d) / mu;
            const double w = wxj * T.wval[l];
            p.re += w * std::cos(ph);
            p.im += w * std::sin(ph);
          }
        }
      }
      return p;
    });
    std::vector<double> re(parts.size()), im(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
      re[i] = parts[i].re;
      im[i] = parts[i].im;
    }
    return {pairwise_sum(re), pairwise_sum(im)};
  }
};

Oracle::Oracle(const GroupAction& a, const Amplitude& amp,
               const OracleConfig& cfg, double mu_min)
    : impl_(std::make_unique<Impl>(a, amp, cfg, mu_min)) {}

Oracle::~Oracle() = default;

std::complex<double> Oracle::eval_reduced_once(double mu, bool fine,
                                               ExecMode mode,
                                               int n_shards) const {
  return impl_->reduced(fine ? impl_->xf : impl_->xc,
                        fine ? impl_->xif : impl_->xic, mu, mode, n_shards);
}

std::complex<double> Oracle::eval_full_once(double mu, bool fine, ExecMode mode,
                                            int n_shards) const {
  if (2 * impl_->a.n() + impl_->a.d() > 5)
    throw std::runtime_error(
        "full tensor quadrature is limited to phase-space dimension "
        "2n + d <= 5; use the fourier method");
  return impl_->full(fine ? impl_->xf : impl_->xc,
                     fine ? impl_->xif : impl_->xic,
                     fine ? impl_->tf : impl_->tc, mu, mode, n_shards);
}

OracleRow Oracle::eval(double mu, ExecMode mode, int n_shards) const {
  const bool full = impl_->cfg.method == "full";
  OracleRow row;
  row.mu = mu;
  row.method = full ? "full_tensor" : "fourier_reduced";
  const std::complex<double> coarse =
      full ? eval_full_once(mu, false, mode, n_shards)
           : eval_reduced_once(mu, false, mode, n_shards);
  const std::complex<double> refined =
      full ? eval_full_once(mu, true, mode, n_shards)
           : eval_reduced_once(mu, true, mode, n_shards);
  row.value = refined;
  row.err_estimate = std::abs(refined - coarse);
  // below 1e-8 * mass the pipeline treats the integral as zero, so the
  // resolution requirement is measured against that scale, not |I| itself
  const double scale = std::max(std::abs(refined), 1e-8 * impl_->amp.mass());
  if (row.err_estimate > 1e-4 * scale)
    throw std::runtime_error(
        "oracle accuracy: unresolved oscillation at mu = " + std::to_string(mu) +
        " (refinement disagreement " + std::to_string(row.err_estimate / scale) +
        " relative)");
  return row;
}

std::complex<double> Oracle::fourier_reduce_X(const Eigen::VectorXd& x,
                                              const Eigen::VectorXd& xi,
                                              double mu) const {
  const Eigen::VectorXd m = moment_map(impl_->a, x, xi);
  return impl_->hat.eval(m / mu);
}

int Oracle::nodes_per_dim() const { return impl_->nodes_c; }
int Oracle::nodes_t() const { return impl_->nodes_tc; }
double Oracle::sup_moment() const { return impl_->sup_m; }
const TFactorHat& Oracle::t_hat() const { return impl_->hat; }

SemiAnalyticSO2::SemiAnalyticSO2(const GroupAction& a, const Amplitude& amp,
                                 int nodes, double ds)
    : amp_(amp) {
  if (a.n() != 2 || a.d() != 1)
    throw std::invalid_argument(
        "the semianalytic reduction applies to the planar rotation action only");
  s_sup_ = sup_moment_norm(a, amp.x.support(), amp.xi.support());
  b0_ = amp.t.eval(Eigen::VectorXd::Zero(1));
  const double S = s_sup_ * 1.01 + 1e-12;

  const Eigen::Vector2d cx = amp.x.center, cxi = amp.xi.center;
  const double half_x = amp.x.kind == ProfileKind::bump ? amp.x.radius : 6.0 * amp.x.radius;
  const double half_xi = amp.xi.kind == ProfileKind::bump ? amp.xi.radius : 6.0 * amp.xi.radius;
  const double rc = cx.norm();
  const double r_hi = rc + half_x;
  const double r_lo = rc > half_x ? rc - half_x : 1e-6 * r_hi;
  const double phi_c = std::atan2(cx[1], cx[0]);
  const double dth = rc > half_x ? 1.05 * std::asin(half_x / rc) : M_PI;
  const GaussRule gr = gauss_legendre_on(nodes, r_lo, r_hi);
  const GaussRule gt = gauss_legendre_on(nodes, phi_c - dth, phi_c + dth);

  // theta-wise data: frame, projections of the xi-center on u and Ju
  std::vector<double> uc(nodes), us(nodes), pu(nodes), pj(nodes);
  double pmin = 1e300, pmax = -1e300;
  for (int it = 0; it < nodes; ++it) {
    uc[it] = std::cos(gt.x[it]);
    us[it] = std::sin(gt.x[it]);
    pu[it] = cxi[0] * uc[it] + cxi[1] * us[it];
    pj[it] = -cxi[0] * us[it] + cxi[1] * uc[it];  // <c_xi, Ju>, J = rotation by pi/2
    pmin = std::min(pmin, pu[it]);
    pmax = std::max(pmax, pu[it]);
  }
  const GaussRule gp = gauss_legendre_on(nodes, pmin - half_xi, pmax + half_xi);
  Eigen::MatrixXd ax(nodes, nodes);
  for (int ir = 0; ir < nodes; ++ir) {
    Eigen::Vector2d x;
    for (int it = 0; it < nodes; ++it) {
      x << gr.x[ir] * uc[it], gr.x[ir] * us[it];
      ax(ir, it) = amp.x.eval(x);
    }
  }

  const std::size_t half_count = static_cast<std::size_t>(std::ceil(S / ds));
  const std::size_t count = 2 * half_count + 1;
  const double s0 = -ds * static_cast<double>(half_count);
  std::vector<double> table(count, 0.0);
  Eigen::Vector2d xi;
  for (std::size_t is = 0; is < count; ++is) {
    const double s = s0 + ds * static_cast<double>(is);
    double acc = 0.0;
    for (int ir = 0; ir < nodes; ++ir) {
      const double r = gr.x[ir];
      const double sr = s / r;
      for (int it = 0; it < nodes; ++it) {
        const double axv = ax(ir, it);
        if (axv == 0.0) continue;
        if (std::abs(sr - pj[it]) > half_xi) continue;  // whole p-row vanishes
        const double wrt = gr.w[ir] * gt.w[it] * axv;
        for (int ip = 0; ip < nodes; ++ip) {
          const double p = gp.x[ip];
          // xi = p u + (s/r) J u with J u = (-sin, cos)
          xi << p * uc[it] - sr * us[it], p * us[it] + sr * uc[it];
          const double axiv = amp.xi.eval(xi);
          if (axiv == 0.0) continue;
          // tangent columns of the level-set chart in (x, xi) in R^4
          Eigen::Matrix<double, 4, 3> tang;
          tang << uc[it], r * -us[it], 0.0,
                  us[it], r * uc[it], 0.0,
                  sr / r * us[it], p * -us[it] - sr * uc[it], uc[it],
                  -sr / r * uc[it], p * uc[it] - sr * us[it], us[it];
          const double det_g = (tang.transpose() * tang).determinant();
          // grad omega in (x, xi): (xi2, -xi1, -x2, x1)
          const double gw2 = xi.squaredNorm() + r * r;
          acc += wrt * gp.w[ip] * amp_.scale * axiv * std::sqrt(det_g / gw2);
        }
      }
    }
    table[is] = acc;
    if (is == half_count) a0_ = acc;
  }
  table_ = CubicTable(s0, ds, std::move(table));
  hat_ = std::make_unique<TFactorHat>(amp.t, S / 0.01 * 1.05);
}

double SemiAnalyticSO2::A(double s) const {
  if (s < table_.x_min() || s > table_.x_max()) return 0.0;
  return table_.eval(s);
}

double SemiAnalyticSO2::slope() const { return 2.0 * M_PI * b0_ * a0_; }

std::complex<double> SemiAnalyticSO2::eval_I(double mu) const {
  const double S = table_.x_max();
  const int nodes = std::max(768, static_cast<int>(std::ceil(3.0 * S / mu)));
  const GaussRule g = gauss_legendre_on(nodes, -S, S);
  const bool mod = hat_->has_center();
  const double c = mod ? amp_.t.center[0] : 0.0;
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < g.x.size(); ++i) {
    const double s = g.x[i];
    const double w = g.w[i] * table_.eval(s) * hat_->radial(std::abs(s) / mu);
    if (mod) {
      const double ph = s * c / mu;
      re += w * std::cos(ph);
      im += w * std::sin(ph);
    } else {
      re += w;
    }
  }
  return {re, im};
}

}  // namespace momap
