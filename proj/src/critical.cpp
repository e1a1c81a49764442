#include "momap/critical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "momap/quadrature.hpp"
#include "momap/rng.hpp"

namespace momap {

namespace {

double ball_volume(int dim, double r) {
  // pi^(dim/2) r^dim / Gamma(dim/2 + 1)
  return std::pow(M_PI, 0.5 * dim) * std::pow(r, dim) / std::tgamma(0.5 * dim + 1.0);
}

}  // namespace

bool is_regular(const GroupAction& a, const Eigen::VectorXd& x,
                const Eigen::VectorXd& xi, int kappa) {
  const Eigen::VectorXd m = moment_map(a, x, xi);
  const double tol = 1e-8 * (1.0 + x.norm()) * (1.0 + xi.norm());
  if (m.norm() > tol)
    throw std::invalid_argument(
        "is_regular: point is not on the zero level of the moment map");
  const IsotropyData iso = isotropy_algebra_pair(a, x, xi);
  return iso.dimension == a.d() - kappa;
}

// The critical set is { m(x, xi) = 0, t in iso(x) cap iso(xi) }, so the
// projection splits: Gauss-Newton on the moment-map zero level in (x, xi),
// then an orthogonal projection of t onto the pair isotropy algebra. Newton
// on the full gradient is tempting but unstable here: deeper strata (the
// origin above all) are themselves critical, and the near-singular Hessian
// can throw the iteration onto them from moderate distance.
ProjectionResult project_to_crit(const GroupAction& a, const PhasePoint& seed,
                                 int max_iter) {
  const int n = a.n(), d = a.d();
  Eigen::VectorXd x = seed.x, xi = seed.xi;
  ProjectionResult out;
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it;
    const Eigen::VectorXd m = moment_map(a, x, xi);
    const double scale = (1.0 + x.norm()) * (1.0 + xi.norm());
    if (m.norm() <= 1e-13 * scale) break;
    Eigen::MatrixXd Dm(d, 2 * n);
    for (int i = 0; i < d; ++i) {
      Dm.row(i).head(n) = (a.generator(i).transpose() * xi).transpose();
      Dm.row(i).tail(n) = (a.generator(i) * x).transpose();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Dm,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Eigen::VectorXd step = svd.solve(m);
    x -= step.head(n);
    xi -= step.tail(n);
  }
  const IsotropyData iso = isotropy_algebra_pair(a, x, xi);
  Eigen::VectorXd t = Eigen::VectorXd::Zero(d);
  if (iso.dimension > 0)
    t = iso.algebra_basis * (iso.algebra_basis.transpose() * seed.t);
  out.point = PhasePoint{x, xi, t};
  out.distance = (out.point.packed() - seed.packed()).norm();
  out.residual = grad_psi(a, out.point).norm();
  out.converged = out.residual <= 1e-12 * (1.0 + out.point.packed().norm());
  return out;
}

CritPointData transversal_data(const GroupAction& a, const PhasePoint& p,
                               int kappa) {
  const Eigen::MatrixXd H = hess_psi(a, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  CritPointData out;
  out.spectrum = es.eigenvalues();
  const double max_abs = out.spectrum.cwiseAbs().maxCoeff();
  const double cut = 1e-8 * max_abs;
  double det = 1.0;
  double min_nz = 0.0;
  int n_pos = 0, n_neg = 0, n_zero = 0;
  for (Eigen::Index i = 0; i < out.spectrum.size(); ++i) {
    const double ev = out.spectrum[i];
    if (std::abs(ev) <= cut || max_abs == 0.0) {
      ++n_zero;
      continue;
    }
    det *= std::abs(ev);
    min_nz = min_nz == 0.0 ? std::abs(ev) : std::min(min_nz, std::abs(ev));
    (ev > 0.0 ? n_pos : n_neg)++;
  }
  out.tangent_dim = n_zero;
  out.transversal_det_abs = n_zero == static_cast<int>(out.spectrum.size()) ? 0.0 : det;
  out.signature = n_pos - n_neg;
  out.min_abs_nonzero = min_nz;
  const int expected = 2 * a.n() + a.d() - 2 * kappa;
  if (out.tangent_dim != expected)
    throw std::runtime_error(
        "clean-intersection violation: Hessian kernel dimension " +
        std::to_string(out.tangent_dim) + " at a critical point, expected " +
        std::to_string(expected));
  return out;
}

namespace {

struct ChartShard {
  double sum = 0.0;
  std::uint64_t n_accepted = 0;
  int max_abs_signature = 0;
  int violations = 0;
};

// theta-interval extrema of proj(theta) = <c, u(theta)> = |c| cos(theta - phi_c)
void proj_range(const Eigen::Vector2d& c, double th_lo, double th_hi,
                double& pmin, double& pmax) {
  const double r = c.norm();
  const double phi = std::atan2(c[1], c[0]);
  auto val = [&](double th) { return r * std::cos(th - phi); };
  pmin = std::min(val(th_lo), val(th_hi));
  pmax = std::max(val(th_lo), val(th_hi));
  // interior extrema where theta - phi = 0 or +-pi (mod 2 pi)
  for (int k = -2; k <= 2; ++k) {
    const double peak = phi + k * M_PI;
    if (peak > th_lo && peak < th_hi) {
      pmin = std::min(pmin, val(peak));
      pmax = std::max(pmax, val(peak));
    }
  }
}

struct ChartPass {
  double L0 = 0.0;
  std::uint64_t n_accepted = 0;
  int max_abs_signature = 0;
};

ChartPass chart_pass(const GroupAction& a, const Amplitude& amp, int kappa,
                     int nodes, ExecMode mode, int n_shards) {
  const Eigen::Vector2d cx = amp.x.center, cxi = amp.xi.center;
  const double half_x = amp.x.kind == ProfileKind::bump ? amp.x.radius : 6.0 * amp.x.radius;
  const double half_xi = amp.xi.kind == ProfileKind::bump ? amp.xi.radius : 6.0 * amp.xi.radius;
  const double rc = cx.norm();
  const double r_hi = rc + half_x;
  const double r_lo = rc > half_x ? rc - half_x : 1e-6 * r_hi;
  const double phi_c = std::atan2(cx[1], cx[0]);
  const double dth = rc > half_x ? 1.05 * std::asin(half_x / rc) : M_PI;
  const double th_lo = phi_c - dth, th_hi = phi_c + dth;
  double pmin, pmax;
  proj_range(cxi, th_lo, th_hi, pmin, pmax);
  const double s_lo = pmin - half_xi, s_hi = pmax + half_xi;

  const GaussRule gr = gauss_legendre_on(nodes, r_lo, r_hi);
  const GaussRule gt = gauss_legendre_on(nodes, th_lo, th_hi);
  const GaussRule gs = gauss_legendre_on(nodes, s_lo, s_hi);
  const Eigen::VectorXd t0 = Eigen::VectorXd::Zero(1);

  const int S = std::min(n_shards, nodes);
  auto shards = run_shards<ChartShard>(S, mode, [&](std::size_t k) {
    ChartShard sh;
    const int lo = static_cast<int>(k * nodes / S);
    const int hi = static_cast<int>((k + 1) * nodes / S);
    Eigen::VectorXd x(2), xi(2);
    for (int ir = lo; ir < hi; ++ir) {
      const double r = gr.x[ir];
      for (int it = 0; it < nodes; ++it) {
        const double ct = std::cos(gt.x[it]), st = std::sin(gt.x[it]);
        x << r * ct, r * st;
        const double ax = amp.x.eval(x);
        if (ax == 0.0) continue;
        for (int is = 0; is < nodes; ++is) {
          const double s = gs.x[is];
          xi << s * ct, s * st;
          const double av = amp.scale * ax * amp.xi.eval(xi) * amp.t.eval(t0);
          if (av == 0.0) continue;
          ++sh.n_accepted;
          // chart columns d/dr, d/dtheta, d/ds in packed (x, xi, t) order
          Eigen::Matrix<double, 5, 3> tang;
          tang << ct, -r * st, 0.0,
                  st, r * ct, 0.0,
                  0.0, -s * st, ct,
                  0.0, s * ct, st,
                  0.0, 0.0, 0.0;
          const double sqrt_g =
              std::sqrt((tang.transpose() * tang).determinant());
          try {
            const CritPointData cd =
                transversal_data(a, PhasePoint{x, xi, t0}, kappa);
            sh.max_abs_signature =
                std::max(sh.max_abs_signature, std::abs(cd.signature));
            sh.sum += gr.w[ir] * gt.w[it] * gs.w[is] * av * sqrt_g /
                      std::sqrt(cd.transversal_det_abs);
          } catch (const std::runtime_error&) {
            ++sh.violations;
          }
        }
      }
    }
    return sh;
  });

  int violations = 0;
  std::vector<double> partial(shards.size());
  ChartPass out;
  for (std::size_t i = 0; i < shards.size(); ++i) {
    partial[i] = shards[i].sum;
    out.n_accepted += shards[i].n_accepted;
    out.max_abs_signature = std::max(out.max_abs_signature, shards[i].max_abs_signature);
    violations += shards[i].violations;
  }
  if (violations > 0)
    throw std::runtime_error(
        "clean-intersection violation at " + std::to_string(violations) +
        " chart nodes");
  out.L0 = pairwise_sum(partial);
  return out;
}

}  // namespace

L0Result integrate_L0_chart(const GroupAction& a, const Amplitude& amp,
                            int kappa, const SurfaceConfig& cfg, ExecMode mode,
                            int n_shards) {
  if (a.n() != 2 || a.d() != 1)
    throw std::runtime_error(
        "chart_grid surface integration is only available for the planar "
        "rotation action (n = 2, d = 1); use slab_monte_carlo");
  const int nodes = cfg.nodes;
  const int nodes_fine = static_cast<int>(std::ceil(1.5 * nodes));
  const ChartPass coarse = chart_pass(a, amp, kappa, nodes, mode, n_shards);
  const ChartPass fine = chart_pass(a, amp, kappa, nodes_fine, mode, n_shards);

  L0Result out;
  out.method = "chart_grid";
  out.L0 = fine.L0;
  out.err_estimate = std::abs(fine.L0 - coarse.L0);
  out.n_accepted = fine.n_accepted;
  out.max_abs_signature = std::max(coarse.max_abs_signature, fine.max_abs_signature);
  out.empty_support = fine.n_accepted == 0;
  if (out.empty_support)
    out.warnings.push_back(
        "amplitude support does not meet the critical set; L0 = 0");
  if (amp.x.center.norm() <= (amp.x.kind == ProfileKind::bump ? amp.x.radius
                                                              : 6.0 * amp.x.radius))
    out.warnings.push_back(
        "amplitude support touches the singular stratum at the origin; "
        "chart quadrature excludes a neighborhood of it");
  out.details = {{"nodes", nodes},
                 {"nodes_fine", nodes_fine},
                 {"L0_coarse", coarse.L0},
                 {"L0_fine", fine.L0}};
  return out;
}

namespace {

struct SlabShard {
  double sum = 0.0;
  std::uint64_t n_candidates = 0;
  std::uint64_t n_accepted = 0;
  std::uint64_t n_singular = 0;
  std::uint64_t n_projfail = 0;
  int max_abs_signature = 0;
};

// Greedy pivoted row selection: k rows with maximal residual norm under
// successive orthogonalization (QR column pivoting on the transpose, spelled
// out so the pivot order is pinned; ties resolve to the lowest index).
std::vector<int> pivot_rows(const Eigen::MatrixXd& M, int k) {
  Eigen::MatrixXd R = M;
  const int rows = static_cast<int>(M.rows());
  std::vector<bool> used(rows, false);
  std::vector<int> chosen;
  chosen.reserve(k);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_norm = -1.0;
    for (int i = 0; i < rows; ++i) {
      if (used[i]) continue;
      const double nrm = R.row(i).norm();
      if (nrm > best_norm) {
        best_norm = nrm;
        best = i;
      }
    }
    used[best] = true;
    chosen.push_back(best);
    if (best_norm > 0.0) {
      const Eigen::RowVectorXd q = R.row(best) / best_norm;
      for (int i = 0; i < rows; ++i)
        if (!used[i]) R.row(i) -= (R.row(i).dot(q)) * q;
    }
  }
  return chosen;
}

}  // namespace

L0Result integrate_L0_slab(const GroupAction& a, const Amplitude& amp,
                           int kappa, const SurfaceConfig& cfg,
                           std::uint64_t seed, ExecMode mode, int n_shards) {
  const int n = a.n(), d = a.d();
  const int dim = 2 * n + d;
  const Box bx = amp.x.support(), bxi = amp.xi.support(), bt = amp.t.support();
  Eigen::VectorXd lo(dim), hi(dim);
  lo << bx.lo, bxi.lo, bt.lo;
  hi << bx.hi, bxi.hi, bt.hi;
  double v_box = 1.0;
  for (int i = 0; i < dim; ++i) v_box *= hi[i] - lo[i];

  std::vector<double> eps = cfg.eps_sweep;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  if (eps.empty()) throw std::invalid_argument("slab_monte_carlo needs a nonempty eps sweep");

  const int S = n_shards;
  const std::uint64_t per_shard = (cfg.samples + S - 1) / S;
  const std::uint64_t total = per_shard * S;

  struct EpsPass {
    double L = 0.0, stderr_est = 0.0;
    std::uint64_t n_candidates = 0, n_accepted = 0, n_singular = 0, n_projfail = 0;
  };
  std::vector<EpsPass> passes;
  int max_sig = 0;
  std::uint64_t cand_all = 0, sing_all = 0, acc_all = 0;

  for (std::size_t ei = 0; ei < eps.size(); ++ei) {
    const double e = eps[ei];
    const double v_ball = ball_volume(2 * kappa, e);
    auto shards = run_shards<SlabShard>(S, mode, [&](std::size_t k) {
      SlabShard sh;
      Xoshiro256 rng(seed, static_cast<std::uint64_t>(ei) * S + k);
      Eigen::VectorXd v(dim);
      for (std::uint64_t s = 0; s < per_shard; ++s) {
        for (int i = 0; i < dim; ++i) v[i] = rng.uniform(lo[i], hi[i]);
        const PhasePoint p = PhasePoint::unpack(v, n, d);
        const Eigen::VectorXd g = grad_psi(a, p);
        if (g.norm() >= 10.0 * e) continue;
        const Eigen::MatrixXd H = hess_psi(a, p);
        const std::vector<int> sel = pivot_rows(H, 2 * kappa);
        double f2 = 0.0;
        for (int i = 0; i < 2 * kappa; ++i) f2 += g[sel[i]] * g[sel[i]];
        if (f2 >= e * e) continue;
        ++sh.n_candidates;
        try {
          const ProjectionResult pr = project_to_crit(a, p);
          if (!pr.converged || pr.distance > 5.0 * e) {
            ++sh.n_projfail;
            continue;
          }
          if (!is_regular(a, pr.point.x, pr.point.xi, kappa)) {
            ++sh.n_singular;
            continue;
          }
          Eigen::MatrixXd df(2 * kappa, dim);
          for (int i = 0; i < 2 * kappa; ++i) df.row(i) = H.row(sel[i]);
          const double jf = std::sqrt((df * df.transpose()).determinant());
          const double av = amp.eval(pr.point.x, pr.point.xi, pr.point.t);
          const CritPointData cd = transversal_data(a, pr.point, kappa);
          sh.max_abs_signature =
              std::max(sh.max_abs_signature, std::abs(cd.signature));
          ++sh.n_accepted;
          // Thickened-level identity: (1/vol B_eps) int_{|F|<eps} h J_F -> int_{F=0} h,
          // so weighting by J_F recovers the surface measure and the target
          // density still needs the transversal Hessian determinant.
          sh.sum += av * jf / (v_ball * std::sqrt(cd.transversal_det_abs));
        } catch (const std::exception&) {
          ++sh.n_projfail;
        }
      }
      return sh;
    });

    EpsPass ep;
    std::vector<double> est(shards.size());
    for (std::size_t i = 0; i < shards.size(); ++i) {
      est[i] = v_box * shards[i].sum / static_cast<double>(per_shard);
      ep.n_candidates += shards[i].n_candidates;
      ep.n_accepted += shards[i].n_accepted;
      ep.n_singular += shards[i].n_singular;
      ep.n_projfail += shards[i].n_projfail;
      max_sig = std::max(max_sig, shards[i].max_abs_signature);
    }
    ep.L = pairwise_sum(est) / static_cast<double>(S);
    std::vector<double> dev(est.size());
    for (std::size_t i = 0; i < est.size(); ++i) dev[i] = (est[i] - ep.L) * (est[i] - ep.L);
    ep.stderr_est = std::sqrt(pairwise_sum(dev) / (S > 1 ? S * (S - 1.0) : 1.0));
    cand_all += ep.n_candidates;
    sing_all += ep.n_singular;
    acc_all += ep.n_accepted;
    passes.push_back(ep);
  }

  L0Result out;
  out.method = "slab_monte_carlo";
  out.max_abs_signature = max_sig;
  out.n_accepted = acc_all;
  out.contamination_fraction =
      cand_all > 0 ? static_cast<double>(sing_all) / static_cast<double>(cand_all) : 0.0;
  const EpsPass& last = passes.back();
  if (passes.size() >= 2) {
    const EpsPass& prev = passes[passes.size() - 2];
    const double rho = eps[passes.size() - 2] / eps[passes.size() - 1];
    const double extr = last.L + (last.L - prev.L) / (rho * rho - 1.0);
    out.L0 = extr;
    out.err_estimate = std::abs(extr - last.L) + last.stderr_est;
  } else {
    out.L0 = last.L;
    out.err_estimate = last.stderr_est;
  }
  out.empty_support = acc_all == 0;
  if (out.empty_support) {
    out.L0 = 0.0;
    out.warnings.push_back(
        "no slab samples met the critical set; L0 = 0");
  }
  if (sing_all > 0)
    out.warnings.push_back(
        "slab overlaps the singular stratum; contamination fraction " +
        std::to_string(out.contamination_fraction) +
        " (consider a smaller eps sweep)");
  nlohmann::json sweep = nlohmann::json::array();
  for (std::size_t i = 0; i < passes.size(); ++i)
    sweep.push_back({{"eps", eps[i]},
                     {"L", passes[i].L},
                     {"stderr", passes[i].stderr_est},
                     {"n_candidates", passes[i].n_candidates},
                     {"n_accepted", passes[i].n_accepted},
                     {"n_singular", passes[i].n_singular},
                     {"n_projfail", passes[i].n_projfail}});
  out.details = {{"samples_per_eps", total},
                 {"n_shards", S},
                 {"box_volume", v_box},
                 {"eps_sweep", sweep}};
  return out;
}

L0Result integrate_L0(const GroupAction& a, const Amplitude& amp, int kappa,
                      const SurfaceConfig& cfg, std::uint64_t seed,
                      ExecMode mode, int n_shards) {
  if (cfg.method == "slab_monte_carlo")
    return integrate_L0_slab(a, amp, kappa, cfg, seed, mode, n_shards);
  return integrate_L0_chart(a, amp, kappa, cfg, mode, n_shards);
}

}  // namespace momap
