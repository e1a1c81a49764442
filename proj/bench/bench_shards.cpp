// Timing comparison of the serial reference path against the sharded
// OpenMP path, plus a bitwise equality check of their results. The shard
// decomposition is fixed by the config, so the two paths must agree to the
// last bit; only the wall time may differ.

#include <chrono>
#include <cstdio>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "momap/critical.hpp"
#include "momap/harness.hpp"
#include "momap/oracle.hpp"

using namespace momap;

namespace {

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

Amplitude reference_amplitude() {
  AmplitudeConfig c;
  c.x.center = {1.0, 0.0};
  c.x.radius = 0.5;
  c.xi.center = {1.0, 0.0};
  c.xi.radius = 0.5;
  c.t.center = {0.0};
  c.t.radius = 1.0;
  return amplitude_from_config(c, 2, 1);
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::cout << "openmp threads: " << omp_get_max_threads() << "\n";
#else
  std::cout << "built without openmp; both paths run serially\n";
#endif

  const GroupAction a = builtin_action("so2");
  const Amplitude amp = reference_amplitude();
  OracleConfig ocfg;
  const Oracle oracle(a, amp, ocfg, 0.03);
  std::cout << "oracle nodes per dimension: " << oracle.nodes_per_dim() << "\n";

  OracleRow rs, rp;
  const double ts = timed([&] { rs = oracle.eval(0.03, ExecMode::serial, 64); });
  const double tp = timed([&] { rp = oracle.eval(0.03, ExecMode::parallel, 64); });
  std::printf("oracle eval   serial %.3fs  parallel %.3fs  speedup %.2fx\n", ts,
              tp, ts / tp);
  const bool oracle_same = rs.value.real() == rp.value.real() &&
                           rs.value.imag() == rp.value.imag() &&
                           rs.err_estimate == rp.err_estimate;

  SurfaceConfig scfg;
  scfg.nodes = 96;
  L0Result cs, cp;
  const double tcs = timed(
      [&] { cs = integrate_L0_chart(a, amp, 1, scfg, ExecMode::serial, 64); });
  const double tcp = timed(
      [&] { cp = integrate_L0_chart(a, amp, 1, scfg, ExecMode::parallel, 64); });
  std::printf("chart L0      serial %.3fs  parallel %.3fs  speedup %.2fx\n",
              tcs, tcp, tcs / tcp);
  const bool chart_same = cs.L0 == cp.L0 && cs.err_estimate == cp.err_estimate;

  SurfaceConfig slab;
  slab.method = "slab_monte_carlo";
  slab.samples = 400000;
  slab.eps_sweep = {0.08, 0.04};
  L0Result ms, mp;
  const double tms = timed([&] {
    ms = integrate_L0_slab(a, amp, 1, slab, 42, ExecMode::serial, 64);
  });
  const double tmp = timed([&] {
    mp = integrate_L0_slab(a, amp, 1, slab, 42, ExecMode::parallel, 64);
  });
  std::printf("slab L0       serial %.3fs  parallel %.3fs  speedup %.2fx\n",
              tms, tmp, tms / tmp);
  const bool slab_same = ms.L0 == mp.L0 && ms.n_accepted == mp.n_accepted;

  const bool all_same = oracle_same && chart_same && slab_same;
  std::cout << "bitwise agreement serial vs parallel: "
            << (all_same ? "yes" : "NO") << "\n";
  return all_same ? 0 : 1;
}
