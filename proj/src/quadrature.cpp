#include "momap/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace momap {

namespace {

// Newton iteration on P_n with the three-term recurrence. Standard
// construction; double precision converges in a handful of steps from the
// Chebyshev-like initial guess.
GaussRule build_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: node count must be >= 1");
  GaussRule r;
  r.x.assign(n, 0.0);
  r.w.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // one clean-up step so mirrored nodes agree to the bit
    {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.x[i] = -x;
    r.w[i] = w;
    r.x[n - 1 - i] = x;
    r.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.x[n / 2] = 0.0;
  return r;
}

std::mutex cache_mutex;
std::map<int, GaussRule> cache;

}  // namespace

const GaussRule& gauss_legendre(int n) {
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_rule(n)).first;
  return it->second;
}

GaussRule gauss_legendre_on(int n, double a, double b) {
  const GaussRule& base = gauss_legendre(n);
  GaussRule r;
  r.x.resize(base.x.size());
  r.w.resize(base.w.size());
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < base.x.size(); ++i) {
    r.x[i] = c + h * base.x[i];
    r.w[i] = h * base.w[i];
  }
  return r;
}

}  // namespace momap
