#pragma once

#include <cstddef>
#include <vector>

namespace momap {

enum class ExecMode { serial, parallel };

// Fixed-shape parallelism: work is split into a shard count chosen by the
// caller (never by the thread count), each shard produces its value
// independently, and the reduction order is fixed. Results are identical
// in serial and parallel mode and for any OMP_NUM_THREADS.
template <class T, class F>
std::vector<T> run_shards(std::size_t n_shards, ExecMode mode, F&& fn) {
  std::vector<T> out(n_shards);
  if (mode == ExecMode::parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n_shards); ++i) {
      const auto k = static_cast<std::size_t>(i);
      out[k] = fn(k);
    }
  } else {
    for (std::size_t i = 0; i < n_shards; ++i) out[i] = fn(i);
  }
  return out;
}

// Pairwise summation: fixed association, better rounding than left-to-right.
inline double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(v.data(), v.size());
}

}  // namespace momap
