#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

namespace lpjmm {

// Fixed-order blocked reduction: each block of `block` consecutive indices is
// summed sequentially and block partials are combined in index order. The
// result is bit-identical for any number of OpenMP threads (and with OpenMP
// disabled), which is what makes seeded runs reproducible.
template <class F>
double blocked_sum(std::int64_t n, F&& term, std::int64_t block = 2048) {
  if (n <= 0) return 0.0;
  const std::int64_t nblocks = (n + block - 1) / block;
  if (nblocks == 1) {
    double s = 0.0;
    for (std::int64_t t = 0; t < n; ++t) s += term(t);
    return s;
  }
  std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::int64_t lo = b * block;
    const std::int64_t hi = std::min(n, lo + block);
    double s = 0.0;
    for (std::int64_t t = lo; t < hi; ++t) s += term(t);
    partial[static_cast<std::size_t>(b)] = s;
  }
  double s = 0.0;
  for (std::int64_t b = 0; b < nblocks; ++b) s += partial[static_cast<std::size_t>(b)];
  return s;
}

}  // namespace lpjmm
