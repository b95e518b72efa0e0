#pragma once

// Small dense linear solver used by the hitting-probability oracle.

#include <cmath>
#include <cstddef>
#include <vector>

#include "efwer/types.hpp"

namespace efwer {

/// Solves A x = b by Gaussian elimination with partial pivoting. A is
/// row-major n x n; both A and b are consumed. Throws on (near-)singular
/// systems, which valid substochastic inputs never produce once the system is
/// restricted to states that can reach the absorbing set.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b, int n) {
  const auto at = [&](int r, int c) -> double& {
    return a[static_cast<std::size_t>(r) * static_cast<std::size_t>(n) + static_cast<std::size_t>(c)];
  };
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::fabs(v));
  const double tiny = std::max(scale, 1.0) * 1e-14;

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(at(r, col)) > std::fabs(at(pivot, col))) pivot = r;
    }
    if (std::fabs(at(pivot, col)) <= tiny) {
      throw Error(errc::singular_system, "singular linear system in hitting-probability solve");
    }
    if (pivot != col) {
      for (int c = col; c < n; ++c) std::swap(at(pivot, c), at(col, c));
      std::swap(b[static_cast<std::size_t>(pivot)], b[static_cast<std::size_t>(col)]);
    }
    const double inv = 1.0 / at(col, col);
    for (int r = col + 1; r < n; ++r) {
      const double f = at(r, col) * inv;
      if (f == 0.0) continue;
      for (int c = col + 1; c < n; ++c) at(r, c) -= f * at(col, c);
      b[static_cast<std::size_t>(r)] -= f * b[static_cast<std::size_t>(col)];
    }
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double acc = b[static_cast<std::size_t>(r)];
    for (int c = r + 1; c < n; ++c) acc -= at(r, c) * x[static_cast<std::size_t>(c)];
    x[static_cast<std::size_t>(r)] = acc / at(r, r);
  }
  return x;
}

}  // namespace efwer
