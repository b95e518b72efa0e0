#pragma once

// e-Holm: the closure of unweighted e-Bonferroni local tests. The rejection
// set follows from a single O(n) threshold; adjusted e-values take one sort
// plus a linear sweep.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "efwer/types.hpp"

namespace efwer {

/// C = sum_j max(1/alpha - e_j, 0), the slack the null-ish e-values add to
/// the rejection threshold.
inline double holm_correction(const EValueVector& e, double alpha) {
  const double inv_alpha = 1.0 / alpha;
  double c = 0.0;
  for (double v : e.values()) c += std::max(inv_alpha - v, 0.0);
  return c;
}

/// e-Holm rejection set: reject H_i iff e_i >= 1/alpha + C. 1-based ids.
inline std::vector<int> holm_reject(const EValueVector& e, double alpha) {
  if (std::isnan(alpha) || !(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(errc::invalid_input, "alpha must lie in (0, 1)");
  }
  const double threshold = 1.0 / alpha + holm_correction(e, alpha);
  std::vector<int> out;
  for (int i = 0; i < e.size(); ++i) {
    if (e[i] >= threshold) out.push_back(i + 1);
  }
  return out;
}

/// Sweep diagnostics: k[r] is the subset-size offset at which the minimum was
/// taken for the hypothesis of descending-sorted rank r+1. Non-increasing in
/// the rank by construction.
struct HolmTrace {
  std::vector<int> k;
};

/// Adjusted e-values e_i* = min_{I containing i} |I|^{-1} sum_{j in I} e_j,
/// returned in original index order. The running average is updated
/// incrementally and recomputed from the suffix sums every 4096 changes to
/// cap floating-point drift.
inline AdjustedResult holm_adjusted(const EValueVector& e, double alpha,
                                    HolmTrace* trace = nullptr) {
  if (std::isnan(alpha) || !(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(errc::invalid_input, "alpha must lie in (0, 1)");
  }
  const int n = e.size();
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return e[a] > e[b]; });  // descending, ties by index

  // sorted[r] = e_(r+1); suffix[k] = E_k = sum of the k smallest values.
  std::vector<double> sorted(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) sorted[static_cast<std::size_t>(r)] = e[order[static_cast<std::size_t>(r)]];
  int inf_count = 0;
  while (inf_count < n && std::isinf(sorted[static_cast<std::size_t>(inf_count)])) ++inf_count;

  std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) {
    suffix[static_cast<std::size_t>(k)] =
        suffix[static_cast<std::size_t>(k - 1)] + sorted[static_cast<std::size_t>(n - k)];
  }

  std::vector<double> by_rank(static_cast<std::size_t>(n), 0.0);
  std::vector<int> k_by_rank(static_cast<std::size_t>(n), 0);
  int k = 0;
  double running = 0.0;
  long long changes = 0;
  const auto recompute = [&](int rank) {
    running = (sorted[static_cast<std::size_t>(rank)] + suffix[static_cast<std::size_t>(k)]) /
              static_cast<double>(k + 1);
  };

  for (int rank = n - 1; rank >= inf_count; --rank) {
    if (rank == n - 1) {
      running = sorted[static_cast<std::size_t>(rank)];
    } else {
      running += (sorted[static_cast<std::size_t>(rank)] - sorted[static_cast<std::size_t>(rank + 1)]) /
                 static_cast<double>(1 + k);
      if ((++changes & 4095) == 0) recompute(rank);
    }
    // Fold in the next-smallest value while it lowers the average. The
    // k < n - 1 - rank guard only shields against rounding: exact arithmetic
    // never trips the comparison at that boundary.
    while (k < n - 1 - rank && running > sorted[static_cast<std::size_t>(n - 1 - k)]) {
      running = (static_cast<double>(1 + k) * running + sorted[static_cast<std::size_t>(n - 1 - k)]) /
                static_cast<double>(2 + k);
      ++k;
      if ((++changes & 4095) == 0) recompute(rank);
    }
    by_rank[static_cast<std::size_t>(rank)] = running;
    k_by_rank[static_cast<std::size_t>(rank)] = k;
  }
  for (int rank = inf_count - 1; rank >= 0; --rank) {
    by_rank[static_cast<std::size_t>(rank)] = std::numeric_limits<double>::infinity();
    k_by_rank[static_cast<std::size_t>(rank)] = k;
  }

  std::vector<double> adjusted(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    adjusted[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] =
        by_rank[static_cast<std::size_t>(r)];
  }
  if (trace != nullptr) trace->k = std::move(k_by_rank);
  return AdjustedResult::from_adjusted(std::move(adjusted), alpha);
}

}  // namespace efwer
