#pragma once

// e-Fallback on a chain of hypotheses with per-node budgets. Three
// interchangeable routes: quadratic dynamic programming, reverse search, and
// an amortized-linear stack search. All return m_i = alpha * e_i*.

#include <limits>
#include <utility>
#include <vector>

#include "efwer/types.hpp"

namespace efwer {

struct FallbackStats {
  long long back_steps = 0;  // reverse search: comparisons against earlier e-values
  long long pushes = 0;      // stack search
  long long pops = 0;
};

/// Stack entry: hypothesis index and the alpha-mass currently charged to its
/// e-value. Indices increase and e-values are non-decreasing bottom-to-top.
struct FallbackStackEntry {
  int index = 0;  // 1-based
  double merged_budget = 0.0;
};

namespace detail {

inline void check_fallback_inputs(const EValueVector& e, const AlphaBudget& budget) {
  if (e.size() != budget.size()) {
    throw Error(errc::invalid_input, "e-value count does not match budget count");
  }
}

}  // namespace detail

/// Quadratic DP: m_i = min over j < i of m_j + e_i * (alpha_{j+1} + ... + alpha_i).
/// The chunk sum grows incrementally (compensated, descending j) rather than
/// by prefix differences, whose cancellation would drift away from the other
/// two routes.
inline AdjustedResult fallback_naive(const EValueVector& e, const AlphaBudget& budget) {
  detail::check_fallback_inputs(e, budget);
  const int n = e.size();
  std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 1; i <= n; ++i) {
    const double ei = e[i - 1];
    double chunk = 0.0;
    double carry = 0.0;
    double best = std::numeric_limits<double>::infinity();
    for (int j = i - 1; j >= 0; --j) {
      const double y = budget[j] - carry;  // extend the chunk to (j, i]
      const double t = chunk + y;
      carry = (t - chunk) - y;
      chunk = t;
      const double cand = m[static_cast<std::size_t>(j)] + mul0(chunk, ei);
      if (cand < best) best = cand;
    }
    m[static_cast<std::size_t>(i)] = best;
  }
  m.erase(m.begin());
  return AdjustedResult::from_m(std::move(m), budget.alpha());
}

/// Reverse search: walk back from i to j(i) = max{j < i : e_j <= e_i},
/// charging the passed budgets to e_i. Scan lengths are harmonic in i for
/// exchangeable inputs and quadratic in total on decreasing e-values; the
/// stack search below is the linear-time route.
inline AdjustedResult fallback_reverse(const EValueVector& e, const AlphaBudget& budget,
                                       FallbackStats* stats = nullptr) {
  detail::check_fallback_inputs(e, budget);
  const int n = e.size();
  std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);
  long long back_steps = 0;
  for (int i = 1; i <= n; ++i) {
    const double ei = e[i - 1];
    double acc = mul0(budget[i - 1], ei);
    double carry = 0.0;
    int j = i - 1;
    while (j >= 1) {
      ++back_steps;
      if (e[j - 1] <= ei) break;
      const double y = mul0(budget[j - 1], ei) - carry;
      const double t = acc + y;
      carry = (t - acc) - y;
      acc = t;
      --j;
    }
    m[static_cast<std::size_t>(i)] = acc + m[static_cast<std::size_t>(j)];
  }
  if (stats != nullptr) stats->back_steps = back_steps;
  m.erase(m.begin());
  return AdjustedResult::from_m(std::move(m), budget.alpha());
}

/// Stack search core: entries with e_j > e_i merge their budget into the new
/// entry, so every index is pushed once and popped at most once. The observer
/// is invoked after each step with (i, stack), which tests use to check the
/// stack invariants.
template <class OnStep>
inline AdjustedResult fallback_stack_observed(const EValueVector& e, const AlphaBudget& budget,
                                              OnStep&& on_step, FallbackStats* stats = nullptr) {
  detail::check_fallback_inputs(e, budget);
  const int n = e.size();
  std::vector<double> m(static_cast<std::size_t>(n) + 1, 0.0);
  std::vector<FallbackStackEntry> stack;
  stack.reserve(static_cast<std::size_t>(n));
  long long pushes = 0;
  long long pops = 0;
  for (int i = 1; i <= n; ++i) {
    const double ei = e[i - 1];
    double merged = budget[i - 1];
    double carry = 0.0;
    // Pop while the top holds a strictly larger e-value; stop at equality.
    while (!stack.empty() && e[stack.back().index - 1] > ei) {
      const double y = stack.back().merged_budget - carry;
      const double t = merged + y;
      carry = (t - merged) - y;
      merged = t;
      stack.pop_back();
      ++pops;
    }
    if (stack.empty()) {
      m[static_cast<std::size_t>(i)] = mul0(merged, ei);
    } else {
      m[static_cast<std::size_t>(i)] =
          mul0(merged, ei) + m[static_cast<std::size_t>(stack.back().index)];
    }
    stack.push_back(FallbackStackEntry{i, merged});
    ++pushes;
    on_step(i, stack);
  }
  if (stats != nullptr) {
    stats->pushes = pushes;
    stats->pops = pops;
  }
  m.erase(m.begin());
  return AdjustedResult::from_m(std::move(m), budget.alpha());
}

/// Amortized O(n) stack search.
inline AdjustedResult fallback_stack(const EValueVector& e, const AlphaBudget& budget,
                                     FallbackStats* stats = nullptr) {
  return fallback_stack_observed(
      e, budget, [](int, const std::vector<FallbackStackEntry>&) {}, stats);
}

}  // namespace efwer
