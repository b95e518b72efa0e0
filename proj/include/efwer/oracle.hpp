#pragma once

// Exact but exponential-time closed testing. Local-test weights come from
// absorbing-chain hitting probabilities, so arbitrary (possibly cyclic)
// substochastic graphs are supported. This module is the ground truth the
// fast algorithms are verified against.

#include <algorithm>
#include <limits>
#include <vector>

#include "efwer/graph.hpp"
#include "efwer/linalg.hpp"
#include "efwer/types.hpp"

namespace efwer {

/// A subset I with its local-test weights and statistics.
struct LocalTest {
  std::vector<int> subset;      // 1-based, ascending
  std::vector<double> weights;  // aligned with subset, w_i(I)
  double e_value = std::numeric_limits<double>::quiet_NaN();
  double p_reject_stat = std::numeric_limits<double>::quiet_NaN();  // min_i p_i / w_i(I)
};

namespace detail {

inline std::vector<int> canonical_subset(const GraphSpec& g, std::vector<int> subset) {
  std::sort(subset.begin(), subset.end());
  subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
  if (subset.empty()) throw Error(errc::invalid_input, "subset must be nonempty");
  for (int id : subset) {
    if (id < 1 || id > g.size()) {
      throw Error(errc::bad_node_id,
                  "subset id " + std::to_string(id) + " outside 1.." + std::to_string(g.size()));
    }
  }
  return subset;
}

}  // namespace detail

/// Hitting-probability weights w_i(I): the chance that the random walk
/// started from the budget distribution first meets I (as opposed to the
/// sink) at H_i. Weights are aligned with the canonically sorted subset.
inline std::vector<double> hitting_weights(const GraphSpec& g, std::vector<int> subset) {
  subset = detail::canonical_subset(g, std::move(subset));
  const int n = g.size();
  const double alpha = g.alpha();

  std::vector<char> in_subset(static_cast<std::size_t>(n), 0);
  for (int id : subset) in_subset[static_cast<std::size_t>(id - 1)] = 1;
  std::vector<int> transient;  // 0-based
  std::vector<int> t_index(static_cast<std::size_t>(n), -1);
  for (int j = 0; j < n; ++j) {
    if (!in_subset[static_cast<std::size_t>(j)]) {
      t_index[static_cast<std::size_t>(j)] = static_cast<int>(transient.size());
      transient.push_back(j);
    }
  }

  std::vector<double> weights(subset.size(), 0.0);
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  for (std::size_t s = 0; s < subset.size(); ++s) {
    const int i0 = subset[s] - 1;

    // Transient states that can reach i through the complement; all other
    // transient states hit I elsewhere or wander to the sink, so h = 0 there.
    // Restricting the solve keeps the system nonsingular.
    std::vector<char> reach(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    for (const auto& [p, q] : g.parents_of(i0)) {
      (void)q;
      if (!in_subset[static_cast<std::size_t>(p)] && !reach[static_cast<std::size_t>(p)]) {
        reach[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
    std::vector<int> sys;  // 0-based transient nodes in the restricted system
    while (!stack.empty()) {
      const int j = stack.back();
      stack.pop_back();
      sys.push_back(j);
      for (const auto& [p, q] : g.parents_of(j)) {
        (void)q;
        if (!in_subset[static_cast<std::size_t>(p)] && !reach[static_cast<std::size_t>(p)]) {
          reach[static_cast<std::size_t>(p)] = 1;
          stack.push_back(p);
        }
      }
    }
    std::vector<int> sys_index(static_cast<std::size_t>(n), -1);
    for (std::size_t r = 0; r < sys.size(); ++r) {
      sys_index[static_cast<std::size_t>(sys[r])] = static_cast<int>(r);
    }

    const int m = static_cast<int>(sys.size());
    for (int j : transient) h[static_cast<std::size_t>(j)] = 0.0;
    if (m > 0) {
      // (Id - Q_RR) h = q_{., i} over the restricted transient set R.
      std::vector<double> a(static_cast<std::size_t>(m) * static_cast<std::size_t>(m), 0.0);
      std::vector<double> rhs(static_cast<std::size_t>(m), 0.0);
      for (int r = 0; r < m; ++r) {
        a[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) + static_cast<std::size_t>(r)] = 1.0;
        for (const auto& [k, q] : g.out(sys[static_cast<std::size_t>(r)])) {
          if (k == i0) {
            rhs[static_cast<std::size_t>(r)] += q;
          } else if (sys_index[static_cast<std::size_t>(k)] >= 0) {
            a[static_cast<std::size_t>(r) * static_cast<std::size_t>(m) +
              static_cast<std::size_t>(sys_index[static_cast<std::size_t>(k)])] -= q;
          }
        }
      }
      const std::vector<double> sol = solve_dense(std::move(a), std::move(rhs), m);
      for (int r = 0; r < m; ++r) h[static_cast<std::size_t>(sys[static_cast<std::size_t>(r)])] =
          sol[static_cast<std::size_t>(r)];
    }

    double w = g.budget()[i0];
    for (int j : transient) w += mul0(g.budget()[j], h[static_cast<std::size_t>(j)]);
    weights[s] = w / alpha;
  }
  return weights;
}

inline LocalTest make_local_test(const GraphSpec& g, std::vector<int> subset) {
  LocalTest lt;
  lt.subset = detail::canonical_subset(g, std::move(subset));
  lt.weights = hitting_weights(g, lt.subset);
  return lt;
}

/// Weighted e-Bonferroni statistic e_I = sum_i w_i(I) e_i; the local test
/// rejects H_I at level alpha iff e_I >= 1/alpha. Stores the value in lt.
inline double e_local(const EValueVector& e, LocalTest& lt) {
  double acc = 0.0;
  for (std::size_t s = 0; s < lt.subset.size(); ++s) {
    acc += mul0(lt.weights[s], e[lt.subset[s] - 1]);
  }
  lt.e_value = acc;
  return acc;
}

/// Weighted p-Bonferroni statistic min_i p_i / w_i(I), with 0/0 = 0 and
/// p/0 = +inf. Stores the value in lt.
inline double p_reject_stat(const PValueVector& p, LocalTest& lt) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < lt.subset.size(); ++s) {
    const double pv = p[lt.subset[s] - 1];
    const double w = lt.weights[s];
    double ratio;
    if (w > 0.0) {
      ratio = pv / w;
    } else {
      ratio = (pv == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    }
    best = std::min(best, ratio);
  }
  lt.p_reject_stat = best;
  return best;
}

struct OracleOptions {
  int max_n = 25;           // subset-enumeration guard
  bool record_argmin = true;
};

namespace detail {

template <class PerSubset>
inline void for_each_subset(const GraphSpec& g, int max_n, PerSubset&& body) {
  const int n = g.size();
  if (n > max_n) {
    throw Error(errc::too_large, "n = " + std::to_string(n) +
                                     " exceeds the oracle enumeration guard of " +
                                     std::to_string(max_n));
  }
  std::vector<int> subset;
  subset.reserve(static_cast<std::size_t>(n));
  const unsigned long long total = 1ULL << n;
  for (unsigned long long ord = 0; ord < total; ++ord) {
    const unsigned long long mask = ord ^ (ord >> 1);  // Gray-code walk
    if (mask == 0) continue;
    subset.clear();
    for (int b = 0; b < n; ++b) {
      if (mask >> b & 1ULL) subset.push_back(b + 1);
    }
    body(subset);
  }
}

}  // namespace detail

/// Adjusted e-values by full closure: e_i* = min over I containing i of e_I,
/// enumerating every subset. Ties in the argmin break to the
/// lexicographically smallest subset, independent of enumeration order.
inline AdjustedResult brute_force_adjusted_e(const EValueVector& e, const GraphSpec& g,
                                             const OracleOptions& opt = {}) {
  validate_problem(e, g);
  const int n = g.size();
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<std::vector<int>> best_subset(static_cast<std::size_t>(n));

  detail::for_each_subset(g, opt.max_n, [&](const std::vector<int>& subset) {
    const std::vector<double> w = hitting_weights(g, subset);
    double val = 0.0;
    for (std::size_t s = 0; s < subset.size(); ++s) val += mul0(w[s], e[subset[s] - 1]);
    for (int id : subset) {
      const std::size_t i = static_cast<std::size_t>(id - 1);
      if (val < best[i] ||
          (val == best[i] && std::lexicographical_compare(subset.begin(), subset.end(),
                                                          best_subset[i].begin(),
                                                          best_subset[i].end()))) {
        best[i] = val;
        best_subset[i] = subset;
      }
    }
  });

  AdjustedResult res = AdjustedResult::from_adjusted(std::move(best), g.alpha());
  if (opt.record_argmin) res.argmin_subsets = std::move(best_subset);
  return res;
}

/// Closure of weighted p-Bonferroni local tests: H_i is rejected iff every
/// subset containing i has some j with p_j <= alpha * w_j(I).
inline std::vector<int> brute_force_p_closure(const PValueVector& p, const GraphSpec& g,
                                              double alpha, const OracleOptions& opt = {}) {
  if (p.size() != g.size()) {
    throw Error(errc::invalid_input, "p-value count does not match node count");
  }
  const int n = g.size();
  std::vector<char> alive(static_cast<std::size_t>(n), 1);

  detail::for_each_subset(g, opt.max_n, [&](const std::vector<int>& subset) {
    const std::vector<double> w = hitting_weights(g, subset);
    bool local_reject = false;
    for (std::size_t s = 0; s < subset.size() && !local_reject; ++s) {
      local_reject = p[subset[s] - 1] <= alpha * w[s];
    }
    if (!local_reject) {
      for (int id : subset) alive[static_cast<std::size_t>(id - 1)] = 0;
    }
  });

  std::vector<int> rejected;
  for (int i = 0; i < n; ++i) {
    if (alive[static_cast<std::size_t>(i)]) rejected.push_back(i + 1);
  }
  return rejected;
}

}  // namespace efwer
