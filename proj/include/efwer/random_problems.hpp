#pragma once

// Seeded random instance generators shared by the verification command, the
// benchmark command, and the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "efwer/seqsim.hpp"
#include "efwer/types.hpp"

namespace efwer {

/// Heavy-tailed e-values centered near the rejection scale 1/(2 alpha):
/// exp(2 Z) * 1/(2 alpha), with a 5% mass at exactly zero.
inline EValueVector random_evalues(int n, double alpha, RngStream& rng) {
  std::vector<double> e(static_cast<std::size_t>(n), 0.0);
  for (double& v : e) {
    if (rng.uniform01() < 0.05) {
      v = 0.0;
    } else {
      v = std::exp(2.0 * rng.gaussian()) / (2.0 * alpha);
    }
  }
  return EValueVector(std::move(e));
}

/// Budgets summing to at most alpha: random positive shares, occasionally
/// zeroed entries, and a random overall deficit about a third of the time.
inline AlphaBudget random_budget(int n, double alpha, RngStream& rng) {
  std::vector<double> b(static_cast<std::size_t>(n), 0.0);
  double sum = 0.0;
  for (double& v : b) {
    v = (rng.uniform01() < 0.15) ? 0.0 : -std::log(1.0 - rng.uniform01());
    sum += v;
  }
  if (sum == 0.0) {
    b[0] = 1.0;
    sum = 1.0;
  }
  double scale = alpha / sum;
  if (rng.uniform01() < 0.3) scale *= 0.5 + 0.5 * rng.uniform01();  // deficit
  for (double& v : b) v *= scale;
  return AlphaBudget(alpha, std::move(b));
}

/// Random DAG: a random permutation serves as the topological order, each
/// forward pair gets an edge with probability edge_prob, and every row is
/// scaled to a random total in (0, 1].
inline GraphSpec random_dag(int n, double alpha, RngStream& rng, double edge_prob = 0.4) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<Edge> edges;
  for (int a = 0; a < n; ++a) {
    std::vector<double> raw;
    std::vector<int> to;
    for (int b = a + 1; b < n; ++b) {
      if (rng.uniform01() < edge_prob) {
        to.push_back(perm[static_cast<std::size_t>(b)]);
        raw.push_back(0.05 + 0.95 * rng.uniform01());
      }
    }
    if (to.empty()) continue;
    const double row_total = 0.2 + 0.8 * rng.uniform01();
    const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (std::size_t k = 0; k < to.size(); ++k) {
      edges.push_back(Edge{perm[static_cast<std::size_t>(a)], to[k], raw[k] * row_total / raw_sum});
    }
  }
  return GraphSpec(n, std::move(edges), random_budget(n, alpha, rng));
}

/// Random directed graph, cycles allowed, rows substochastic (a fifth of the
/// rows sum to exactly one).
inline GraphSpec random_graph(int n, double alpha, RngStream& rng, double edge_prob = 0.35) {
  std::vector<Edge> edges;
  for (int a = 1; a <= n; ++a) {
    std::vector<double> raw;
    std::vector<int> to;
    for (int b = 1; b <= n; ++b) {
      if (a != b && rng.uniform01() < edge_prob) {
        to.push_back(b);
        raw.push_back(0.05 + 0.95 * rng.uniform01());
      }
    }
    if (to.empty()) continue;
    const double row_total = rng.uniform01() < 0.2 ? 1.0 : 0.2 + 0.75 * rng.uniform01();
    const double raw_sum = std::accumulate(raw.begin(), raw.end(), 0.0);
    for (std::size_t k = 0; k < to.size(); ++k) {
      edges.push_back(Edge{a, to[k], raw[k] * row_total / raw_sum});
    }
  }
  return GraphSpec(n, std::move(edges), random_budget(n, alpha, rng));
}

}  // namespace efwer
