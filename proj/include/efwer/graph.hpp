#pragma once

// Graph utilities shared by the algorithm modules: canonical topological
// order, ancestor sets, and builders for the standard graph shapes.

#include <algorithm>
#include <functional>
#include <queue>
#include <vector>

#include "efwer/types.hpp"

namespace efwer {

namespace detail {

// Kahn's algorithm with a min-ordered frontier over the nodes with
// active[v] != 0, following the given 0-based child lists. Produces the
// lexicographically smallest order. When the subgraph is cyclic, `order` is
// partial and `cycle` holds one witness (0-based, forward edge order).
struct Topo0 {
  std::vector<int> order;
  std::vector<int> cycle;
  bool ok = false;
};

inline Topo0 kahn(int n, const std::vector<std::vector<int>>& children,
                  const std::vector<char>& active) {
  Topo0 res;
  std::vector<int> indeg(static_cast<std::size_t>(n), 0);
  int active_count = 0;
  for (int j = 0; j < n; ++j) {
    if (!active[static_cast<std::size_t>(j)]) continue;
    ++active_count;
    for (int k : children[static_cast<std::size_t>(j)]) {
      if (active[static_cast<std::size_t>(k)]) ++indeg[static_cast<std::size_t>(k)];
    }
  }
  std::priority_queue<int, std::vector<int>, std::greater<int>> frontier;
  for (int j = 0; j < n; ++j) {
    if (active[static_cast<std::size_t>(j)] && indeg[static_cast<std::size_t>(j)] == 0) {
      frontier.push(j);
    }
  }
  res.order.reserve(static_cast<std::size_t>(active_count));
  while (!frontier.empty()) {
    const int j = frontier.top();
    frontier.pop();
    res.order.push_back(j);
    for (int k : children[static_cast<std::size_t>(j)]) {
      if (!active[static_cast<std::size_t>(k)]) continue;
      if (--indeg[static_cast<std::size_t>(k)] == 0) frontier.push(k);
    }
  }
  if (static_cast<int>(res.order.size()) == active_count) {
    res.ok = true;
    return res;
  }

  // Extract a witness cycle from the stuck remainder, where every node keeps
  // at least one remaining predecessor. Walk smallest predecessors until a
  // node repeats.
  std::vector<char> remaining(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j) remaining[static_cast<std::size_t>(j)] = active[static_cast<std::size_t>(j)];
  for (int j : res.order) remaining[static_cast<std::size_t>(j)] = 0;
  std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (!remaining[static_cast<std::size_t>(j)]) continue;
    for (int k : children[static_cast<std::size_t>(j)]) {
      if (remaining[static_cast<std::size_t>(k)]) preds[static_cast<std::size_t>(k)].push_back(j);
    }
  }
  int start = -1;
  for (int j = 0; j < n && start < 0; ++j) {
    if (remaining[static_cast<std::size_t>(j)]) start = j;
  }
  std::vector<int> path;
  std::vector<int> pos(static_cast<std::size_t>(n), -1);
  int cur = start;
  while (pos[static_cast<std::size_t>(cur)] < 0) {
    pos[static_cast<std::size_t>(cur)] = static_cast<int>(path.size());
    path.push_back(cur);
    cur = *std::min_element(preds[static_cast<std::size_t>(cur)].begin(),
                            preds[static_cast<std::size_t>(cur)].end());
  }
  // path[pos(cur)..] walked along reversed edges; flip it for edge order.
  res.cycle.assign(path.begin() + pos[static_cast<std::size_t>(cur)], path.end());
  std::reverse(res.cycle.begin(), res.cycle.end());
  const auto smallest = std::min_element(res.cycle.begin(), res.cycle.end());
  std::rotate(res.cycle.begin(), smallest, res.cycle.end());
  return res;
}

inline std::vector<std::vector<int>> child_lists(const GraphSpec& g) {
  std::vector<std::vector<int>> children(static_cast<std::size_t>(g.size()));
  for (int j = 0; j < g.size(); ++j) {
    for (const auto& [k, q] : g.out(j)) {
      (void)q;
      children[static_cast<std::size_t>(j)].push_back(k);
    }
  }
  return children;
}

}  // namespace detail

struct TopoResult {
  std::vector<int> order;  // 1-based permutation when ok
  std::vector<int> cycle;  // 1-based witness when cyclic
  bool ok = false;
};

/// Canonical (lexicographically smallest) topological order, or a witness
/// cycle when the graph is cyclic.
inline TopoResult try_topological_order(const GraphSpec& g) {
  const std::vector<char> all(static_cast<std::size_t>(g.size()), 1);
  detail::Topo0 t = detail::kahn(g.size(), detail::child_lists(g), all);
  TopoResult res;
  res.ok = t.ok;
  res.order.reserve(t.order.size());
  for (int j : t.order) res.order.push_back(j + 1);
  res.cycle.reserve(t.cycle.size());
  for (int j : t.cycle) res.cycle.push_back(j + 1);
  return res;
}

inline std::vector<int> topological_order(const GraphSpec& g) {
  TopoResult t = try_topological_order(g);
  if (!t.ok) {
    std::string msg = "graph is cyclic; witness cycle:";
    for (int id : t.cycle) msg += " " + std::to_string(id);
    throw CycleError(t.cycle, msg);
  }
  return t.order;
}

/// Nodes with a directed path to i, plus i itself; 1-based, ascending.
inline std::vector<int> ancestor_set(const GraphSpec& g, int i) {
  if (i < 1 || i > g.size()) {
    throw Error(errc::bad_node_id, "node id " + std::to_string(i) + " outside 1.." +
                                       std::to_string(g.size()));
  }
  std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
  std::vector<int> stack{i - 1};
  seen[static_cast<std::size_t>(i - 1)] = 1;
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (const auto& [p, q] : g.parents_of(j)) {
      (void)q;
      if (!seen[static_cast<std::size_t>(p)]) {
        seen[static_cast<std::size_t>(p)] = 1;
        stack.push_back(p);
      }
    }
  }
  std::vector<int> out;
  for (int j = 0; j < g.size(); ++j) {
    if (seen[static_cast<std::size_t>(j)]) out.push_back(j + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Builders for the standard shapes.
// ---------------------------------------------------------------------------

/// Complete graph with uniform transitions q = 1/(n-1) and budgets alpha/n.
/// Closing its local tests reproduces the Holm weighting w_i(I) = 1/|I|.
inline GraphSpec complete_uniform_graph(int n, double alpha) {
  if (n < 1) throw Error(errc::invalid_input, "need n >= 1");
  std::vector<Edge> edges;
  if (n > 1) {
    const double q = 1.0 / static_cast<double>(n - 1);
    for (int j = 1; j <= n; ++j) {
      for (int k = 1; k <= n; ++k) {
        if (j != k) edges.push_back(Edge{j, k, q});
      }
    }
  }
  return GraphSpec(n, std::move(edges),
                   AlphaBudget(alpha, std::vector<double>(static_cast<std::size_t>(n),
                                                          alpha / static_cast<double>(n))));
}

/// Chain 1 -> 2 -> ... -> n with q = 1 (the fallback procedure's graph).
inline GraphSpec chain_graph(std::vector<double> budgets, double alpha) {
  const int n = static_cast<int>(budgets.size());
  std::vector<Edge> edges;
  for (int j = 1; j < n; ++j) edges.push_back(Edge{j, j + 1, 1.0});
  return GraphSpec(n, std::move(edges), AlphaBudget(alpha, std::move(budgets)));
}

/// Chain plus the wrap-around edge n -> 1, so excluded budget keeps cycling.
inline GraphSpec cyclical_fallback_graph(std::vector<double> budgets, double alpha) {
  const int n = static_cast<int>(budgets.size());
  if (n < 2) throw Error(errc::invalid_input, "cyclical fallback needs n >= 2");
  std::vector<Edge> edges;
  for (int j = 1; j < n; ++j) edges.push_back(Edge{j, j + 1, 1.0});
  edges.push_back(Edge{n, 1, 1.0});
  return GraphSpec(n, std::move(edges), AlphaBudget(alpha, std::move(budgets)));
}

/// Two-endpoint gatekeeper: primaries H1, H2 feed secondaries H3, H4, which
/// recycle budget between themselves. Budgets alpha/2 on the primaries.
inline GraphSpec gatekeeper_graph(double alpha, double q13 = 1.0, double q24 = 1.0,
                                  double q34 = 1.0, double q43 = 1.0) {
  std::vector<Edge> edges{{1, 3, q13}, {2, 4, q24}, {3, 4, q34}, {4, 3, q43}};
  return GraphSpec(4, std::move(edges),
                   AlphaBudget(alpha, {alpha / 2.0, alpha / 2.0, 0.0, 0.0}));
}

}  // namespace efwer
