#pragma once

// Adjusted e-values for the e-graphical approach on a DAG, plus the
// index-local DAG (ILDAG) extension that also covers cyclical fallback and
// two-endpoint gatekeeper graphs.
//
// For each target i the engine walks the ancestors of i from the back,
// assigning every ancestor j the smaller of its own e-value and the weighted
// sum of its children's assignments; the target's adjusted value is the
// budget-weighted total of these assignments.

#include <algorithm>
#include <optional>
#include <utility>
#include <vector>

#include "efwer/graph.hpp"
#include "efwer/types.hpp"

namespace efwer {

struct DagStats {
  long long node_visits = 0;
  long long edge_visits = 0;
};

namespace detail {

// Shared backward-propagation engine. orders[i0] lists the 0-based nodes of
// the target's ancestor set, target first, every node after all of its
// in-set children. A scratch value array is reused across targets and reset
// by bumping an epoch stamp instead of clearing.
inline AdjustedResult propagate_assignments(const GraphSpec& g,
                                            const std::vector<std::vector<int>>& orders,
                                            const EValueVector& e, DagStats* stats) {
  const int n = g.size();
  std::vector<double> value(static_cast<std::size_t>(n), 0.0);
  std::vector<int> stamp(static_cast<std::size_t>(n), -1);
  std::vector<char> took_own(static_cast<std::size_t>(n), 0);
  std::vector<double> m(static_cast<std::size_t>(n), 0.0);
  std::vector<std::vector<int>> argmin(static_cast<std::size_t>(n));
  long long node_visits = 0;
  long long edge_visits = 0;

  for (int i0 = 0; i0 < n; ++i0) {
    const std::vector<int>& order = orders[static_cast<std::size_t>(i0)];
    const int epoch = i0;
    double acc = 0.0;
    for (int j : order) {
      ++node_visits;
      double assigned;
      if (j == i0) {
        assigned = e[j];
        took_own[static_cast<std::size_t>(j)] = 1;
      } else {
        double child_sum = 0.0;
        for (const auto& [k, q] : g.out(j)) {
          ++edge_visits;
          if (stamp[static_cast<std::size_t>(k)] == epoch) {
            child_sum += q * value[static_cast<std::size_t>(k)];
          }
        }
        took_own[static_cast<std::size_t>(j)] = e[j] <= child_sum;
        assigned = took_own[static_cast<std::size_t>(j)] ? e[j] : child_sum;
      }
      value[static_cast<std::size_t>(j)] = assigned;
      stamp[static_cast<std::size_t>(j)] = epoch;
      acc += mul0(g.budget()[j], assigned);
    }
    m[static_cast<std::size_t>(i0)] = acc;
    std::vector<int>& sub = argmin[static_cast<std::size_t>(i0)];
    for (int j : order) {
      if (took_own[static_cast<std::size_t>(j)]) sub.push_back(j + 1);
    }
    std::sort(sub.begin(), sub.end());
  }

  if (stats != nullptr) {
    stats->node_visits = node_visits;
    stats->edge_visits = edge_visits;
  }
  AdjustedResult res = AdjustedResult::from_m(std::move(m), g.alpha());
  res.argmin_subsets = std::move(argmin);
  return res;
}

}  // namespace detail

/// Solver for acyclic graphs. Construction computes the canonical
/// topological order and per-target ancestor traversals once; adjusted() can
/// then be called repeatedly (e.g. per simulation step).
class DagSolver {
 public:
  explicit DagSolver(GraphSpec g) : g_(std::move(g)) {
    topo_ = topological_order(g_);  // throws CycleError on cyclic input
    std::vector<int> pos(static_cast<std::size_t>(g_.size()), 0);
    for (std::size_t r = 0; r < topo_.size(); ++r) pos[static_cast<std::size_t>(topo_[r] - 1)] = static_cast<int>(r);
    orders_.resize(static_cast<std::size_t>(g_.size()));
    for (int i = 1; i <= g_.size(); ++i) {
      std::vector<int> anc = ancestor_set(g_, i);
      std::vector<int>& order = orders_[static_cast<std::size_t>(i - 1)];
      order.reserve(anc.size());
      for (int id : anc) order.push_back(id - 1);
      // Ancestors precede i topologically, so decreasing position puts the
      // target first and children before parents.
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return pos[static_cast<std::size_t>(a)] > pos[static_cast<std::size_t>(b)];
      });
    }
  }

  const GraphSpec& graph() const noexcept { return g_; }
  const std::vector<int>& topo_order() const noexcept { return topo_; }

  AdjustedResult adjusted(const EValueVector& e, DagStats* stats = nullptr) const {
    validate_problem(e, g_);
    return detail::propagate_assignments(g_, orders_, e, stats);
  }

 private:
  GraphSpec g_;
  std::vector<int> topo_;
  std::vector<std::vector<int>> orders_;
};

inline AdjustedResult dag_adjusted(const EValueVector& e, const GraphSpec& g,
                                   DagStats* stats = nullptr) {
  return DagSolver(g).adjusted(e, stats);
}

struct IldagWitness {
  int index = 0;            // target whose reduced graph stays cyclic, 1-based
  std::vector<int> cycle;   // 1-based, forward edge order
};

namespace detail {

// Reduced graph for target i: ancestors of i only, out-edges of i removed.
// Returns the reversed toposort (target first) or the witness cycle.
struct ReducedTopo {
  std::vector<int> order0;
  std::vector<int> cycle0;
  bool ok = false;
};

inline ReducedTopo reduced_target_topo(const GraphSpec& g,
                                       const std::vector<std::vector<int>>& children, int i0) {
  const int n = g.size();
  std::vector<char> active(static_cast<std::size_t>(n), 0);
  for (int id : ancestor_set(g, i0 + 1)) active[static_cast<std::size_t>(id - 1)] = 1;
  std::vector<std::vector<int>> reduced(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (!active[static_cast<std::size_t>(j)] || j == i0) continue;
    for (int k : children[static_cast<std::size_t>(j)]) {
      if (active[static_cast<std::size_t>(k)]) reduced[static_cast<std::size_t>(j)].push_back(k);
    }
  }
  Topo0 t = kahn(n, reduced, active);
  ReducedTopo res;
  res.ok = t.ok;
  if (t.ok) {
    res.order0.assign(t.order.rbegin(), t.order.rend());
  } else {
    res.cycle0 = std::move(t.cycle);
  }
  return res;
}

}  // namespace detail

/// First target whose reduced graph stays cyclic, or nullopt when the graph
/// is an ILDAG. Every DAG passes trivially.
inline std::optional<IldagWitness> ildag_violation(const GraphSpec& g) {
  const std::vector<std::vector<int>> children = detail::child_lists(g);
  for (int i0 = 0; i0 < g.size(); ++i0) {
    detail::ReducedTopo t = detail::reduced_target_topo(g, children, i0);
    if (!t.ok) {
      IldagWitness w;
      w.index = i0 + 1;
      for (int j : t.cycle0) w.cycle.push_back(j + 1);
      return w;
    }
  }
  return std::nullopt;
}

inline bool is_ildag(const GraphSpec& g) { return !ildag_violation(g).has_value(); }

/// Solver for index-local DAGs: runs the DAG recursion per target on its
/// reduced graph. Construction checks the ILDAG property and caches the
/// per-target traversal orders.
class IldagSolver {
 public:
  explicit IldagSolver(GraphSpec g) : g_(std::move(g)) {
    const std::vector<std::vector<int>> children = detail::child_lists(g_);
    orders_.resize(static_cast<std::size_t>(g_.size()));
    for (int i0 = 0; i0 < g_.size(); ++i0) {
      detail::ReducedTopo t = detail::reduced_target_topo(g_, children, i0);
      if (!t.ok) {
        std::vector<int> cycle;
        for (int j : t.cycle0) cycle.push_back(j + 1);
        std::string msg = "not an ILDAG: reduced graph of node " + std::to_string(i0 + 1) +
                          " keeps a cycle:";
        for (int id : cycle) msg += " " + std::to_string(id);
        throw NotIldagError(i0 + 1, std::move(cycle), msg);
      }
      orders_[static_cast<std::size_t>(i0)] = std::move(t.order0);
    }
  }

  const GraphSpec& graph() const noexcept { return g_; }

  AdjustedResult adjusted(const EValueVector& e, DagStats* stats = nullptr) const {
    validate_problem(e, g_);
    return detail::propagate_assignments(g_, orders_, e, stats);
  }

 private:
  GraphSpec g_;
  std::vector<std::vector<int>> orders_;
};

inline AdjustedResult ildag_adjusted(const EValueVector& e, const GraphSpec& g,
                                     DagStats* stats = nullptr) {
  return IldagSolver(g).adjusted(e, stats);
}

}  // namespace efwer
