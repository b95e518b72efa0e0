#pragma once

// Core domain types for e-value based family-wise error rate control:
// per-hypothesis e-values, alpha budgets, weighted transition graphs and
// adjusted e-value results.
//
// Node ids are 1-based in every public interface. Adjacency structures use
// 0-based indices and say so where exposed.

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace efwer {

inline constexpr const char* kVersion = "0.1.0";

enum class errc {
  negative_e_value,
  budget_overflow,
  row_sum_exceeds_one,
  bad_node_id,
  cycle,
  too_large,
  not_ildag,
  singular_system,
  incomplete_block,
  method_mismatch,
  invalid_input,
};

class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

class CycleError : public Error {
 public:
  CycleError(std::vector<int> cycle, const std::string& what)
      : Error(errc::cycle, what), cycle_(std::move(cycle)) {}

  /// One witness cycle as 1-based node ids in forward edge order.
  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<int> cycle_;
};

class NotIldagError : public Error {
 public:
  NotIldagError(int index, std::vector<int> cycle, const std::string& what)
      : Error(errc::not_ildag, what), index_(index), cycle_(std::move(cycle)) {}

  int index() const noexcept { return index_; }  // failing target, 1-based
  const std::vector<int>& cycle() const noexcept { return cycle_; }

 private:
  int index_;
  std::vector<int> cycle_;
};

// Product with the 0 * inf = 0 convention: a weight or budget of exactly zero
// contributes nothing even against an infinite e-value.
inline double mul0(double a, double b) {
  if (a == 0.0 || b == 0.0) return 0.0;
  return a * b;
}

/// Nonnegative evidence values, one per hypothesis. Infinite values are
/// allowed and propagate by extended-real arithmetic.
class EValueVector {
 public:
  explicit EValueVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(errc::invalid_input, "e-value vector needs at least one hypothesis");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (std::isnan(values_[i]) || values_[i] < 0.0) {
        throw Error(errc::negative_e_value,
                    "e-value for hypothesis " + std::to_string(i + 1) + " must be >= 0");
      }
    }
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i0) const { return values_[static_cast<std::size_t>(i0)]; }  // 0-based
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// p-values in [0, 1], one per hypothesis.
class PValueVector {
 public:
  explicit PValueVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
      throw Error(errc::invalid_input, "p-value vector needs at least one hypothesis");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (std::isnan(values_[i]) || values_[i] < 0.0 || values_[i] > 1.0) {
        throw Error(errc::invalid_input,
                    "p-value for hypothesis " + std::to_string(i + 1) + " must lie in [0, 1]");
      }
    }
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  double operator[](int i0) const { return values_[static_cast<std::size_t>(i0)]; }  // 0-based
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

/// Global level alpha together with the initial per-hypothesis allocation.
/// Budgets may sum to strictly less than alpha (slack is dead budget) unless
/// strict mode is requested.
class AlphaBudget {
 public:
  AlphaBudget(double alpha, std::vector<double> budgets, bool strict = false)
      : alpha_(alpha), budgets_(std::move(budgets)) {
    if (std::isnan(alpha_) || !(alpha_ > 0.0) || !(alpha_ < 1.0)) {
      throw Error(errc::invalid_input, "alpha must lie in (0, 1)");
    }
    if (budgets_.empty()) {
      throw Error(errc::invalid_input, "budget vector needs at least one hypothesis");
    }
    // Compensated summation: one million equal shares of alpha must not trip
    // the overflow check through accumulated rounding.
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t i = 0; i < budgets_.size(); ++i) {
      if (std::isnan(budgets_[i]) || budgets_[i] < 0.0 || std::isinf(budgets_[i])) {
        throw Error(errc::invalid_input,
                    "budget for hypothesis " + std::to_string(i + 1) + " must be finite and >= 0");
      }
      const double y = budgets_[i] - carry;
      const double t = sum + y;
      carry = (t - sum) - y;
      sum = t;
    }
    const double tol = 1e-12 * alpha_;
    if (sum > alpha_ + tol) {
      throw Error(errc::budget_overflow, "budgets sum to " + std::to_string(sum) +
                                             " which exceeds alpha = " + std::to_string(alpha_));
    }
    if (strict && std::fabs(sum - alpha_) > tol) {
      throw Error(errc::budget_overflow, "strict mode: budgets must sum to alpha exactly");
    }
  }

  double alpha() const noexcept { return alpha_; }
  int size() const noexcept { return static_cast<int>(budgets_.size()); }
  double operator[](int i0) const { return budgets_[static_cast<std::size_t>(i0)]; }  // 0-based
  const std::vector<double>& budgets() const noexcept { return budgets_; }

 private:
  double alpha_;
  std::vector<double> budgets_;
};

/// Directed edge with a positive transition weight; ids are 1-based.
struct Edge {
  int from = 0;
  int to = 0;
  double q = 0.0;
};

/// Weighted transition graph over hypotheses plus the alpha budget. Rows may
/// be substochastic; the missing mass implicitly flows to an absorbing sink.
/// Parallel edges merge by summing their weights.
class GraphSpec {
 public:
  GraphSpec(int n, std::vector<Edge> edges, AlphaBudget budget)
      : n_(n), budget_(std::move(budget)) {
    if (n_ < 1) throw Error(errc::invalid_input, "graph needs at least one node");
    if (budget_.size() != n_) {
      throw Error(errc::invalid_input, "budget size does not match node count");
    }
    std::map<std::pair<int, int>, double> merged;
    for (const Edge& ed : edges) {
      if (ed.from < 1 || ed.from > n_ || ed.to < 1 || ed.to > n_) {
        throw Error(errc::bad_node_id, "edge (" + std::to_string(ed.from) + " -> " +
                                           std::to_string(ed.to) + ") uses an id outside 1.." +
                                           std::to_string(n_));
      }
      if (ed.from == ed.to) {
        throw Error(errc::invalid_input, "self-loop at node " + std::to_string(ed.from));
      }
      if (std::isnan(ed.q) || std::isinf(ed.q) || ed.q <= 0.0) {
        throw Error(errc::invalid_input, "edge weight must be finite and > 0");
      }
      merged[{ed.from, ed.to}] += ed.q;
    }
    edges_.reserve(merged.size());
    out_.resize(static_cast<std::size_t>(n_));
    in_.resize(static_cast<std::size_t>(n_));
    std::vector<double> row_sum(static_cast<std::size_t>(n_), 0.0);
    for (const auto& [key, q] : merged) {
      edges_.push_back(Edge{key.first, key.second, q});
      out_[static_cast<std::size_t>(key.first - 1)].emplace_back(key.second - 1, q);
      in_[static_cast<std::size_t>(key.second - 1)].emplace_back(key.first - 1, q);
      row_sum[static_cast<std::size_t>(key.first - 1)] += q;
    }
    for (int j = 0; j < n_; ++j) {
      if (row_sum[static_cast<std::size_t>(j)] > 1.0 + 1e-12) {
        throw Error(errc::row_sum_exceeds_one,
                    "outgoing weights of node " + std::to_string(j + 1) + " sum to " +
                        std::to_string(row_sum[static_cast<std::size_t>(j)]) + " > 1");
      }
    }
  }

  int size() const noexcept { return n_; }
  double alpha() const noexcept { return budget_.alpha(); }
  const AlphaBudget& budget() const noexcept { return budget_; }

  /// Merged edges in canonical (from, to) order, 1-based ids.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Children of 0-based node j0 as (child0, weight) pairs.
  const std::vector<std::pair<int, double>>& out(int j0) const {
    return out_[static_cast<std::size_t>(j0)];
  }

  /// Parents of 0-based node j0 as (parent0, weight) pairs.
  const std::vector<std::pair<int, double>>& parents_of(int j0) const {
    return in_[static_cast<std::size_t>(j0)];
  }

 private:
  int n_;
  AlphaBudget budget_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> out_;
  std::vector<std::vector<std::pair<int, double>>> in_;
};

/// Adjusted e-values e_i* with the alpha-scaled form m_i = alpha * e_i*.
/// The hypothesis H_i is rejected at level alpha iff e_i* >= 1/alpha.
struct AdjustedResult {
  std::vector<double> adjusted;
  std::vector<double> m;
  /// Minimizing subsets per hypothesis (1-based, sorted) when the algorithm
  /// recovers them.
  std::optional<std::vector<std::vector<int>>> argmin_subsets;

  static AdjustedResult from_adjusted(std::vector<double> e_star, double alpha) {
    AdjustedResult r;
    r.m.reserve(e_star.size());
    for (double v : e_star) r.m.push_back(alpha * v);
    r.adjusted = std::move(e_star);
    return r;
  }

  static AdjustedResult from_m(std::vector<double> m_values, double alpha) {
    AdjustedResult r;
    r.adjusted.reserve(m_values.size());
    for (double v : m_values) r.adjusted.push_back(v / alpha);
    r.m = std::move(m_values);
    return r;
  }

  /// 1-based ids with e_i* >= 1/alpha, ascending.
  std::vector<int> rejections(double alpha) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < adjusted.size(); ++i) {
      if (adjusted[i] >= 1.0 / alpha) out.push_back(static_cast<int>(i + 1));
    }
    return out;
  }
};

/// An e-value vector paired with a graph of matching size.
struct ValidatedProblem {
  EValueVector evalues;
  GraphSpec graph;
};

/// Cross-checks the pair; both components validate themselves on
/// construction, so validating an already validated problem is a no-op.
inline ValidatedProblem validate_problem(EValueVector e, GraphSpec g) {
  if (e.size() != g.size()) {
    throw Error(errc::invalid_input, "e-value count " + std::to_string(e.size()) +
                                         " does not match node count " + std::to_string(g.size()));
  }
  return ValidatedProblem{std::move(e), std::move(g)};
}

}  // namespace efwer
