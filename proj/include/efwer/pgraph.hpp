#pragma once

// Baseline p-value graphical approach: the consonance-driven sequential
// rejection procedure with hitting-probability weights, plus the inverse-e
// calibrator.

#include <cmath>
#include <limits>
#include <vector>

#include "efwer/oracle.hpp"
#include "efwer/types.hpp"

namespace efwer {

/// Inverse-e calibrator p_i = min(1/e_i, 1); e_i = 0 maps to 1 and an
/// infinite e-value maps to 0.
inline PValueVector e_to_p(const EValueVector& e) {
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(e.size()));
  for (double v : e.values()) {
    if (v == 0.0) {
      p.push_back(1.0);
    } else if (std::isinf(v)) {
      p.push_back(0.0);
    } else {
      p.push_back(std::min(1.0 / v, 1.0));
    }
  }
  return PValueVector(std::move(p));
}

/// One step of the audit trail: the hypothesis removed in this round and its
/// p/w ratio against the then-remaining index set.
struct RejectionRound {
  int rejected = 0;     // 1-based
  double ratio = 0.0;   // p_i / w_i over the remaining set
  double weight = 0.0;  // w_i at the time of rejection
};

/// Greedy p-graphical closure: repeatedly reject the hypothesis with the
/// smallest p_i / w_i ratio among the unrejected set, recomputing weights
/// after every removal, until no remaining ratio clears alpha. By consonance
/// this reaches the same fixed point as the full p-closure.
inline std::vector<int> sequential_rejection(const PValueVector& p, const GraphSpec& g,
                                             double alpha,
                                             std::vector<RejectionRound>* rounds = nullptr) {
  if (p.size() != g.size()) {
    throw Error(errc::invalid_input, "p-value count does not match node count");
  }
  if (std::isnan(alpha) || !(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error(errc::invalid_input, "alpha must lie in (0, 1)");
  }
  const int n = g.size();
  std::vector<char> rejected(static_cast<std::size_t>(n), 0);
  int remaining = n;
  if (rounds != nullptr) rounds->clear();

  while (remaining > 0) {
    std::vector<int> active;
    active.reserve(static_cast<std::size_t>(remaining));
    for (int i = 1; i <= n; ++i) {
      if (!rejected[static_cast<std::size_t>(i - 1)]) active.push_back(i);
    }
    const std::vector<double> w = hitting_weights(g, active);

    int best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    double best_weight = 0.0;
    for (std::size_t s = 0; s < active.size(); ++s) {
      const double pv = p[active[s] - 1];
      const double ratio =
          w[s] > 0.0 ? pv / w[s]
                     : (pv == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best = static_cast<int>(s);
        best_weight = w[s];
      }
    }
    // Eligibility in product form so that w = 0 only passes with p = 0.
    if (best < 0 || p[active[static_cast<std::size_t>(best)] - 1] > alpha * best_weight) {
      break;
    }
    const int id = active[static_cast<std::size_t>(best)];
    rejected[static_cast<std::size_t>(id - 1)] = 1;
    --remaining;
    if (rounds != nullptr) rounds->push_back(RejectionRound{id, best_ratio, best_weight});
  }

  std::vector<int> out;
  for (int i = 1; i <= n; ++i) {
    if (rejected[static_cast<std::size_t>(i - 1)]) out.push_back(i);
  }
  return out;
}

}  // namespace efwer
