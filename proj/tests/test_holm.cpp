#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "efwer/holm.hpp"
#include "efwer/random_problems.hpp"

#include "test_helpers.hpp"

using namespace efwer;

namespace {

// Direct evaluation of e*_(i) = min_k (e_(i) + E_k) / (k + 1) from the
// definition, quadratic but independent of the sweep.
std::vector<double> holm_adjusted_by_definition(const std::vector<double>& values) {
  const int n = static_cast<int>(values.size());
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) {
    suffix[static_cast<std::size_t>(k)] =
        suffix[static_cast<std::size_t>(k - 1)] + sorted[static_cast<std::size_t>(n - k)];
  }
  std::vector<double> out(values.size(), 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    // rank of values[i] in the sorted order, ties by original index
    int rank = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (values[j] > values[i] || (values[j] == values[i] && j < i)) ++rank;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n - 1 - rank; ++k) {
      best = std::min(best, (values[i] + suffix[static_cast<std::size_t>(k)]) /
                                static_cast<double>(k + 1));
    }
    out[i] = best;
  }
  return out;
}

}  // namespace

TEST_CASE("rejection rule on hand-checked instances") {
  // C = 10, threshold 30.
  CHECK(holm_correction(EValueVector({25.0, 25.0, 10.0}), 0.05) == doctest::Approx(10.0));
  CHECK(holm_reject(EValueVector({25.0, 25.0, 10.0}), 0.05).empty());

  CHECK(holm_correction(EValueVector({50.0, 25.0, 10.0}), 0.05) == doctest::Approx(10.0));
  CHECK(holm_reject(EValueVector({50.0, 25.0, 10.0}), 0.05) == std::vector<int>{1});

  // Boundary e = 1/alpha with a single hypothesis: C = 0, rejected.
  CHECK(holm_correction(EValueVector({20.0}), 0.05) == 0.0);
  CHECK(holm_reject(EValueVector({20.0}), 0.05) == std::vector<int>{1});
}

TEST_CASE("adjusted e-values on hand-checked instances") {
  AdjustedResult r = holm_adjusted(EValueVector({50.0, 25.0, 10.0}), 0.05);
  CHECK(r.adjusted[0] == doctest::Approx(85.0 / 3.0).epsilon(1e-13));  // (50 + 35) / 3
  CHECK(r.adjusted[1] == 17.5);                                        // (25 + 10) / 2
  CHECK(r.adjusted[2] == 10.0);
  CHECK(r.m[1] == doctest::Approx(0.05 * 17.5));

  AdjustedResult r2 = holm_adjusted(EValueVector({25.0, 25.0, 10.0}), 0.05);
  CHECK(r2.adjusted[0] == 17.5);
  CHECK(r2.adjusted[1] == 17.5);
  CHECK(r2.adjusted[2] == 10.0);

  // Equal values average to themselves.
  AdjustedResult r3 = holm_adjusted(EValueVector({3.0, 3.0, 3.0, 3.0}), 0.1);
  for (double v : r3.adjusted) CHECK(v == 3.0);
}

TEST_CASE("sweep agrees with the definition and rejections stay consistent") {
  for (int trial = 0; trial < 60; ++trial) {
    RngStream rng(31, trial);
    const int n = 1 + static_cast<int>(rng.next_u64() % 40);
    const double alpha = 0.01 + 0.2 * rng.uniform01();
    EValueVector e = random_evalues(n, alpha, rng);

    HolmTrace trace;
    const AdjustedResult swept = holm_adjusted(e, alpha, &trace);
    const std::vector<double> direct = holm_adjusted_by_definition(e.values());
    for (int i = 0; i < n; ++i) {
      CHECK(testref::rel_err(swept.adjusted[static_cast<std::size_t>(i)],
                             direct[static_cast<std::size_t>(i)]) < 1e-12);
    }

    // {i : e_i* >= 1/alpha} is exactly the thresholding rejection set.
    CHECK(swept.rejections(alpha) == holm_reject(e, alpha));

    // k_i never increases with the rank.
    for (std::size_t r = 1; r < trace.k.size(); ++r) CHECK(trace.k[r - 1] >= trace.k[r]);
  }
}

TEST_CASE("suffix averages E_k / k never decrease in k") {
  for (int trial = 0; trial < 20; ++trial) {
    RngStream rng(35, trial);
    const int n = 2 + static_cast<int>(rng.next_u64() % 30);
    EValueVector e = random_evalues(n, 0.05, rng);
    std::vector<double> sorted = e.values();
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double suffix = 0.0;
    double prev_avg = 0.0;
    for (int k = 1; k <= n; ++k) {
      suffix += sorted[static_cast<std::size_t>(n - k)];
      const double avg = suffix / k;
      if (k > 1) CHECK(avg >= prev_avg - 1e-12 * (1.0 + avg));
      prev_avg = avg;
    }
  }
}

TEST_CASE("threshold adapts to the number of nulls") {
  for (int trial = 0; trial < 40; ++trial) {
    RngStream rng(32, trial);
    const int n = 1 + static_cast<int>(rng.next_u64() % 30);
    const double alpha = 0.05;
    EValueVector e = random_evalues(n, alpha, rng);
    int below = 0;
    for (double v : e.values()) {
      if (v < 1.0 / alpha) ++below;
    }
    CHECK(1.0 / alpha + holm_correction(e, alpha) <=
          (below + 1) / alpha + 1e-9 * (below + 1) / alpha);
  }
}

TEST_CASE("scale equivariance") {
  RngStream rng(33, 0);
  EValueVector e = random_evalues(12, 0.05, rng);
  const AdjustedResult base = holm_adjusted(e, 0.05);

  // Power-of-two scaling is exact; a generic factor matches to rounding.
  std::vector<double> doubled;
  std::vector<double> scaled;
  for (double v : e.values()) {
    doubled.push_back(4.0 * v);
    scaled.push_back(1.7 * v);
  }
  const AdjustedResult r4 = holm_adjusted(EValueVector(doubled), 0.05);
  const AdjustedResult r17 = holm_adjusted(EValueVector(scaled), 0.05);
  for (int i = 0; i < e.size(); ++i) {
    CHECK(r4.adjusted[static_cast<std::size_t>(i)] ==
          4.0 * base.adjusted[static_cast<std::size_t>(i)]);
    CHECK(testref::rel_err(r17.adjusted[static_cast<std::size_t>(i)],
                           1.7 * base.adjusted[static_cast<std::size_t>(i)]) < 1e-12);
  }
}

TEST_CASE("long sweeps stay accurate under the periodic recomputation") {
  RngStream rng(34, 0);
  const int n = 3000;
  EValueVector e = random_evalues(n, 0.05, rng);
  const AdjustedResult swept = holm_adjusted(e, 0.05);
  const std::vector<double> direct = holm_adjusted_by_definition(e.values());
  for (int i = 0; i < n; ++i) {
    CHECK(testref::rel_err(swept.adjusted[static_cast<std::size_t>(i)],
                           direct[static_cast<std::size_t>(i)]) < 1e-11);
  }
}

TEST_CASE("infinite e-values propagate") {
  const double inf = std::numeric_limits<double>::infinity();
  AdjustedResult r = holm_adjusted(EValueVector({inf, 2.0, 1.0}), 0.05);
  CHECK(std::isinf(r.adjusted[0]));
  CHECK(r.adjusted[1] == doctest::Approx(1.5));
  CHECK(r.adjusted[2] == 1.0);
  CHECK(holm_reject(EValueVector({inf, 2.0, 1.0}), 0.05) == std::vector<int>{1});
}
