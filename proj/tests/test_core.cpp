#include "doctest.h"

#include <algorithm>

#include "efwer/graph.hpp"
#include "efwer/random_problems.hpp"
#include "efwer/types.hpp"

#include "test_helpers.hpp"

using namespace efwer;

TEST_CASE("e-value vector validation") {
  CHECK_NOTHROW(EValueVector({20.0}));
  CHECK_NOTHROW(EValueVector({0.0, std::numeric_limits<double>::infinity()}));
  CHECK_THROWS_AS(EValueVector({}), Error);
  CHECK_THROWS_AS(EValueVector({1.0, -0.5}), Error);
  CHECK_THROWS_AS(EValueVector({std::numeric_limits<double>::quiet_NaN()}), Error);
  try {
    EValueVector({-1.0});
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == errc::negative_e_value);
  }
}

TEST_CASE("alpha budget validation") {
  CHECK_NOTHROW(AlphaBudget(0.05, {0.05}));
  CHECK_NOTHROW(AlphaBudget(0.05, {0.02, 0.01}));  // slack is allowed
  try {
    AlphaBudget(0.05, {0.03, 0.03});
    FAIL("expected BudgetOverflow");
  } catch (const Error& e) {
    CHECK(e.code() == errc::budget_overflow);
  }
  // Strict mode rejects slack but accepts an exact split.
  CHECK_THROWS_AS(AlphaBudget(0.05, {0.02, 0.01}, true), Error);
  CHECK_NOTHROW(AlphaBudget(0.05, {0.025, 0.025}, true));
  CHECK_THROWS_AS(AlphaBudget(0.05, {-0.01, 0.05}), Error);
  CHECK_THROWS_AS(AlphaBudget(1.5, {0.5}), Error);
  CHECK_THROWS_AS(AlphaBudget(0.05, {}), Error);
}

TEST_CASE("graph validation") {
  AlphaBudget b(0.05, {0.025, 0.025});
  try {
    GraphSpec(2, {{1, 2, 0.7}, {1, 2, 0.5}}, b);  // merged row sum 1.2
    FAIL("expected RowSumExceedsOne");
  } catch (const Error& e) {
    CHECK(e.code() == errc::row_sum_exceeds_one);
  }
  try {
    GraphSpec(2, {{1, 3, 0.5}}, b);
    FAIL("expected BadNodeId");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_node_id);
  }
  CHECK_THROWS_AS(GraphSpec(2, {{1, 1, 0.5}}, b), Error);   // self-loop
  CHECK_THROWS_AS(GraphSpec(2, {{1, 2, 0.0}}, b), Error);   // weight must be > 0
  CHECK_THROWS_AS(GraphSpec(2, {{1, 2, -0.2}}, b), Error);

  // Parallel edges merge by summing weights.
  GraphSpec g(2, {{1, 2, 0.3}, {1, 2, 0.3}}, b);
  REQUIRE(g.edges().size() == 1);
  CHECK(g.edges()[0].q == doctest::Approx(0.6));
}

TEST_CASE("validate_problem") {
  // Single hypothesis, full budget, no edges.
  GraphSpec g(1, {}, AlphaBudget(0.05, {0.05}));
  EValueVector e({20.0});
  ValidatedProblem vp = validate_problem(e, g);
  CHECK(vp.graph.size() == 1);

  // Validation is idempotent: revalidating the validated parts is a no-op.
  ValidatedProblem vp2 = validate_problem(vp.evalues, vp.graph);
  CHECK(vp2.evalues.values() == vp.evalues.values());
  CHECK(vp2.graph.edges().size() == vp.graph.edges().size());

  CHECK_THROWS_AS(validate_problem(EValueVector({1.0, 2.0}), g), Error);
}

TEST_CASE("topological order") {
  AlphaBudget b3(0.05, {0.02, 0.02, 0.01});
  GraphSpec chain(3, {{1, 2, 1.0}, {2, 3, 1.0}}, b3);
  CHECK(topological_order(chain) == std::vector<int>{1, 2, 3});

  GraphSpec empty4(4, {}, AlphaBudget(0.05, {0.0125, 0.0125, 0.0125, 0.0125}));
  CHECK(topological_order(empty4) == std::vector<int>{1, 2, 3, 4});

  GraphSpec two_cycle(2, {{1, 2, 1.0}, {2, 1, 1.0}}, AlphaBudget(0.05, {0.025, 0.025}));
  try {
    topological_order(two_cycle);
    FAIL("expected CycleError");
  } catch (const CycleError& e) {
    CHECK(e.cycle() == std::vector<int>{1, 2});
  }
}

TEST_CASE("topological order positions respect every edge on random DAGs") {
  for (int trial = 0; trial < 50; ++trial) {
    RngStream rng(11, trial);
    const int n = 2 + static_cast<int>(rng.next_u64() % 9);
    GraphSpec g = random_dag(n, 0.05, rng);
    const std::vector<int> order = topological_order(g);
    std::vector<int> pos(static_cast<std::size_t>(n) + 1, 0);
    for (std::size_t r = 0; r < order.size(); ++r) pos[static_cast<std::size_t>(order[r])] = static_cast<int>(r);
    for (const Edge& e : g.edges()) {
      CHECK(pos[static_cast<std::size_t>(e.from)] < pos[static_cast<std::size_t>(e.to)]);
    }
  }
}

TEST_CASE("ancestor sets") {
  GraphSpec chain(3, {{1, 2, 1.0}, {2, 3, 1.0}}, AlphaBudget(0.05, {0.02, 0.02, 0.01}));
  CHECK(ancestor_set(chain, 3) == std::vector<int>{1, 2, 3});
  CHECK(ancestor_set(chain, 1) == std::vector<int>{1});

  GraphSpec diamond(4, {{1, 2, 0.5}, {1, 3, 0.5}, {2, 4, 1.0}, {3, 4, 1.0}},
                    AlphaBudget(0.05, {0.0125, 0.0125, 0.0125, 0.0125}));
  CHECK(ancestor_set(diamond, 4) == std::vector<int>{1, 2, 3, 4});

  try {
    ancestor_set(chain, 5);
    FAIL("expected BadNodeId");
  } catch (const Error& e) {
    CHECK(e.code() == errc::bad_node_id);
  }
}

TEST_CASE("ancestor sets agree with independent reachability on random graphs") {
  for (int trial = 0; trial < 40; ++trial) {
    RngStream rng(12, trial);
    const int n = 1 + static_cast<int>(rng.next_u64() % 8);
    GraphSpec g = random_graph(n, 0.05, rng);  // cycles allowed
    for (int i = 1; i <= n; ++i) {
      const std::vector<int> anc = ancestor_set(g, i);
      for (int j = 1; j <= n; ++j) {
        const bool in_set = std::binary_search(anc.begin(), anc.end(), j);
        CHECK(in_set == testref::reaches(g, j, i));
      }
    }
  }
}
