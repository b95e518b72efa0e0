#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "efwer/seqsim.hpp"

#include "test_helpers.hpp"

using namespace efwer;

TEST_CASE("sprt factor") {
  CHECK(sprt_update(1.0, 0.5, 1.0) == doctest::Approx(1.0));  // exp(0.5 - 0.5)
  CHECK(sprt_update(3.7, 12.3, 0.0) == 3.7);                  // null alternative
  CHECK(sprt_update(1.0, 2.0, 2.0) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS_AS(sprt_update(0.0, 1.0, 1.0), Error);
}

TEST_CASE("factorial contrasts isolate their coefficient exactly") {
  // Noise-free block generated from a full coefficient vector: the contrast
  // for each target must return exactly its beta.
  const std::array<double, 7> beta = {0.7, -0.3, 1.1, 0.25, -0.6, 0.05, 0.4};
  const std::array<unsigned, 7> masks = {0b100, 0b010, 0b001, 0b110, 0b101, 0b011, 0b111};
  std::array<double, 8> block{};
  for (unsigned x = 0; x < 8; ++x) {
    double mean = 0.0;
    for (std::size_t j = 0; j < 7; ++j) {
      if ((masks[j] & x) == masks[j]) mean += beta[j];
    }
    block[x] = mean;
  }
  for (std::size_t j = 0; j < 7; ++j) {
    const FactorialContrast c = factorial_contrast(block, masks[j]);
    CHECK(c.value == doctest::Approx(beta[j]).epsilon(1e-12));
    CHECK(c.variance == static_cast<double>(1u << __builtin_popcount(masks[j])));
  }

  // The spelled-out cases: Y100 - Y000 with variance 2, the four-term
  // beta_13 combination with variance 4, the eight-term beta_123 row.
  const FactorialContrast c1 = factorial_contrast(block, 0b100);
  CHECK(c1.value == doctest::Approx(block[0b100] - block[0b000]));
  CHECK(c1.variance == 2.0);
  const FactorialContrast c13 = factorial_contrast(block, 0b101);
  CHECK(c13.value ==
        doctest::Approx(block[0b101] - block[0b100] - block[0b001] + block[0b000]));
  CHECK(c13.variance == 4.0);
  CHECK(factorial_contrast(block, 0b111).variance == 8.0);

  const std::vector<double> short_block(7, 0.0);
  CHECK_THROWS_AS(factorial_contrast(short_block, 0b100), Error);
  CHECK_THROWS_AS(factorial_contrast(block, 0), Error);
}

TEST_CASE("substreams are deterministic and distinct") {
  RngStream a(99, 4);
  RngStream b(99, 4);
  RngStream c(99, 5);
  bool all_equal = true;
  bool any_equal_c = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.gaussian();
    const double vb = b.gaussian();
    const double vc = c.gaussian();
    all_equal = all_equal && va == vb;
    any_equal_c = any_equal_c || va == vc;
  }
  CHECK(all_equal);
  CHECK_FALSE(any_equal_c);
}

TEST_CASE("gaussian moments are roughly standard") {
  RngStream rng(100, 0);
  const int n = 200000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.gaussian();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::fabs(sum / n) < 0.01);
  CHECK(std::fabs(sumsq / n - 1.0) < 0.02);
}

TEST_CASE("null martingales average to one at a fixed horizon") {
  const int reps = 4000;
  const int horizon = 50;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream rng(101, rep);
    double s = 1.0;
    for (int t = 0; t < horizon; ++t) s = sprt_update(s, rng.gaussian(), 0.25);
    sum += s;
    sumsq += s * s;
  }
  const double mean = sum / reps;
  const double sd = std::sqrt((sumsq / reps - mean * mean) / reps);
  CHECK(std::fabs(mean - 1.0) <= 3.0 * sd);
}

TEST_CASE("panel keeps running maxima above values") {
  MartingalePanel panel(3);
  CHECK(panel.size() == 3);
  RngStream rng(102, 0);
  const std::vector<double> mu_hat{0.5, 1.0, 0.0};
  std::vector<double> y(3, 0.0);
  for (int t = 0; t < 50; ++t) {
    for (double& v : y) v = rng.gaussian();
    panel.step(y, mu_hat);
    for (int i = 0; i < 3; ++i) {
      CHECK(panel.value(i) > 0.0);
      CHECK(panel.running_max(i) >= panel.value(i));
      CHECK(panel.running_max(i) >= 1.0);
    }
  }
  CHECK(panel.time() == 50);
  // Always-valid p is pathwise at most the stopped inverse-e p.
  for (int i = 0; i < 3; ++i) {
    CHECK(1.0 / panel.running_max(i) <= 1.0 / panel.value(i));
  }
}

TEST_CASE("single-hypothesis stopping: e and stopped-inverse-e coincide") {
  for (int rep = 0; rep < 20; ++rep) {
    RngStream rng(103, rep);
    double s = 1.0;
    int t_e = 0;
    int t_ep = 0;
    for (int t = 1; t <= 500 && (t_e == 0 || t_ep == 0); ++t) {
      s = sprt_update(s, rng.gaussian(2.0, 1.0), 2.0);
      if (t_e == 0 && s >= 1.0 / 0.05) t_e = t;
      if (t_ep == 0 && std::min(1.0 / s, 1.0) <= 0.05) t_ep = t;
    }
    CHECK(t_e == t_ep);
    CHECK(t_e > 0);
  }
}

TEST_CASE("holm experiment invariants at a small scale") {
  ExperimentConfig cfg;
  cfg.replications = 25;
  cfg.mu_alt_grid = {1.0, 2.0};
  cfg.seed = 7;
  const ExperimentResult res = run_holm_experiment(cfg);
  REQUIRE(res.times.size() == 2);
  for (const auto& [mu, times] : res.times) {
    (void)mu;
    REQUIRE(times.size() == 25);
    for (const StoppingTimes& st : times) {
      CHECK(st.t_e <= st.t_p);
      CHECK(st.t_p == st.t_ep);
      CHECK_FALSE(st.e_capped);  // these alternatives stop well before 2000
    }
  }
  // Determinism: the same configuration reproduces the same metrics.
  const ExperimentResult res2 = run_holm_experiment(cfg);
  REQUIRE(res.metrics.size() == res2.metrics.size());
  for (std::size_t i = 0; i < res.metrics.size(); ++i) {
    CHECK(res.metrics[i].metric == res2.metrics[i].metric);
    const bool both_nan =
        std::isnan(res.metrics[i].value) && std::isnan(res2.metrics[i].value);
    CHECK((both_nan || res.metrics[i].value == res2.metrics[i].value));
  }
}

TEST_CASE("dag experiment runs both schemes and respects ep dominance") {
  for (const auto scheme : {ExperimentConfig::BudgetScheme::primary,
                            ExperimentConfig::BudgetScheme::equal}) {
    ExperimentConfig cfg;
    cfg.replications = 8;
    cfg.mu_alt_grid = {2.0};
    cfg.seed = 13;
    cfg.budget = scheme;
    const ExperimentResult res = run_dag_experiment(cfg);
    REQUIRE(res.times.size() == 1);
    for (const StoppingTimes& st : res.times[0].second) {
      CHECK(st.t_e <= st.t_ep);  // pathwise dominance against stopped 1/e
    }
    const std::vector<std::string> expected = {"p_e_lt_p",
                                               "p_e_gt_p",
                                               "p_e_lt_ep",
                                               "ratio_e_vs_p_given_diff",
                                               "ratio_e_vs_ep_given_diff"};
    for (const std::string& name : expected) {
      const bool found = std::any_of(res.metrics.begin(), res.metrics.end(),
                                     [&](const MetricRow& r) { return r.metric == name; });
      CHECK(found);
    }
  }
}

TEST_CASE("factorial gatekeeping keeps primaries standalone under primary budget") {
  // With budget only on the primaries, the ancestor graph of a primary is just
  // itself: its adjusted e-value is e_i / 3 regardless of the other values.
  const GraphSpec g = factorial_design_graph(0.05, ExperimentConfig::BudgetScheme::primary);
  const DagSolver solver(g);
  const AdjustedResult r =
      solver.adjusted(EValueVector({90.0, 1.0, 2.0, 500.0, 700.0, 1.0, 3.0}));
  CHECK(r.adjusted[0] == doctest::Approx(30.0));   // 90 * (alpha/3) / alpha
  CHECK(r.adjusted[1] == doctest::Approx(1.0 / 3.0));
  // H13 only draws budget from H1 and H3.
  const double expect_h13 =
      (std::min(90.0, 700.0 / 2.0) + std::min(2.0, 700.0 / 2.0)) / 3.0;
  CHECK(r.adjusted[4] == doctest::Approx(expect_h13));
}

TEST_CASE("metrics csv and manifest shapes") {
  ExperimentConfig cfg;
  cfg.replications = 2;
  cfg.mu_alt_grid = {2.0};
  cfg.seed = 3;
  const ExperimentResult res = run_holm_experiment(cfg);
  const std::string csv = metrics_csv(res.metrics);
  CHECK(csv.rfind("mu_alt,metric,value\n", 0) == 0);
  CHECK(csv.find("p_e_lt_p") != std::string::npos);

  const std::string manifest = run_manifest_json(cfg, "holm");
  CHECK(manifest.find("\"experiment\": \"holm\"") != std::string::npos);
  CHECK(manifest.find("\"generator\"") != std::string::npos);
}
