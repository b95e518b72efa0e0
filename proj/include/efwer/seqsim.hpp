#pragma once

// Sequential-testing simulation harness: Gaussian SPRT test martingales,
// always-valid p-values, and stopping-time experiments comparing the e-value
// procedures against their p-value counterparts, plus a global-null FWER
// audit. Randomness is fully determined by (master seed, replication id).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "efwer/dag.hpp"
#include "efwer/graph.hpp"
#include "efwer/holm.hpp"
#include "efwer/pgraph.hpp"
#include "efwer/types.hpp"

#include "json.hpp"

namespace efwer {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Reproducible substream: mt19937_64 seeded through splitmix64, Gaussians by
/// Box-Muller on explicit 53-bit uniforms so that output is identical across
/// platforms.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t replication_id)
      : gen_(splitmix64(master_seed ^ splitmix64(replication_id + 1))) {}

  std::uint64_t next_u64() { return gen_(); }

  double uniform01() {  // [0, 1), 53-bit resolution
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double gaussian(double mean, double sd) { return mean + sd * gaussian(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// One SPRT factor for a unit-variance Gaussian observation y against the
/// predictable alternative mean mu_hat: S * exp(mu_hat * y - mu_hat^2 / 2).
inline double sprt_update(double s, double y, double mu_hat) {
  if (!(s > 0.0)) throw Error(errc::invalid_input, "martingale value must be > 0");
  return s * std::exp(mu_hat * y - 0.5 * mu_hat * mu_hat);
}

/// Panel of test-martingale trajectories with running maxima. Values are
/// floored at the smallest positive double so they stay strictly positive
/// under extreme underflow.
class MartingalePanel {
 public:
  explicit MartingalePanel(int n)
      : values_(static_cast<std::size_t>(n), 1.0), maxima_(static_cast<std::size_t>(n), 1.0) {
    if (n < 1) throw Error(errc::invalid_input, "panel needs at least one hypothesis");
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  int time() const noexcept { return t_; }

  void step(std::span<const double> y, std::span<const double> mu_hat) {
    if (y.size() != values_.size() || mu_hat.size() != values_.size()) {
      throw Error(errc::invalid_input, "panel step size mismatch");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      double next = sprt_update(values_[i], y[i], mu_hat[i]);
      if (next < std::numeric_limits<double>::min()) next = std::numeric_limits<double>::min();
      values_[i] = next;
      if (next > maxima_[i]) maxima_[i] = next;
    }
    ++t_;
  }

  double value(int i0) const { return values_[static_cast<std::size_t>(i0)]; }
  double running_max(int i0) const { return maxima_[static_cast<std::size_t>(i0)]; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<double>& running_maxima() const noexcept { return maxima_; }

 private:
  std::vector<double> values_;
  std::vector<double> maxima_;
  int t_ = 0;
};

/// Signed inclusion-exclusion combination of a full 2^3 factorial block that
/// isolates one regression coefficient. Block cells are indexed by the binary
/// treatment vector (x1 x2 x3), i.e. Y_{101} sits at index 0b101 = 5; the
/// target coefficient uses the same bit layout. The variance equals the
/// number of combined cells, 2^order.
struct FactorialContrast {
  double value = 0.0;
  double variance = 0.0;
};

inline FactorialContrast factorial_contrast(std::span<const double> block, unsigned target_mask) {
  if (block.size() != 8) {
    throw Error(errc::incomplete_block,
                "factorial block needs all 8 cells, got " + std::to_string(block.size()));
  }
  if (target_mask < 1 || target_mask > 7) {
    throw Error(errc::invalid_input, "target mask must lie in 1..7");
  }
  const int order = __builtin_popcount(target_mask);
  FactorialContrast c;
  // Sum over submasks s of the target with sign (-1)^(order - |s|); the
  // untouched factors stay at level 0.
  unsigned s = target_mask;
  while (true) {
    const int sign = ((order - __builtin_popcount(s)) % 2 == 0) ? 1 : -1;
    c.value += sign * block[s];
    if (s == 0) break;
    s = (s - 1) & target_mask;
  }
  c.variance = static_cast<double>(1u << order);
  return c;
}

/// Simulation configuration; desk-scale defaults.
struct ExperimentConfig {
  int hypotheses = 20;      // holm experiment panel size
  int alternatives = 5;     // holm: number of true alternatives (0 = global null)
  std::vector<double> mu_alt_grid = {0.5, 1.0, 1.5, 2.0};
  int replications = 200;
  int max_iterations = 2000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  enum class BudgetScheme { primary, equal } budget = BudgetScheme::primary;  // dag experiment
};

struct StoppingTimes {
  int t_e = 0;
  int t_p = 0;
  int t_ep = 0;
  bool e_capped = false;
  bool p_capped = false;
  bool ep_capped = false;
};

struct MetricRow {
  double mu_alt = 0.0;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::vector<MetricRow> metrics;
  std::vector<std::pair<double, std::vector<StoppingTimes>>> times;  // per grid value
};

/// Factorial-design graph: nodes 1..3 are the primaries H1, H2, H3, nodes
/// 4..6 the secondaries H12, H13, H23, node 7 the tertiary H123. Primaries
/// split uniformly between their two containing secondaries; secondaries
/// forward everything to the tertiary.
inline GraphSpec factorial_design_graph(double alpha, ExperimentConfig::BudgetScheme scheme) {
  std::vector<Edge> edges{{1, 4, 0.5}, {1, 5, 0.5}, {2, 4, 0.5}, {2, 6, 0.5},
                          {3, 5, 0.5}, {3, 6, 0.5}, {4, 7, 1.0}, {5, 7, 1.0}, {6, 7, 1.0}};
  std::vector<double> budgets(7, 0.0);
  if (scheme == ExperimentConfig::BudgetScheme::primary) {
    budgets[0] = budgets[1] = budgets[2] = alpha / 3.0;
  } else {
    for (double& b : budgets) b = alpha / 7.0;
  }
  return GraphSpec(7, std::move(edges), AlphaBudget(alpha, std::move(budgets)));
}

namespace detail {

inline void check_config(const ExperimentConfig& cfg, bool allow_zero_mu) {
  if (cfg.replications < 1) throw Error(errc::invalid_input, "need at least one replication");
  if (cfg.max_iterations < 1) throw Error(errc::invalid_input, "need at least one iteration");
  if (cfg.mu_alt_grid.empty()) throw Error(errc::invalid_input, "mu_alt grid must be nonempty");
  for (double mu : cfg.mu_alt_grid) {
    if (std::isnan(mu) || mu < 0.0 || (!allow_zero_mu && mu == 0.0)) {
      throw Error(errc::invalid_input, "mu_alt values must be > 0");
    }
  }
  if (!(cfg.alpha > 0.0) || !(cfg.alpha < 1.0)) {
    throw Error(errc::invalid_input, "alpha must lie in (0, 1)");
  }
}

inline double ratio_given_diff(const std::vector<StoppingTimes>& times, bool against_ep,
                               int* n_diff_out = nullptr) {
  double sum = 0.0;
  int n_diff = 0;
  for (const StoppingTimes& st : times) {
    const int other = against_ep ? st.t_ep : st.t_p;
    if (st.t_e != other) {
      sum += static_cast<double>(st.t_e) / static_cast<double>(other);
      ++n_diff;
    }
  }
  if (n_diff_out != nullptr) *n_diff_out = n_diff;
  return n_diff > 0 ? sum / n_diff : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

/// e-Holm vs p-Holm stopping times on a panel of independent Gaussian arms.
/// The first cfg.alternatives arms have mean mu_alt, the rest 0; every SPRT
/// uses the known alternative mu_alt. Stop at the first rejection of any
/// hypothesis by each procedure, capped at cfg.max_iterations.
inline ExperimentResult run_holm_experiment(const ExperimentConfig& cfg) {
  detail::check_config(cfg, /*allow_zero_mu=*/false);
  if (cfg.hypotheses < 1 || cfg.alternatives < 0 || cfg.alternatives > cfg.hypotheses) {
    throw Error(errc::invalid_input, "need 0 <= alternatives <= hypotheses");
  }
  const int n = cfg.hypotheses;
  const double p_holm_threshold = static_cast<double>(n) / cfg.alpha;  // max S needed
  ExperimentResult result;

  for (std::size_t gi = 0; gi < cfg.mu_alt_grid.size(); ++gi) {
    const double mu_alt = cfg.mu_alt_grid[gi];
    std::vector<StoppingTimes> times;
    times.reserve(static_cast<std::size_t>(cfg.replications));

    std::vector<double> mu_true(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < cfg.alternatives; ++i) mu_true[static_cast<std::size_t>(i)] = mu_alt;
    const std::vector<double> mu_hat(static_cast<std::size_t>(n), mu_alt);

    for (int rep = 0; rep < cfg.replications; ++rep) {
      RngStream rng(cfg.seed, gi * static_cast<std::uint64_t>(cfg.replications) +
                                  static_cast<std::uint64_t>(rep));
      MartingalePanel panel(n);
      std::vector<double> y(static_cast<std::size_t>(n), 0.0);
      StoppingTimes st;
      while ((st.t_e == 0 || st.t_p == 0 || st.t_ep == 0) && panel.time() < cfg.max_iterations) {
        for (int i = 0; i < n; ++i) {
          y[static_cast<std::size_t>(i)] = rng.gaussian(mu_true[static_cast<std::size_t>(i)], 1.0);
        }
        panel.step(y, mu_hat);
        const int t = panel.time();
        if (st.t_e == 0 &&
            !holm_reject(EValueVector(panel.values()), cfg.alpha).empty()) {
          st.t_e = t;
        }
        if (st.t_ep == 0) {
          double mx = 0.0;
          for (double v : panel.values()) mx = std::max(mx, v);
          if (mx >= p_holm_threshold) st.t_ep = t;
        }
        if (st.t_p == 0) {
          double mx = 0.0;
          for (double v : panel.running_maxima()) mx = std::max(mx, v);
          if (mx >= p_holm_threshold) st.t_p = t;
        }
      }
      if (st.t_e == 0) { st.t_e = cfg.max_iterations; st.e_capped = true; }
      if (st.t_p == 0) { st.t_p = cfg.max_iterations; st.p_capped = true; }
      if (st.t_ep == 0) { st.t_ep = cfg.max_iterations; st.ep_capped = true; }
      times.push_back(st);
    }

    const double m = static_cast<double>(cfg.replications);
    int e_before_p = 0;
    int capped_e = 0;
    int reject_e = 0;
    int reject_p = 0;
    for (const StoppingTimes& st : times) {
      if (st.t_e < st.t_p) ++e_before_p;
      if (st.e_capped) ++capped_e;
      if (!st.e_capped) ++reject_e;
      if (!st.p_capped) ++reject_p;
    }
    int n_diff = 0;
    const double ratio = detail::ratio_given_diff(times, /*against_ep=*/false, &n_diff);
    result.metrics.push_back({mu_alt, "p_e_lt_p", e_before_p / m});
    result.metrics.push_back({mu_alt, "ratio_e_vs_p_given_diff", ratio});
    result.metrics.push_back({mu_alt, "n_diff_e_p", static_cast<double>(n_diff)});
    result.metrics.push_back({mu_alt, "n_capped_e", static_cast<double>(capped_e)});
    result.metrics.push_back({mu_alt, "reject_rate_e", reject_e / m});
    result.metrics.push_back({mu_alt, "reject_rate_p", reject_p / m});
    result.times.emplace_back(mu_alt, std::move(times));
  }
  return result;
}

/// e-DAG vs p-DAG vs ep-DAG stopping times for the rejection of H13 in the
/// three-factor design. beta_1 = beta_3 = 0.5 with this alternative known;
/// beta_13 = mu_alt is unknown and its SPRT mean is estimated by the running
/// average of past standardized contrasts (zero until data arrives). The
/// remaining hypotheses are true nulls; their martingales use the same rules
/// (known 0.5 for the primary H2, running averages for interactions) but do
/// not influence the H13 stopping times.
inline ExperimentResult run_dag_experiment(const ExperimentConfig& cfg) {
  detail::check_config(cfg, /*allow_zero_mu=*/true);
  const GraphSpec graph = factorial_design_graph(cfg.alpha, cfg.budget);
  const DagSolver solver(graph);
  constexpr int kNodes = 7;
  constexpr int kTargetNode = 5;  // H13
  // Node id -> coefficient bitmask (x1 x2 x3): H1 H2 H3 H12 H13 H23 H123.
  constexpr std::array<unsigned, kNodes> kMask = {0b100, 0b010, 0b001, 0b110,
                                                  0b101, 0b011, 0b111};
  const double known_primary_alt = 0.5;
  ExperimentResult result;

  for (std::size_t gi = 0; gi < cfg.mu_alt_grid.size(); ++gi) {
    const double beta13 = cfg.mu_alt_grid[gi];
    std::vector<StoppingTimes> times;
    times.reserve(static_cast<std::size_t>(cfg.replications));

    std::array<double, kNodes> beta{0.5, 0.0, 0.5, 0.0, beta13, 0.0, 0.0};
    std::array<double, 8> cell_mean{};
    for (unsigned x = 0; x < 8; ++x) {
      double mean = 0.0;
      for (int j = 0; j < kNodes; ++j) {
        if ((kMask[static_cast<std::size_t>(j)] & x) == kMask[static_cast<std::size_t>(j)]) {
          mean += beta[static_cast<std::size_t>(j)];
        }
      }
      cell_mean[x] = mean;
    }

    for (int rep = 0; rep < cfg.replications; ++rep) {
      RngStream rng(cfg.seed, gi * static_cast<std::uint64_t>(cfg.replications) +
                                  static_cast<std::uint64_t>(rep));
      MartingalePanel panel(kNodes);
      std::array<double, 8> block{};
      std::vector<double> z(kNodes, 0.0);
      std::vector<double> mu_hat(kNodes, 0.0);
      std::vector<double> z_sum(kNodes, 0.0);
      StoppingTimes st;

      while ((st.t_e == 0 || st.t_p == 0 || st.t_ep == 0) && panel.time() < cfg.max_iterations) {
        for (unsigned x = 0; x < 8; ++x) block[x] = rng.gaussian(cell_mean[x], 1.0);
        for (int j = 0; j < kNodes; ++j) {
          const FactorialContrast c =
              factorial_contrast(block, kMask[static_cast<std::size_t>(j)]);
          z[static_cast<std::size_t>(j)] = c.value / std::sqrt(c.variance);
          const int order = __builtin_popcount(kMask[static_cast<std::size_t>(j)]);
          if (order == 1) {
            mu_hat[static_cast<std::size_t>(j)] = known_primary_alt / std::sqrt(c.variance);
          } else {
            // Predictable running mean of past standardized contrasts.
            const int past = panel.time();
            mu_hat[static_cast<std::size_t>(j)] =
                past > 0 ? z_sum[static_cast<std::size_t>(j)] / past : 0.0;
          }
        }
        panel.step(z, mu_hat);
        for (int j = 0; j < kNodes; ++j) z_sum[static_cast<std::size_t>(j)] += z[static_cast<std::size_t>(j)];

        const int t = panel.time();
        if (st.t_e == 0) {
          const AdjustedResult adj = solver.adjusted(EValueVector(panel.values()));
          if (adj.adjusted[kTargetNode - 1] >= 1.0 / cfg.alpha) st.t_e = t;
        }
        if (st.t_ep == 0) {
          const std::vector<int> rej =
              sequential_rejection(e_to_p(EValueVector(panel.values())), graph, cfg.alpha);
          if (std::find(rej.begin(), rej.end(), kTargetNode) != rej.end()) st.t_ep = t;
        }
        if (st.t_p == 0) {
          const std::vector<int> rej = sequential_rejection(
              e_to_p(EValueVector(panel.running_maxima())), graph, cfg.alpha);
          if (std::find(rej.begin(), rej.end(), kTargetNode) != rej.end()) st.t_p = t;
        }
      }
      if (st.t_e == 0) { st.t_e = cfg.max_iterations; st.e_capped = true; }
      if (st.t_p == 0) { st.t_p = cfg.max_iterations; st.p_capped = true; }
      if (st.t_ep == 0) { st.t_ep = cfg.max_iterations; st.ep_capped = true; }
      times.push_back(st);
    }

    const double m = static_cast<double>(cfg.replications);
    int e_lt_p = 0;
    int e_gt_p = 0;
    int e_lt_ep = 0;
    int capped_e = 0;
    int reject_e = 0;
    for (const StoppingTimes& st : times) {
      if (st.t_e < st.t_p) ++e_lt_p;
      if (st.t_e > st.t_p) ++e_gt_p;
      if (st.t_e < st.t_ep) ++e_lt_ep;
      if (st.e_capped) ++capped_e;
      if (!st.e_capped) ++reject_e;
    }
    int n_diff_p = 0;
    int n_diff_ep = 0;
    const double ratio_p = detail::ratio_given_diff(times, /*against_ep=*/false, &n_diff_p);
    const double ratio_ep = detail::ratio_given_diff(times, /*against_ep=*/true, &n_diff_ep);
    result.metrics.push_back({beta13, "p_e_lt_p", e_lt_p / m});
    result.metrics.push_back({beta13, "p_e_gt_p", e_gt_p / m});
    result.metrics.push_back({beta13, "p_e_lt_ep", e_lt_ep / m});
    result.metrics.push_back({beta13, "ratio_e_vs_p_given_diff", ratio_p});
    result.metrics.push_back({beta13, "ratio_e_vs_ep_given_diff", ratio_ep});
    result.metrics.push_back({beta13, "n_capped_e", static_cast<double>(capped_e)});
    result.metrics.push_back({beta13, "reject_rate_e", reject_e / m});
    result.times.emplace_back(beta13, std::move(times));
  }
  return result;
}

// ---------------------------------------------------------------------------
// Emission: metrics CSV and the reproducibility manifest.
// ---------------------------------------------------------------------------

inline std::string format_double17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string metrics_csv(const std::vector<MetricRow>& rows) {
  std::string out = "mu_alt,metric,value\n";
  for (const MetricRow& r : rows) {
    out += format_double17(r.mu_alt);
    out += ',';
    out += r.metric;
    out += ',';
    out += format_double17(r.value);
    out += '\n';
  }
  return out;
}

inline std::string run_manifest_json(const ExperimentConfig& cfg, const std::string& experiment) {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = cfg.seed;
  j["config"] = {
      {"hypotheses", cfg.hypotheses},
      {"alternatives", cfg.alternatives},
      {"mu_alt_grid", cfg.mu_alt_grid},
      {"replications", cfg.replications},
      {"max_iterations", cfg.max_iterations},
      {"alpha", cfg.alpha},
      {"budget", cfg.budget == ExperimentConfig::BudgetScheme::primary ? "primary" : "equal"},
  };
  j["generator"] = "mt19937_64+splitmix64/box-muller";
  j["version"] = kVersion;
  return j.dump(2) + "\n";
}

}  // namespace efwer
