// Command-line surface for the e-value FWER toolkit: validate problem files,
// compute adjusted e-values and rejection sets by any method, cross-check the
// fast algorithms against the brute-force closure, run the sequential
// experiments, and benchmark the linear-time algorithms.
//
// Exit codes: 0 ok, 1 verification mismatch, 2 invalid input,
// 3 method/graph mismatch.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "efwer/dag.hpp"
#include "efwer/fallback.hpp"
#include "efwer/graph.hpp"
#include "efwer/holm.hpp"
#include "efwer/oracle.hpp"
#include "efwer/pgraph.hpp"
#include "efwer/problem_io.hpp"
#include "efwer/random_problems.hpp"
#include "efwer/seqsim.hpp"
#include "efwer/types.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyMismatch = 1;
constexpr int kExitInvalidInput = 2;
constexpr int kExitMethodMismatch = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw efwer::Error(efwer::errc::invalid_input, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw efwer::Error(efwer::errc::invalid_input, "cannot write file: " + out_path);
  out << text;
}

struct ProblemInputs {
  efwer::ProblemFile problem;
  efwer::EValueVector evalues;
};

ProblemInputs load_inputs(const std::string& problem_path, const std::string& evalue_path,
                          bool strict) {
  efwer::ProblemFile pf = efwer::parse_problem_json(read_file(problem_path), strict);
  efwer::EValueVector e = efwer::parse_evalue_csv(read_file(evalue_path), pf.graph.size());
  efwer::validate_problem(e, pf.graph);
  return ProblemInputs{std::move(pf), std::move(e)};
}

void require_shape(const efwer::ProblemFile& pf, const std::string& method,
                   efwer::ProblemShape expected) {
  if (pf.shape != expected) {
    throw efwer::Error(efwer::errc::method_mismatch,
                       "method " + method + " requires the \"" +
                           std::string(efwer::shape_name(expected)) +
                           "\" problem shape, got \"" + efwer::shape_name(pf.shape) + "\"");
  }
}

efwer::AdjustedResult compute_adjusted(const efwer::ProblemFile& pf,
                                       const efwer::EValueVector& e,
                                       const std::string& method) {
  const double alpha = pf.graph.alpha();
  if (method == "eholm") {
    require_shape(pf, method, efwer::ProblemShape::holm);
    return efwer::holm_adjusted(e, alpha);
  }
  if (method == "efallback-naive" || method == "efallback-reverse" ||
      method == "efallback-stack") {
    require_shape(pf, method, efwer::ProblemShape::chain);
    if (method == "efallback-naive") return efwer::fallback_naive(e, pf.graph.budget());
    if (method == "efallback-reverse") return efwer::fallback_reverse(e, pf.graph.budget());
    return efwer::fallback_stack(e, pf.graph.budget());
  }
  if (method == "edag") {
    try {
      return efwer::dag_adjusted(e, pf.graph);
    } catch (const efwer::CycleError& ex) {
      throw efwer::Error(efwer::errc::method_mismatch,
                         std::string("method edag requires an acyclic graph: ") + ex.what());
    }
  }
  if (method == "ildag") {
    try {
      return efwer::ildag_adjusted(e, pf.graph);
    } catch (const efwer::NotIldagError& ex) {
      throw efwer::Error(efwer::errc::method_mismatch,
                         std::string("method ildag requires an index-local DAG: ") + ex.what());
    }
  }
  if (method == "oracle") {
    return efwer::brute_force_adjusted_e(e, pf.graph);
  }
  throw efwer::Error(efwer::errc::invalid_input, "unknown method: " + method);
}

// Rescales the budget so adjusted e-values keep their meaning while the
// rejection threshold moves to the overridden level.
efwer::GraphSpec with_alpha(const efwer::GraphSpec& g, double alpha) {
  std::vector<double> budgets = g.budget().budgets();
  const double ratio = alpha / g.alpha();
  for (double& b : budgets) b *= ratio;
  return efwer::GraphSpec(g.size(), g.edges(), efwer::AlphaBudget(alpha, std::move(budgets)));
}

std::string adjusted_csv(const efwer::AdjustedResult& r) {
  std::string out = "id,e_star,m\n";
  for (std::size_t i = 0; i < r.adjusted.size(); ++i) {
    out += std::to_string(i + 1);
    out += ',';
    out += efwer::format_double17(r.adjusted[i]);
    out += ',';
    out += efwer::format_double17(r.m[i]);
    out += '\n';
  }
  return out;
}

int cmd_validate(const std::string& problem_path, const std::string& evalue_path, bool strict) {
  efwer::ProblemFile pf = efwer::parse_problem_json(read_file(problem_path), strict);
  nlohmann::json j;
  j["ok"] = true;
  j["n"] = pf.graph.size();
  j["alpha"] = pf.graph.alpha();
  j["shape"] = efwer::shape_name(pf.shape);
  j["edges"] = pf.graph.edges().size();
  double sum = 0.0;
  for (double b : pf.graph.budget().budgets()) sum += b;
  j["budget_sum"] = sum;
  if (!evalue_path.empty()) {
    efwer::EValueVector e = efwer::parse_evalue_csv(read_file(evalue_path), pf.graph.size());
    efwer::validate_problem(e, pf.graph);
    j["evalues"] = e.size();
  }
  std::cout << j.dump(2) << "\n";
  return kExitOk;
}

int cmd_adjust(const std::string& problem_path, const std::string& evalue_path,
               const std::string& method, bool strict, const std::string& out_path) {
  const ProblemInputs in = load_inputs(problem_path, evalue_path, strict);
  write_output(adjusted_csv(compute_adjusted(in.problem, in.evalues, method)), out_path);
  return kExitOk;
}

int cmd_reject(const std::string& problem_path, const std::string& evalue_path,
               const std::string& method, bool strict, std::optional<double> alpha_override,
               const std::string& out_path) {
  ProblemInputs in = load_inputs(problem_path, evalue_path, strict);
  const double alpha = alpha_override.value_or(in.problem.graph.alpha());
  nlohmann::json j;
  if (method == "eholm") {
    require_shape(in.problem, method, efwer::ProblemShape::holm);
    const double c = efwer::holm_correction(in.evalues, alpha);
    j["rejected"] = efwer::holm_reject(in.evalues, alpha);
    j["C"] = c;
    j["threshold"] = 1.0 / alpha + c;
  } else {
    if (alpha_override.has_value()) {
      in.problem.graph = with_alpha(in.problem.graph, alpha);
    }
    const efwer::AdjustedResult r = compute_adjusted(in.problem, in.evalues, method);
    j["rejected"] = r.rejections(alpha);
    j["threshold"] = 1.0 / alpha;
  }
  j["alpha"] = alpha;
  j["method"] = method;
  write_output(j.dump(2) + "\n", out_path);
  return kExitOk;
}

int cmd_verify(const std::string& problem_path, const std::string& method, bool strict,
               int trials, std::uint64_t seed, const std::string& out_path) {
  efwer::ProblemFile pf = efwer::parse_problem_json(read_file(problem_path), strict);
  double max_rel_err = 0.0;
  int failures = 0;
  for (int t = 0; t < trials; ++t) {
    efwer::RngStream rng(seed, static_cast<std::uint64_t>(t));
    const efwer::EValueVector e =
        efwer::random_evalues(pf.graph.size(), pf.graph.alpha(), rng);
    const efwer::AdjustedResult fast = compute_adjusted(pf, e, method);
    const efwer::AdjustedResult exact = efwer::brute_force_adjusted_e(e, pf.graph);
    for (std::size_t i = 0; i < fast.adjusted.size(); ++i) {
      const double a = fast.adjusted[i];
      const double b = exact.adjusted[i];
      double err = 0.0;
      if (a != b) {
        const double denom = std::max(std::fabs(a), std::fabs(b));
        err = denom > 0.0 ? std::fabs(a - b) / denom : 0.0;
      }
      max_rel_err = std::max(max_rel_err, err);
      if (err > 1e-9) ++failures;
    }
  }
  nlohmann::json j;
  j["method"] = method;
  j["trials"] = trials;
  j["max_rel_err"] = max_rel_err;
  j["failures"] = failures;
  write_output(j.dump(2) + "\n", out_path);
  return failures == 0 ? kExitOk : kExitVerifyMismatch;
}

int cmd_simulate(const std::string& kind, const efwer::ExperimentConfig& cfg,
                 const std::string& out_path, const std::string& manifest_path) {
  const efwer::ExperimentResult result =
      kind == "holm" ? efwer::run_holm_experiment(cfg) : efwer::run_dag_experiment(cfg);
  write_output(efwer::metrics_csv(result.metrics), out_path);
  const std::string manifest = efwer::run_manifest_json(cfg, kind);
  if (manifest_path.empty()) {
    std::cerr << manifest;
  } else {
    write_output(manifest, manifest_path);
  }
  return kExitOk;
}

int cmd_bench(const std::string& kind, const std::vector<int>& sizes, const std::string& pattern,
              std::uint64_t seed, const std::string& out_path) {
  using clock = std::chrono::steady_clock;
  std::string csv = "algo,n,pattern,metric,value\n";
  const auto add = [&](const std::string& algo, int n, const std::string& metric, double value) {
    csv += algo + "," + std::to_string(n) + "," + pattern + "," + metric + "," +
           efwer::format_double17(value) + "\n";
  };

  for (std::size_t idx = 0; idx < sizes.size(); ++idx) {
    const int n = sizes[idx];
    if (n < 1) throw efwer::Error(efwer::errc::invalid_input, "bench sizes must be >= 1");
    efwer::RngStream rng(seed, idx);
    std::vector<double> ev(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
      double v;
      if (pattern == "increasing") {
        v = static_cast<double>(i + 1);
      } else if (pattern == "decreasing") {
        v = static_cast<double>(n - i);
      } else {
        v = std::exp(2.0 * rng.gaussian());
      }
      ev[static_cast<std::size_t>(i)] = v;
    }
    const efwer::EValueVector e(std::move(ev));

    if (kind == "fallback") {
      const double alpha = 0.05;
      const efwer::AlphaBudget budget(
          alpha, std::vector<double>(static_cast<std::size_t>(n), alpha / n));
      efwer::FallbackStats rs;
      auto t0 = clock::now();
      efwer::fallback_reverse(e, budget, &rs);
      auto t1 = clock::now();
      efwer::FallbackStats ss;
      efwer::fallback_stack(e, budget, &ss);
      auto t2 = clock::now();
      add("reverse", n, "back_steps", static_cast<double>(rs.back_steps));
      add("reverse", n, "wall_ms", std::chrono::duration<double, std::milli>(t1 - t0).count());
      add("stack", n, "pushes", static_cast<double>(ss.pushes));
      add("stack", n, "pops", static_cast<double>(ss.pops));
      add("stack", n, "wall_ms", std::chrono::duration<double, std::milli>(t2 - t1).count());
    } else {  // edag
      const efwer::GraphSpec g = efwer::random_dag(n, 0.05, rng, std::min(0.4, 8.0 / n));
      efwer::DagStats ds;
      auto t0 = clock::now();
      const efwer::DagSolver solver(g);
      solver.adjusted(e, &ds);
      auto t1 = clock::now();
      add("edag", n, "node_visits", static_cast<double>(ds.node_visits));
      add("edag", n, "edge_visits", static_cast<double>(ds.edge_visits));
      add("edag", n, "wall_ms", std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  write_output(csv, out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"e-value based family-wise error rate control toolkit"};
  app.require_subcommand(1);

  const std::vector<std::string> methods = {"eholm",           "efallback-naive",
                                            "efallback-reverse", "efallback-stack",
                                            "edag",            "ildag",
                                            "oracle"};

  std::string problem_path;
  std::string evalue_path;
  std::string method;
  std::string out_path;
  std::string manifest_path;
  bool strict = false;
  std::optional<double> alpha_override;
  int trials = 200;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "validate a problem file (and e-values)");
  validate->add_option("--problem", problem_path, "problem JSON file")->required();
  validate->add_option("--evalues", evalue_path, "e-value CSV file");
  validate->add_flag("--strict", strict, "require budgets to sum to alpha exactly");

  auto* adjust = app.add_subcommand("adjust", "compute adjusted e-values");
  adjust->add_option("--problem", problem_path, "problem JSON file")->required();
  adjust->add_option("--evalues", evalue_path, "e-value CSV file")->required();
  adjust->add_option("--method", method, "algorithm")
      ->required()
      ->check(CLI::IsMember(methods));
  adjust->add_flag("--strict", strict, "require budgets to sum to alpha exactly");
  adjust->add_option("--out", out_path, "write CSV here instead of stdout");

  auto* reject = app.add_subcommand("reject", "compute the rejection set");
  reject->add_option("--problem", problem_path, "problem JSON file")->required();
  reject->add_option("--evalues", evalue_path, "e-value CSV file")->required();
  reject->add_option("--method", method, "algorithm")
      ->required()
      ->check(CLI::IsMember(methods));
  double alpha_value = 0.0;
  auto* alpha_opt = reject->add_option("--alpha", alpha_value, "override the level alpha");
  reject->add_flag("--strict", strict, "require budgets to sum to alpha exactly");
  reject->add_option("--out", out_path, "write JSON here instead of stdout");

  auto* verify = app.add_subcommand("verify", "cross-check a method against the oracle");
  verify->add_option("--problem", problem_path, "problem JSON file")->required();
  verify->add_option("--method", method, "algorithm")
      ->required()
      ->check(CLI::IsMember(methods));
  verify->add_option("--trials", trials, "number of random e-value draws");
  verify->add_option("--seed", seed, "random seed")->required();
  verify->add_flag("--strict", strict, "require budgets to sum to alpha exactly");
  verify->add_option("--out", out_path, "write the report here instead of stdout");

  efwer::ExperimentConfig cfg;
  std::string sim_kind;
  std::string budget_scheme = "primary";
  auto* simulate = app.add_subcommand("simulate", "run a sequential stopping-time experiment");
  simulate->add_option("kind", sim_kind, "holm or dag")
      ->required()
      ->check(CLI::IsMember({"holm", "dag"}));
  simulate->add_option("--mu-alt", cfg.mu_alt_grid, "alternative means (repeatable)");
  simulate->add_option("--m", cfg.replications, "Monte Carlo replications");
  simulate->add_option("--seed", seed, "random seed")->required();
  simulate->add_option("--alpha", cfg.alpha, "level alpha");
  simulate->add_option("--horizon", cfg.max_iterations, "maximum iterations per replication");
  simulate->add_option("--hypotheses", cfg.hypotheses, "panel size (holm)");
  simulate->add_option("--alternatives", cfg.alternatives,
                       "number of true alternatives (holm; 0 = global null)");
  simulate->add_option("--budget", budget_scheme, "budget scheme (dag)")
      ->check(CLI::IsMember({"primary", "equal"}));
  simulate->add_option("--out", out_path, "write metrics CSV here instead of stdout");
  simulate->add_option("--manifest", manifest_path,
                       "write the JSON run manifest here instead of stderr");

  std::string bench_kind;
  std::vector<int> bench_sizes;
  std::string pattern = "random";
  auto* bench = app.add_subcommand("bench", "operation counts and wall time");
  bench->add_option("kind", bench_kind, "fallback or edag")
      ->required()
      ->check(CLI::IsMember({"fallback", "edag"}));
  bench->add_option("--n", bench_sizes, "input sizes (repeatable)")->required();
  bench->add_option("--pattern", pattern, "e-value pattern")
      ->check(CLI::IsMember({"random", "increasing", "decreasing"}));
  bench->add_option("--seed", seed, "random seed")->required();
  bench->add_option("--out", out_path, "write CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalidInput;
  }
  if (alpha_opt->count() > 0) alpha_override = alpha_value;
  cfg.seed = seed;
  cfg.budget = budget_scheme == "equal" ? efwer::ExperimentConfig::BudgetScheme::equal
                                        : efwer::ExperimentConfig::BudgetScheme::primary;

  try {
    if (validate->parsed()) return cmd_validate(problem_path, evalue_path, strict);
    if (adjust->parsed()) return cmd_adjust(problem_path, evalue_path, method, strict, out_path);
    if (reject->parsed()) {
      return cmd_reject(problem_path, evalue_path, method, strict, alpha_override, out_path);
    }
    if (verify->parsed()) {
      return cmd_verify(problem_path, method, strict, trials, seed, out_path);
    }
    if (simulate->parsed()) return cmd_simulate(sim_kind, cfg, out_path, manifest_path);
    if (bench->parsed()) return cmd_bench(bench_kind, bench_sizes, pattern, seed, out_path);
  } catch (const efwer::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == efwer::errc::method_mismatch ? kExitMethodMismatch : kExitInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitInvalidInput;
}
