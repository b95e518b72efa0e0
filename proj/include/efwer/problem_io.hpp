#pragma once

// Problem file formats: the JSON graph specification and the companion
// e-value CSV. Numbers serialize with 17 significant digits so parsing them
// back reproduces the exact doubles.

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "efwer/graph.hpp"
#include "efwer/seqsim.hpp"  // format_double17
#include "efwer/types.hpp"

#include "json.hpp"

namespace efwer {

enum class ProblemShape { explicit_graph, holm, chain };

inline const char* shape_name(ProblemShape s) {
  switch (s) {
    case ProblemShape::holm: return "holm";
    case ProblemShape::chain: return "chain";
    default: return "explicit";
  }
}

struct ProblemFile {
  GraphSpec graph;
  ProblemShape shape = ProblemShape::explicit_graph;
};

/// Parses {alpha, nodes: [{id, alpha_i}], edges: [{from, to, q}]}. The
/// shorthand {"shape": "holm", "n": k} builds the complete uniform graph with
/// budgets alpha/k; {"shape": "chain", nodes: [...]} builds the fallback
/// chain. Node budgets accept "alpha_i" or "alpha" as the key.
inline ProblemFile parse_problem_json(const std::string& text, bool strict_budget = false) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw Error(errc::invalid_input, std::string("problem file is not valid JSON: ") + ex.what());
  }
  try {
    if (!j.contains("alpha")) throw Error(errc::invalid_input, "problem file needs \"alpha\"");
    const double alpha = j.at("alpha").get<double>();

    ProblemShape shape = ProblemShape::explicit_graph;
    if (j.contains("shape")) {
      const std::string s = j.at("shape").get<std::string>();
      if (s == "holm") {
        shape = ProblemShape::holm;
      } else if (s == "chain") {
        shape = ProblemShape::chain;
      } else {
        throw Error(errc::invalid_input, "unknown shape \"" + s + "\" (expected holm or chain)");
      }
    }

    if (shape == ProblemShape::holm) {
      if (!j.contains("n")) throw Error(errc::invalid_input, "shape holm needs \"n\"");
      return ProblemFile{complete_uniform_graph(j.at("n").get<int>(), alpha), shape};
    }

    if (!j.contains("nodes") || !j.at("nodes").is_array() || j.at("nodes").empty()) {
      throw Error(errc::invalid_input, "problem file needs a nonempty \"nodes\" array");
    }
    const auto& nodes = j.at("nodes");
    const int n = static_cast<int>(nodes.size());
    std::vector<double> budgets(static_cast<std::size_t>(n), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (const auto& node : nodes) {
      const int id = node.at("id").get<int>();
      if (id < 1 || id > n) {
        throw Error(errc::bad_node_id,
                    "node id " + std::to_string(id) + " outside 1.." + std::to_string(n));
      }
      if (seen[static_cast<std::size_t>(id - 1)]) {
        throw Error(errc::invalid_input, "duplicate node id " + std::to_string(id));
      }
      seen[static_cast<std::size_t>(id - 1)] = 1;
      const char* key = node.contains("alpha_i") ? "alpha_i" : "alpha";
      budgets[static_cast<std::size_t>(id - 1)] = node.at(key).get<double>();
    }

    if (shape == ProblemShape::chain) {
      GraphSpec g = chain_graph(budgets, alpha);
      (void)AlphaBudget(alpha, budgets, strict_budget);  // re-check in strict mode
      return ProblemFile{std::move(g), shape};
    }

    std::vector<Edge> edges;
    if (j.contains("edges")) {
      for (const auto& ed : j.at("edges")) {
        edges.push_back(Edge{ed.at("from").get<int>(), ed.at("to").get<int>(),
                             ed.at("q").get<double>()});
      }
    }
    return ProblemFile{GraphSpec(n, std::move(edges), AlphaBudget(alpha, budgets, strict_budget)),
                       shape};
  } catch (const nlohmann::json::exception& ex) {
    throw Error(errc::invalid_input, std::string("malformed problem file: ") + ex.what());
  }
}

inline std::string problem_to_json(const GraphSpec& g, ProblemShape shape) {
  nlohmann::json j;
  j["alpha"] = g.alpha();
  if (shape == ProblemShape::holm) {
    j["shape"] = "holm";
    j["n"] = g.size();
    return j.dump(2) + "\n";
  }
  if (shape == ProblemShape::chain) j["shape"] = "chain";
  nlohmann::json nodes = nlohmann::json::array();
  for (int i = 1; i <= g.size(); ++i) {
    nodes.push_back({{"id", i}, {"alpha_i", g.budget()[i - 1]}});
  }
  j["nodes"] = std::move(nodes);
  if (shape == ProblemShape::explicit_graph) {
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : g.edges()) {
      edges.push_back({{"from", e.from}, {"to", e.to}, {"q", e.q}});
    }
    j["edges"] = std::move(edges);
  }
  return j.dump(2) + "\n";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parses the e-value CSV with header "id,e"; ids must cover 1..n exactly
/// once. Pass expected_n <= 0 to infer n from the row count.
inline EValueVector parse_evalue_csv(const std::string& text, int expected_n = 0) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line) != "id,e") {
    throw Error(errc::invalid_input, "e-value CSV must start with the header \"id,e\"");
  }
  std::vector<std::pair<int, double>> rows;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    const std::size_t comma = t.find(',');
    if (comma == std::string::npos) {
      throw Error(errc::invalid_input, "malformed e-value CSV row: " + t);
    }
    try {
      rows.emplace_back(std::stoi(t.substr(0, comma)), std::stod(t.substr(comma + 1)));
    } catch (const std::exception&) {
      throw Error(errc::invalid_input, "malformed e-value CSV row: " + t);
    }
  }
  const int n = expected_n > 0 ? expected_n : static_cast<int>(rows.size());
  if (static_cast<int>(rows.size()) != n) {
    throw Error(errc::invalid_input, "e-value CSV has " + std::to_string(rows.size()) +
                                         " rows, expected " + std::to_string(n));
  }
  std::vector<double> values(static_cast<std::size_t>(n), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& [id, v] : rows) {
    if (id < 1 || id > n) {
      throw Error(errc::bad_node_id,
                  "e-value id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    }
    if (seen[static_cast<std::size_t>(id - 1)]) {
      throw Error(errc::invalid_input, "duplicate e-value id " + std::to_string(id));
    }
    seen[static_cast<std::size_t>(id - 1)] = 1;
    values[static_cast<std::size_t>(id - 1)] = v;
  }
  return EValueVector(std::move(values));
}

inline std::string evalues_to_csv(const EValueVector& e) {
  std::string out = "id,e\n";
  for (int i = 1; i <= e.size(); ++i) {
    out += std::to_string(i);
    out += ',';
    out += format_double17(e[i - 1]);
    out += '\n';
  }
  return out;
}

}  // namespace efwer
