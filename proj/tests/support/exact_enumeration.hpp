#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "sirnet/epidemic.hpp"
#include "sirnet/generators.hpp"
#include "sirnet/graph.hpp"
#include "sirnet/rng.hpp"

namespace oracle {

using Rational = boost::multiprecision::cpp_rational;
using Distribution = std::map<std::size_t, Rational>;  // |Y(∞)| -> probability

namespace detail {

struct NeedsAttempt {};

inline void explore_reed_frost(const sirnet::Graph& g, const std::vector<sirnet::Node>& initial,
                               const Rational& beta, std::vector<bool>& script, const Rational& weight,
                               Distribution& out) {
  std::size_t cursor = 0;
  try {
    auto result = sirnet::run_reed_frost_with(g, initial, [&](sirnet::Node, sirnet::Node) {
      if (cursor == script.size()) throw NeedsAttempt{};
      return bool(script[cursor++]);
    });
    out[result.final_removed] += weight;
  } catch (const NeedsAttempt&) {
    script.push_back(true);
    explore_reed_frost(g, initial, beta, script, weight * beta, out);
    script.back() = false;
    explore_reed_frost(g, initial, beta, script, weight * (1 - beta), out);
    script.pop_back();
  }
}

}  // namespace detail

/// Exact |Y(∞)| law of the Reed-Frost chain: every branch of the per-attempt
/// outcome tree is replayed through the simulator itself.
inline Distribution reed_frost_distribution(const sirnet::Graph& g, const std::vector<sirnet::Node>& initial,
                                            const Rational& beta) {
  Distribution out;
  std::vector<bool> script;
  detail::explore_reed_frost(g, initial, beta, script, Rational(1), out);
  return out;
}

/// Exact |Y(∞)| law of the percolation construction over all 2^m edge subsets.
inline Distribution percolation_distribution(const sirnet::Graph& g, const std::vector<sirnet::Node>& initial,
                                             const Rational& beta) {
  const auto edges = g.edges();
  const std::size_t m = edges.size();
  std::map<std::pair<sirnet::Node, sirnet::Node>, std::size_t> index;
  for (std::size_t e = 0; e < m; ++e) index[edges[e]] = e;
  Distribution out;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    Rational weight = 1;
    for (std::size_t e = 0; e < m; ++e) weight *= (mask >> e) & 1 ? beta : 1 - beta;
    auto result = sirnet::final_set_with(g, initial, [&](sirnet::Node u, sirnet::Node v) {
      return (mask >> index.at({std::min(u, v), std::max(u, v)})) & 1;
    });
    out[result.final_removed] += weight;
  }
  return out;
}

/// Connected graphs with n <= 5: path, ring, star and complete for each n,
/// plus `random_count` random connected graphs.
struct NamedGraph {
  std::string name;
  sirnet::Graph graph;
};

inline std::vector<NamedGraph> small_connected_corpus(std::size_t random_count, std::uint64_t seed) {
  using sirnet::Edge;
  using sirnet::Node;
  std::vector<NamedGraph> corpus;
  for (std::size_t n = 2; n <= 5; ++n) {
    std::vector<Edge> path;
    for (Node u = 0; u + 1 < n; ++u) path.emplace_back(u, u + 1);
    corpus.push_back({"path" + std::to_string(n), sirnet::build_graph(n, path).graph});
    corpus.push_back({"star" + std::to_string(n), sirnet::gen_star(n)});
    corpus.push_back({"complete" + std::to_string(n), sirnet::gen_complete(n)});
    if (n >= 3) corpus.push_back({"ring" + std::to_string(n), sirnet::gen_ring(n)});
  }
  sirnet::Rng rng(seed);
  while (corpus.size() < 15 + random_count) {
    const std::size_t n = 3 + rng.below(3);
    std::vector<Edge> e;
    for (Node u = 0; u < n; ++u)
      for (Node v = u + 1; v < n; ++v)
        if (rng.bernoulli(0.5)) e.emplace_back(u, v);
    auto g = sirnet::build_graph(n, e).graph;
    if (sirnet::connected_components(g).component_count() != 1) continue;
    corpus.push_back({"random" + std::to_string(corpus.size() - 14), std::move(g)});
  }
  return corpus;
}

}  // namespace oracle
