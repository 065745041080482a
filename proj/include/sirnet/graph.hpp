#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sirnet {

using Node = std::uint32_t;
using Edge = std::pair<Node, Node>;

class GraphError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Immutable undirected simple graph in compressed adjacency (CSR) form.
/// Neighbour lists are sorted and free of duplicates and self-loops.
class Graph {
 public:
  Graph() : offsets_{0} {}

  std::size_t node_count() const noexcept { return offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return neighbours_.size() / 2; }
  bool empty() const noexcept { return node_count() == 0; }

  std::span<const Node> neighbours(Node u) const {
    return {neighbours_.data() + offsets_[u], neighbours_.data() + offsets_[u + 1]};
  }
  std::size_t degree(Node u) const { return offsets_[u + 1] - offsets_[u]; }

  bool has_edge(Node u, Node v) const {
    auto adj = neighbours(u);
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  /// Edges as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(edge_count());
    for (Node u = 0; u < node_count(); ++u)
      for (Node v : neighbours(u))
        if (u < v) out.emplace_back(u, v);
    return out;
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  friend struct GraphBuilder;
  std::vector<std::size_t> offsets_;
  std::vector<Node> neighbours_;
};

struct BuildResult {
  Graph graph;
  std::size_t dropped_self_loops = 0;
};

struct GraphBuilder {
  /// Builds from already-normalized edges: u < v, sorted, unique.
  static Graph from_sorted_unique(std::size_t n, std::span<const Edge> edges) {
    Graph g;
    g.offsets_.assign(n + 1, 0);
    for (auto [u, v] : edges) {
      ++g.offsets_[u + 1];
      ++g.offsets_[v + 1];
    }
    std::partial_sum(g.offsets_.begin(), g.offsets_.end(), g.offsets_.begin());
    g.neighbours_.resize(2 * edges.size());
    std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : edges) {
      g.neighbours_[cursor[u]++] = v;
      g.neighbours_[cursor[v]++] = u;
    }
    for (Node u = 0; u < n; ++u) {
      auto first = g.neighbours_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u]);
      auto last = g.neighbours_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[u + 1]);
      std::sort(first, last);
    }
    return g;
  }
};

/// Symmetrizes, deduplicates and drops self-loops. Throws GraphError naming
/// the first pair with an endpoint outside [0, n).
inline BuildResult build_graph(std::size_t n, std::span<const Edge> pairs) {
  if (n > std::numeric_limits<Node>::max()) throw GraphError("node count exceeds Node range");
  BuildResult result;
  std::vector<Edge> normalized;
  normalized.reserve(pairs.size());
  for (auto [u, v] : pairs) {
    if (u >= n || v >= n) {
      std::ostringstream msg;
      msg << "edge (" << u << ", " << v << ") out of range for n = " << n;
      throw GraphError(msg.str());
    }
    if (u == v) {
      ++result.dropped_self_loops;
      continue;
    }
    normalized.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(normalized.begin(), normalized.end());
  normalized.erase(std::unique(normalized.begin(), normalized.end()), normalized.end());
  result.graph = GraphBuilder::from_sorted_unique(n, normalized);
  return result;
}

inline BuildResult build_graph(std::size_t n, const std::vector<Edge>& pairs) {
  return build_graph(n, std::span<const Edge>(pairs));
}

struct ComponentLabeling {
  std::vector<std::uint32_t> label;  // per node
  std::vector<std::size_t> sizes;    // per component id

  std::size_t component_count() const noexcept { return sizes.size(); }
};

/// Labels components in order of their smallest node id.
inline ComponentLabeling connected_components(const Graph& g) {
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  const auto n = g.node_count();
  ComponentLabeling out;
  out.label.assign(n, unset);
  std::vector<Node> stack;
  for (Node s = 0; s < n; ++s) {
    if (out.label[s] != unset) continue;
    const auto id = static_cast<std::uint32_t>(out.sizes.size());
    std::size_t size = 0;
    out.label[s] = id;
    stack.push_back(s);
    while (!stack.empty()) {
      Node u = stack.back();
      stack.pop_back();
      ++size;
      for (Node v : g.neighbours(u)) {
        if (out.label[v] == unset) {
          out.label[v] = id;
          stack.push_back(v);
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

struct LargestComponent {
  std::size_t size = 0;
  std::vector<Node> members;  // sorted
};

/// Ties go to the component whose smallest node id is smallest.
inline LargestComponent largest_component(const Graph& g) {
  LargestComponent out;
  if (g.empty()) return out;
  auto cc = connected_components(g);
  // Ids are assigned in order of smallest member, so the first maximum wins.
  auto best = static_cast<std::uint32_t>(
      std::max_element(cc.sizes.begin(), cc.sizes.end()) - cc.sizes.begin());
  out.size = cc.sizes[best];
  out.members.reserve(out.size);
  for (Node u = 0; u < g.node_count(); ++u)
    if (cc.label[u] == best) out.members.push_back(u);
  return out;
}

struct DegreeExtremes {
  std::size_t min = 0;
  std::size_t max = 0;
  std::size_t degree_sum = 0;  // 2m; the mean is degree_sum / n exactly
  std::size_t node_count = 0;

  double mean() const { return node_count ? double(degree_sum) / double(node_count) : 0.0; }
};

inline DegreeExtremes degree_extremes(const Graph& g) {
  DegreeExtremes d;
  d.node_count = g.node_count();
  if (g.empty()) return d;
  d.min = std::numeric_limits<std::size_t>::max();
  for (Node u = 0; u < g.node_count(); ++u) {
    const auto k = g.degree(u);
    d.min = std::min(d.min, k);
    d.max = std::max(d.max, k);
  }
  d.degree_sum = 2 * g.edge_count();
  return d;
}

/// Node of maximum degree, smallest id on ties.
inline Node max_degree_node(const Graph& g) {
  Node best = 0;
  for (Node u = 1; u < g.node_count(); ++u)
    if (g.degree(u) > g.degree(best)) best = u;
  return best;
}

// Edge-list text format: "n m" header, then m lines "u v" (0-indexed).
// Lines whose first non-blank character is '#' are comments.

inline void write_edge_list(std::ostream& os, const Graph& g) {
  os << g.node_count() << ' ' << g.edge_count() << '\n';
  for (auto [u, v] : g.edges()) os << u << ' ' << v << '\n';
}

inline BuildResult read_edge_list(std::istream& is) {
  std::string line;
  auto next_data_line = [&](std::string& out) {
    while (std::getline(is, line)) {
      auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos || line[pos] == '#') continue;
      out = line;
      return true;
    }
    return false;
  };
  std::string data;
  if (!next_data_line(data)) throw GraphError("edge list: missing \"n m\" header");
  std::size_t n = 0, m = 0;
  {
    std::istringstream header(data);
    if (!(header >> n >> m)) throw GraphError("edge list: malformed header: " + data);
  }
  std::vector<Edge> pairs;
  pairs.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    if (!next_data_line(data))
      throw GraphError("edge list: expected " + std::to_string(m) + " edges, got " +
                       std::to_string(i));
    std::istringstream row(data);
    long long u = -1, v = -1;
    if (!(row >> u >> v) || u < 0 || v < 0 || u > std::numeric_limits<Node>::max() ||
        v > std::numeric_limits<Node>::max())
      throw GraphError("edge list: malformed edge line: " + data);
    pairs.emplace_back(static_cast<Node>(u), static_cast<Node>(v));
  }
  return build_graph(n, pairs);
}

}  // namespace sirnet
