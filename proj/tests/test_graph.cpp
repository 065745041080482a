#include <catch_amalgamated.hpp>

#include <algorithm>
#include <set>
#include <sstream>

#include "sirnet/generators.hpp"
#include "sirnet/graph.hpp"

using namespace sirnet;

namespace {

// Independent oracle: BFS from every node over an adjacency matrix.
std::multiset<std::size_t> bfs_component_sizes(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (auto [u, v] : g.edges()) adj[u][v] = adj[v][u] = true;
  std::vector<bool> seen(n, false);
  std::multiset<std::size_t> sizes;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    std::vector<std::size_t> queue{s};
    seen[s] = true;
    for (std::size_t head = 0; head < queue.size(); ++head)
      for (std::size_t v = 0; v < n; ++v)
        if (adj[queue[head]][v] && !seen[v]) {
          seen[v] = true;
          queue.push_back(v);
        }
    sizes.insert(queue.size());
  }
  return sizes;
}

bool symmetric(const Graph& g) {
  for (Node u = 0; u < g.node_count(); ++u)
    for (Node v : g.neighbours(u))
      if (!g.has_edge(v, u) || u == v) return false;
  return true;
}

std::vector<Graph> small_corpus() {
  std::vector<Graph> out;
  for (std::size_t n : {2, 5, 17, 64}) {
    out.push_back(gen_star(n));
    out.push_back(gen_complete(n));
    if (n >= 3) out.push_back(gen_ring(n));
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (double p : {0.02, 0.05, 0.1, 0.3}) out.push_back(gen_er(64, p, seed));
  out.push_back(gen_chung_lu(power_law_weights(64, 3, 8, 2.5), 4));
  out.push_back(gen_kernel_graph(64, pareto_kernel(3.0, 64), 5).graph);
  return out;
}

}  // namespace

TEST_CASE("build_graph constructs, deduplicates and drops self-loops", "[graph]") {
  auto path = build_graph(3, {{0, 1}, {1, 2}});
  CHECK(path.graph.edge_count() == 2);
  CHECK(path.graph.degree(0) == 1);
  CHECK(path.graph.degree(1) == 2);
  CHECK(path.graph.degree(2) == 1);

  auto dup = build_graph(2, {{0, 1}, {1, 0}});
  CHECK(dup.graph.edge_count() == 1);

  auto loop = build_graph(4, {{0, 0}, {0, 1}});
  CHECK(loop.graph.edge_count() == 1);
  CHECK(loop.dropped_self_loops == 1);
}

TEST_CASE("build_graph rejects out-of-range endpoints with the offending pair", "[graph]") {
  CHECK_THROWS_WITH(build_graph(3, {{0, 1}, {2, 3}}), Catch::Matchers::ContainsSubstring("(2, 3)"));
  CHECK_THROWS_AS(build_graph(3, {{5, 0}}), GraphError);
}

TEST_CASE("neighbour lists are sorted and the graph is symmetric", "[graph]") {
  for (const auto& g : small_corpus()) {
    REQUIRE(symmetric(g));
    for (Node u = 0; u < g.node_count(); ++u) {
      auto adj = g.neighbours(u);
      CHECK(std::is_sorted(adj.begin(), adj.end()));
      CHECK(std::adjacent_find(adj.begin(), adj.end()) == adj.end());
    }
  }
}

TEST_CASE("connected_components examples", "[graph]") {
  auto path = build_graph(3, {{0, 1}, {1, 2}}).graph;
  auto cc = connected_components(path);
  CHECK(cc.component_count() == 1);
  CHECK(cc.sizes == std::vector<std::size_t>{3});

  auto empty = build_graph(5, std::vector<Edge>{}).graph;
  cc = connected_components(empty);
  CHECK(cc.component_count() == 5);
  CHECK(std::all_of(cc.sizes.begin(), cc.sizes.end(), [](auto s) { return s == 1; }));

  auto two = build_graph(4, {{0, 1}, {2, 3}}).graph;
  cc = connected_components(two);
  CHECK(std::multiset<std::size_t>(cc.sizes.begin(), cc.sizes.end()) == bfs_component_sizes(two));
  CHECK(cc.sizes == std::vector<std::size_t>{2, 2});
  CHECK(cc.label[0] == cc.label[1]);
  CHECK(cc.label[0] != cc.label[2]);
}

TEST_CASE("connected_components agrees with the BFS oracle on the corpus", "[graph][property]") {
  for (const auto& g : small_corpus()) {
    auto cc = connected_components(g);
    CHECK(std::multiset<std::size_t>(cc.sizes.begin(), cc.sizes.end()) == bfs_component_sizes(g));
    for (auto [u, v] : g.edges()) CHECK(cc.label[u] == cc.label[v]);
    auto lc = largest_component(g);
    CHECK(lc.size == *std::max_element(cc.sizes.begin(), cc.sizes.end()));
    CHECK(lc.members.size() == lc.size);
  }
}

TEST_CASE("largest_component examples", "[graph]") {
  CHECK(largest_component(gen_star(5)).size == 5);
  auto g = build_graph(5, {{0, 1}, {1, 2}, {3, 4}}).graph;
  CHECK(largest_component(g).size == 3);
  auto tie = build_graph(4, {{2, 3}, {0, 1}}).graph;
  CHECK(largest_component(tie).members == std::vector<Node>{0, 1});
}

TEST_CASE("largest component of G(1000, 2/999) is a giant", "[graph][statistical]") {
  // Giant fraction at c = 2 is about 0.797; most seeds land in [0.6n, 0.95n].
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto size = largest_component(gen_er(1000, 2.0 / 999.0, seed)).size;
    if (size >= 600 && size <= 950) ++inside;
  }
  CHECK(inside >= 16);
}

TEST_CASE("degree_extremes examples", "[graph]") {
  auto k5 = degree_extremes(gen_complete(5));
  CHECK(k5.min == 4);
  CHECK(k5.max == 4);
  CHECK(k5.mean() == 4.0);
  auto star = degree_extremes(gen_star(5));
  CHECK(star.min == 1);
  CHECK(star.max == 4);
  CHECK(star.mean() == 8.0 / 5.0);
  auto ring = degree_extremes(gen_ring(7));
  CHECK(ring.min == 2);
  CHECK(ring.max == 2);
  CHECK(ring.mean() == 2.0);
}

TEST_CASE("max_degree_node breaks ties by smallest id", "[graph]") {
  CHECK(max_degree_node(gen_star(9)) == 0);
  CHECK(max_degree_node(gen_ring(9)) == 0);
  auto g = build_graph(5, {{3, 1}, {3, 2}, {4, 0}, {4, 1}}).graph;
  CHECK(max_degree_node(g) == 1);
}

TEST_CASE("edge list round trip and comment handling", "[graph][io]") {
  auto g = gen_er(50, 0.1, 3);
  std::stringstream ss;
  write_edge_list(ss, g);
  auto back = read_edge_list(ss);
  CHECK(back.graph == g);

  std::stringstream commented("# header comment\n3 2\n0 1\n  # inline\n1 2\n");
  CHECK(read_edge_list(commented).graph.edge_count() == 2);

  std::stringstream loops("3 2\n1 1\n0 2\n");
  auto r = read_edge_list(loops);
  CHECK(r.dropped_self_loops == 1);
  CHECK(r.graph.edge_count() == 1);

  std::stringstream short_file("3 2\n0 1\n");
  CHECK_THROWS_AS(read_edge_list(short_file), GraphError);
  std::stringstream bad_range("3 1\n0 7\n");
  CHECK_THROWS_AS(read_edge_list(bad_range), GraphError);
  std::stringstream bad_header("x y\n");
  CHECK_THROWS_AS(read_edge_list(bad_header), GraphError);
}
