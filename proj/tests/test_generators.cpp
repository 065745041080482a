#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "sirnet/generators.hpp"

using namespace sirnet;
using Catch::Approx;

namespace {

// Per-pair inclusion frequencies over many seeds.
template <class Sample>
std::vector<std::vector<double>> pair_frequencies(std::size_t n, std::size_t seeds, Sample&& sample) {
  std::vector<std::vector<double>> freq(n, std::vector<double>(n, 0.0));
  for (std::uint64_t s = 0; s < seeds; ++s) {
    const Graph g = sample(s);
    for (auto [u, v] : g.edges()) freq[u][v] += 1.0;
  }
  for (auto& row : freq)
    for (auto& f : row) f /= double(seeds);
  return freq;
}

void check_pair_frequencies(const std::vector<std::vector<double>>& freq, std::size_t seeds,
                            const std::function<double(std::size_t, std::size_t)>& p) {
  for (std::size_t i = 0; i < freq.size(); ++i)
    for (std::size_t j = i + 1; j < freq.size(); ++j) {
      const double pij = p(i, j);
      const double sd = std::sqrt(pij * (1 - pij) / double(seeds));
      INFO("pair (" << i << ", " << j << ") expected " << pij);
      CHECK(std::abs(freq[i][j] - pij) <= 4.5 * sd + 1e-12);
    }
}

bool symmetric(const Graph& g) {
  for (Node u = 0; u < g.node_count(); ++u)
    for (Node v : g.neighbours(u))
      if (!g.has_edge(v, u)) return false;
  return true;
}

}  // namespace

TEST_CASE("deterministic families", "[generators]") {
  auto s2 = gen_star(2);
  CHECK(s2.edge_count() == 1);
  auto s5 = gen_star(5);
  CHECK(s5.degree(0) == 4);
  for (Node u = 1; u < 5; ++u) CHECK(s5.degree(u) == 1);

  auto r5 = gen_ring(5);
  for (Node u = 0; u < 5; ++u) CHECK(r5.degree(u) == 2);
  CHECK(gen_complete(4).edge_count() == 6);

  CHECK_THROWS_AS(gen_star(1), ParameterError);
  CHECK_THROWS_AS(gen_ring(2), ParameterError);
  CHECK_THROWS_AS(gen_complete(1), ParameterError);
}

TEST_CASE("gen_er extremes and determinism", "[generators][er]") {
  CHECK(gen_er(30, 0.0, 1).edge_count() == 0);
  CHECK(gen_er(30, 1.0, 1) == gen_complete(30));
  CHECK(gen_er(300, 0.05, 42) == gen_er(300, 0.05, 42));
  CHECK_FALSE(gen_er(300, 0.05, 42) == gen_er(300, 0.05, 43));
  CHECK_THROWS_AS(gen_er(10, 1.5, 0), ParameterError);
  CHECK_THROWS_AS(gen_er(10, -0.1, 0), ParameterError);
  CHECK(symmetric(gen_er(300, 0.05, 42)));
}

TEST_CASE("gen_er mean degree for n=2000, p=3/1999", "[generators][er][statistical]") {
  double sum = 0;
  for (std::uint64_t s = 0; s < 200; ++s) sum += degree_extremes(gen_er(2000, 3.0 / 1999.0, s)).mean();
  const double mean = sum / 200.0;
  CHECK(mean >= 2.8);
  CHECK(mean <= 3.2);
}

TEST_CASE("gen_er total edge count within 4 binomial SD", "[generators][er][statistical]") {
  const std::size_t n = 200, seeds = 200;
  const double p = 0.05;
  double total = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) total += double(gen_er(n, p, 1000 + s).edge_count());
  const double trials = double(seeds) * double(n * (n - 1) / 2);
  CHECK(std::abs(total - trials * p) <= 4.0 * std::sqrt(trials * p * (1 - p)));
}

TEST_CASE("gen_er includes every pair with probability p", "[generators][er][statistical]") {
  const std::size_t seeds = 20000;
  auto freq = pair_frequencies(7, seeds, [](std::uint64_t s) { return gen_er(7, 0.3, s); });
  check_pair_frequencies(freq, seeds, [](std::size_t, std::size_t) { return 0.3; });
}

TEST_CASE("power_law_weights closed form", "[generators][powerlaw]") {
  for (double gamma : {2.2, 2.5, 3.0, 3.5}) {
    auto w = power_law_weights(10000, 4, 100, gamma);
    const auto& p = *w.params;
    // c i0^(-1/(gamma-1)) = m, so w_1 sits just below m.
    CHECK(p.c * std::pow(p.i0, -1.0 / (gamma - 1.0)) == Approx(100.0).epsilon(1e-12));
    CHECK(w.weights[0] == Approx(p.c * std::pow(p.i0 + 1.0, -1.0 / (gamma - 1.0))).epsilon(1e-14));
    CHECK(w.weights[0] <= 100.0);
    CHECK(std::is_sorted(w.weights.rbegin(), w.weights.rend()));
    CHECK(w.weights[0] * w.weights[0] <= w.total);
  }
  // w_1 -> m as i0 grows (larger n at fixed d, m).
  double prev_gap = 1e9;
  for (std::size_t n : {1000, 10000, 100000, 1000000}) {
    const double gap = 20.0 - power_law_weights(n, 4, 20, 3.0).weights[0];
    CHECK(gap >= 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("power_law_weights mean against an independent summation", "[generators][powerlaw]") {
  auto oracle_mean = [](std::size_t n, double d, double m, double gamma) {
    const long double nn = n, g = gamma;
    const long double c = (g - 2) / (g - 1) * d * std::pow(nn, 1 / (g - 1));
    const long double i0 = nn * std::pow(d * (g - 2) / (m * (g - 1)), g - 1);
    long double s = 0;
    for (std::size_t i = n; i >= 1; --i) s += c * std::pow(i0 + (long double)i, -1 / (g - 1));
    return double(s / nn);
  };
  // n=1e4, d=4, m=50, gamma=2.5: the closed form's mean is 3.350, 16% below d
  // because of the i0 shift.
  auto w = power_law_weights(10000, 4, 50, 2.5);
  CHECK(w.mean() == Approx(oracle_mean(10000, 4, 50, 2.5)).epsilon(1e-12));
  CHECK(w.mean() == Approx(3.3502).margin(1e-4));
  // Where i0 is small the mean is within 2% of d.
  auto w3 = power_law_weights(10000, 4, 200, 3.0);
  CHECK(w3.mean() == Approx(oracle_mean(10000, 4, 200, 3.0)).epsilon(1e-12));
  CHECK(std::abs(w3.mean() - 4.0) / 4.0 < 0.02);
}

TEST_CASE("power_law_weights tail count scales like k^(1-gamma)", "[generators][powerlaw]") {
  auto w = power_law_weights(10000, 4, 100, 3.0);
  std::vector<double> lx, ly;
  for (int s = 0; s < 12; ++s) {
    const double k = 5.0 * std::pow(10.0, s / 11.0);
    const auto count = std::count_if(w.weights.begin(), w.weights.end(), [&](double x) { return x >= k; });
    lx.push_back(std::log(k));
    ly.push_back(std::log(double(count)));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / 12, my = std::accumulate(ly.begin(), ly.end(), 0.0) / 12;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 12; ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope >= -2.3);
  CHECK(slope <= -1.7);
}

TEST_CASE("weight sequence validation", "[generators][powerlaw]") {
  CHECK_THROWS_WITH(make_weight_sequence({10, 1, 1}),
                    Catch::Matchers::ContainsSubstring("100") && Catch::Matchers::ContainsSubstring("12"));
  CHECK_THROWS_AS(make_weight_sequence({1, 2}), ParameterError);
  CHECK_THROWS_AS(make_weight_sequence({1, 0}), ParameterError);
  CHECK_THROWS_AS(make_weight_sequence({}), ParameterError);
  CHECK_THROWS_AS(power_law_weights(100, 4, 50, 2.0), ParameterError);
  CHECK_THROWS_AS(power_law_weights(100, 60, 50, 2.5), ParameterError);
}

TEST_CASE("Chung-Lu pair probabilities", "[generators][chunglu]") {
  auto two = make_weight_sequence({1, 1});
  CHECK(two.pair_probability(0, 1) == 0.5);

  // Uniform weights w_i = np reproduce G(n, p) exactly.
  const std::size_t n = 50;
  const double p = 0.1;
  auto uniform = make_weight_sequence(std::vector<double>(n, double(n) * p));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) CHECK(uniform.pair_probability(i, j) == Approx(p).epsilon(1e-14));
}

TEST_CASE("Chung-Lu sampler includes pairs with w_i w_j / S", "[generators][chunglu][statistical]") {
  auto w = make_weight_sequence({3.0, 2.5, 2.0, 1.2, 1.0, 0.6, 0.3});
  const std::size_t seeds = 20000;
  auto freq = pair_frequencies(7, seeds, [&](std::uint64_t s) { return gen_chung_lu(w, s); });
  check_pair_frequencies(freq, seeds, [&](std::size_t i, std::size_t j) { return w.pair_probability(i, j); });
}

TEST_CASE("Chung-Lu per-node expected degree on n=200", "[generators][chunglu][statistical]") {
  auto w = power_law_weights(200, 3, 12, 2.5);
  const std::size_t seeds = 2000;
  std::vector<double> sum(200, 0.0), sumsq(200, 0.0);
  for (std::uint64_t s = 0; s < seeds; ++s) {
    auto g = gen_chung_lu(w, s);
    for (Node u = 0; u < 200; ++u) {
      const double k = double(g.degree(u));
      sum[u] += k;
      sumsq[u] += k * k;
    }
  }
  int outside = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    double expected = 0;
    for (std::size_t j = 0; j < 200; ++j)
      if (j != i) expected += w.pair_probability(i, j);
    CHECK(expected == Approx(w.weights[i] * (1 - w.weights[i] / w.total)).epsilon(1e-12));
    const double mean = sum[i] / double(seeds);
    const double var = sumsq[i] / double(seeds) - mean * mean;
    if (std::abs(mean - expected) > 4.0 * std::sqrt(var / double(seeds)) + 1e-12) ++outside;
  }
  CHECK(outside <= 1);
}

TEST_CASE("Chung-Lu node 1 degree, n=5000, d=4, m=60, gamma=2.5", "[generators][chunglu][statistical]") {
  auto w = power_law_weights(5000, 4, 60, 2.5);
  double expected = 0;
  for (std::size_t j = 1; j < w.size(); ++j) expected += w.pair_probability(0, j);
  double sum = 0, sumsq = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const double k = double(gen_chung_lu(w, 77 + s).degree(0));
    sum += k;
    sumsq += k * k;
  }
  const double mean = sum / 100, se = std::sqrt((sumsq / 100 - mean * mean) / 99);
  CHECK(std::abs(mean - expected) <= 3 * se);
  CHECK(gen_chung_lu(w, 5) == gen_chung_lu(w, 5));
}

TEST_CASE("Pareto kernel closed form", "[generators][kernel]") {
  auto k = pareto_kernel(3.0, 10);
  for (double y : {0.0, 0.3, 0.9, 0.999}) CHECK(k(0.0, y) == 0.0);
  const double x = 1.0 - std::pow(2.0, -3.0);
  CHECK(k(x, x) == Approx(0.2).epsilon(1e-14));
  CHECK(k(0.2, 0.7) == Approx(k(0.7, 0.2)).epsilon(1e-15));
  CHECK(k.probability(0.9999, 0.9999) == 1.0);
  CHECK_THROWS_AS(pareto_kernel(2.0, 10), ParameterError);
}

TEST_CASE("Pareto marginal has tail (1+t)^-gamma", "[generators][kernel][statistical]") {
  const double gamma = 3.0;
  auto k = pareto_kernel(gamma, 1.0);
  Rng rng(99);
  const std::size_t draws = 200000;
  std::vector<double> t{0.1, 0.5, 1.0, 2.0, 4.0};
  std::vector<std::size_t> above(t.size(), 0);
  for (std::size_t i = 0; i < draws; ++i) {
    const double v = k.rank_one->marginal(rng.uniform());
    for (std::size_t j = 0; j < t.size(); ++j) above[j] += v > t[j];
  }
  for (std::size_t j = 0; j < t.size(); ++j) {
    const double p = std::pow(1 + t[j], -gamma);
    const double freq = double(above[j]) / double(draws);
    CHECK(std::abs(freq - p) <= 4 * std::sqrt(p * (1 - p) / double(draws)));
  }
}

TEST_CASE("constant kernel graphs match G(n, p) pair probabilities", "[generators][kernel][statistical]") {
  const std::size_t seeds = 20000;
  auto k = constant_kernel(0.3, 7);
  auto freq = pair_frequencies(7, seeds, [&](std::uint64_t s) { return gen_kernel_graph(7, k, s).graph; });
  check_pair_frequencies(freq, seeds, [](std::size_t, std::size_t) { return 0.3; });
  CHECK(gen_kernel_graph(100, constant_kernel(0.0, 100), 1).graph.edge_count() == 0);
}

TEST_CASE("general (non rank-one) kernels use per-pair sampling", "[generators][kernel][statistical]") {
  KernelSpec k;
  k.n = 7;
  k.kernel = [](double x, double y) { return 0.5 * (x + y); };
  const std::size_t seeds = 4000;
  double total = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) total += double(gen_kernel_graph(7, k, s).graph.edge_count());
  // E[W(X, Y)] = 1/2 over 21 pairs.
  const double mean = total / double(seeds);
  CHECK(mean == Approx(10.5).margin(4 * std::sqrt(21 * 0.25 / double(seeds)) + 0.2));
}

TEST_CASE("Pareto kernel graph mean degree, gamma=4, n=5000", "[generators][kernel][statistical]") {
  const double gamma = 4.0, n = 5000;
  auto k = pareto_kernel(gamma, n);
  // Oracle: (n-1) times the double integral of the clamped kernel.
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double x) {
    return gauss_kronrod<double, 61>::integrate([&](double y) { return k.probability(x, y); }, 0.0, 1.0, 15, 1e-12);
  };
  const double integral = gauss_kronrod<double, 61>::integrate(inner, 0.0, 1.0, 15, 1e-10);
  const double expected = (n - 1) * integral;
  CHECK(expected == Approx(1.0 / (gamma - 1.0)).epsilon(0.01));
  double sum = 0;
  for (std::uint64_t s = 0; s < 40; ++s) sum += degree_extremes(gen_kernel_graph(5000, k, s).graph).mean();
  CHECK(std::abs(sum / 40 - expected) <= 0.1 * expected);
}

TEST_CASE("kernel clamp count matches a brute-force count", "[generators][kernel]") {
  auto k = pareto_kernel(2.5, 30);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto kg = gen_kernel_graph(30, k, seed);
    std::size_t brute = 0;
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = i + 1; j < 30; ++j) brute += k(kg.marks[i], kg.marks[j]) > 1.0;
    CHECK(kg.clamp_count == brute);
    CHECK(symmetric(kg.graph));
  }
  CHECK(gen_kernel_graph(500, k, 3).graph == gen_kernel_graph(500, k, 3).graph);
}
