#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sirnet/error.hpp"
#include "sirnet/graph.hpp"
#include "sirnet/rng.hpp"

namespace sirnet {

// ---------------------------------------------------------------------------
// Deterministic families

/// Hub is node 0; leaves are 1..n-1.
inline Graph gen_star(std::size_t n) {
  if (n < 2) throw ParameterError("star needs n >= 2");
  std::vector<Edge> e;
  e.reserve(n - 1);
  for (Node v = 1; v < n; ++v) e.emplace_back(0, v);
  return GraphBuilder::from_sorted_unique(n, e);
}

inline Graph gen_ring(std::size_t n) {
  if (n < 3) throw ParameterError("ring needs n >= 3");
  std::vector<Edge> e;
  e.reserve(n);
  e.emplace_back(0, 1);
  e.emplace_back(0, static_cast<Node>(n - 1));
  for (Node u = 1; u + 1 < n; ++u) e.emplace_back(u, u + 1);
  return GraphBuilder::from_sorted_unique(n, e);
}

inline Graph gen_complete(std::size_t n) {
  if (n < 2) throw ParameterError("complete graph needs n >= 2");
  std::vector<Edge> e;
  e.reserve(n * (n - 1) / 2);
  for (Node u = 0; u < n; ++u)
    for (Node v = u + 1; v < n; ++v) e.emplace_back(u, v);
  return GraphBuilder::from_sorted_unique(n, e);
}

// ---------------------------------------------------------------------------
// Erdős-Rényi

/// G(n, p). Walks the lexicographic pair order (0,1), (0,2), ..., (n-2,n-1)
/// with geometric skips; each pair is included independently with
/// probability p.
inline Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge probability must lie in [0, 1]");
  std::vector<Edge> e;
  if (n < 2 || p == 0.0) return GraphBuilder::from_sorted_unique(n, e);
  Rng rng(seed);
  e.reserve(static_cast<std::size_t>(p * double(n) * double(n - 1) / 2 * 1.1) + 16);
  std::uint64_t u = 0, v = 1;
  while (u + 1 < n) {
    const auto skip = rng.geometric_skip(p);
    if (skip >= std::uint64_t(n) * n) break;
    v += skip;
    while (v >= n && u + 1 < n) {
      const auto overflow = v - n;
      ++u;
      v = u + 1 + overflow;
    }
    if (u + 1 >= n) break;
    e.emplace_back(static_cast<Node>(u), static_cast<Node>(v));
    ++v;
    if (v >= n) {
      ++u;
      v = u + 1;
    }
  }
  return GraphBuilder::from_sorted_unique(n, e);
}

// ---------------------------------------------------------------------------
// Rank-one sampling shared by Chung-Lu and rank-one kernels.

namespace detail {

/// Samples edges with p_ij = min(1, scale * a_i * a_j) over all pairs i < j,
/// where a is non-increasing. Candidate pairs are visited in lexicographic
/// order with geometric skips and thinning, so the run time is O(n + m).
template <class Emit>
void sample_rank_one(std::span<const double> a, double scale, Rng& rng, Emit&& emit) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    std::size_t j = i + 1;
    double p = std::min(1.0, scale * a[i] * a[j]);
    while (j < n && p > 0.0) {
      if (p < 1.0) {
        const auto skip = rng.geometric_skip(p);
        if (skip >= n - j) break;
        j += skip;
      }
      const double q = std::min(1.0, scale * a[i] * a[j]);
      if (rng.uniform() < q / p) emit(i, j);
      p = q;
      ++j;
    }
  }
}

/// Number of pairs i < j with scale * a_i * a_j > 1, for non-increasing a.
inline std::size_t count_clamped_pairs(std::span<const double> a, double scale) {
  const std::size_t n = a.size();
  if (n < 2) return 0;
  std::size_t count = 0;
  std::size_t j = n - 1;
  for (std::size_t i = 0; i < n; ++i) {
    while (j > i && scale * a[i] * a[j] <= 1.0) --j;
    if (j <= i) break;
    count += j - i;
  }
  return count;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Chung-Lu expected-degree model

struct PowerLawParams {
  std::size_t n = 0;
  double d = 0;      // target average expected degree
  double m = 0;      // target maximum expected degree
  double gamma = 0;  // power-law exponent
  double c = 0;      // scale
  double i0 = 0;     // index shift
};

/// Expected-degree weights w_1 >= ... >= w_n (stored 0-based: node k has
/// weight weights[k]).
struct WeightSequence {
  std::vector<double> weights;
  double total = 0;
  std::optional<PowerLawParams> params;

  std::size_t size() const noexcept { return weights.size(); }
  double mean() const { return weights.empty() ? 0.0 : total / double(weights.size()); }
  double pair_probability(std::size_t i, std::size_t j) const {
    return std::min(1.0, weights[i] * weights[j] / total);
  }
};

/// Validates ordering, positivity and the admissibility condition w_1^2 <= Σ w.
inline WeightSequence make_weight_sequence(std::vector<double> w) {
  if (w.empty()) throw ParameterError("weight sequence is empty");
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw ParameterError("weights must be positive and finite");
    if (i > 0 && w[i] > w[i - 1]) throw ParameterError("weights must be non-increasing");
  }
  WeightSequence seq;
  seq.total = std::accumulate(w.begin(), w.end(), 0.0);
  if (w.front() * w.front() > seq.total) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "inadmissible weights: w_1^2 = " << w.front() * w.front()
        << " exceeds sum of weights = " << seq.total;
    throw ParameterError(msg.str());
  }
  seq.weights = std::move(w);
  return seq;
}

/// w_i = c (i0 + i)^(-1/(gamma-1)), i = 1..n, with
/// c = (gamma-2)/(gamma-1) d n^(1/(gamma-1)) and
/// i0 = n (d (gamma-2) / (m (gamma-1)))^(gamma-1).
inline WeightSequence power_law_weights(std::size_t n, double d, double m, double gamma) {
  if (n == 0) throw ParameterError("power-law weights need n >= 1");
  if (!(gamma > 2.0)) throw ParameterError("power-law exponent must exceed 2");
  if (!(d > 0.0 && d <= m)) throw ParameterError("need 0 < d <= m");
  PowerLawParams p{n, d, m, gamma, 0, 0};
  const double nn = double(n);
  p.c = (gamma - 2.0) / (gamma - 1.0) * d * std::pow(nn, 1.0 / (gamma - 1.0));
  p.i0 = nn * std::pow(d * (gamma - 2.0) / (m * (gamma - 1.0)), gamma - 1.0);
  std::vector<double> w(n);
  for (std::size_t i = 1; i <= n; ++i) w[i - 1] = p.c * std::pow(p.i0 + double(i), -1.0 / (gamma - 1.0));
  auto seq = make_weight_sequence(std::move(w));
  seq.params = p;
  return seq;
}

/// p_ij = w_i w_j / Σ w for i < j; self-loops are not sampled.
inline Graph gen_chung_lu(const WeightSequence& w, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Edge> e;
  detail::sample_rank_one(std::span<const double>(w.weights), 1.0 / w.total, rng,
                          [&](std::size_t i, std::size_t j) {
                            e.emplace_back(static_cast<Node>(i), static_cast<Node>(j));
                          });
  return GraphBuilder::from_sorted_unique(w.size(), e);
}

// ---------------------------------------------------------------------------
// Kernel (W-) graphs

/// A symmetric kernel W on [0,1]^2 for graphs of a given size n. Edge
/// probabilities are W clamped to [0,1]; the associated integral operator has
/// kernel n W.
struct KernelSpec {
  /// W(x, y) = scale * marginal(x) * marginal(y).
  struct RankOne {
    double scale = 0;
    std::function<double(double)> marginal;
    /// ∫ marginal^2 on [0,1], when known in closed form.
    std::optional<double> marginal_second_moment;
  };

  std::function<double(double, double)> kernel;  // unclamped
  std::optional<RankOne> rank_one;
  std::optional<double> pareto_gamma;
  double n = 0;
  /// Quadrature grid grading exponent: nodes x = 1 - (1 - s)^grading for s on
  /// a uniform midpoint grid. 1 gives the plain midpoint rule.
  double grading = 1.0;

  double operator()(double x, double y) const { return kernel(x, y); }
  double probability(double x, double y) const { return std::clamp(kernel(x, y), 0.0, 1.0); }
};

inline KernelSpec make_rank_one_kernel(double n, double scale, std::function<double(double)> marginal,
                                       std::optional<double> second_moment = std::nullopt) {
  KernelSpec k;
  k.n = n;
  k.rank_one = KernelSpec::RankOne{scale, marginal, second_moment};
  k.kernel = [scale, marginal](double x, double y) { return scale * marginal(x) * marginal(y); };
  return k;
}

/// W ≡ p.
inline KernelSpec constant_kernel(double p, double n) {
  if (!(p >= 0.0)) throw ParameterError("constant kernel value must be non-negative");
  return make_rank_one_kernel(n, p, [](double) { return 1.0; }, 1.0);
}

/// W(x,y) = (gamma-1)/n ((1-x)^(-1/gamma) - 1)((1-y)^(-1/gamma) - 1). For X
/// uniform the marginal has the Pareto tail P(W(X) > t) = (1+t)^(-gamma).
inline KernelSpec pareto_kernel(double gamma, double n) {
  if (!(gamma > 2.0)) throw ParameterError("Pareto kernel needs gamma > 2");
  if (!(n > 0.0)) throw ParameterError("Pareto kernel needs n > 0");
  auto marginal = [gamma](double x) { return std::pow(1.0 - x, -1.0 / gamma) - 1.0; };
  // E[T^2] for the Pareto tail above.
  const double second = 2.0 / ((gamma - 1.0) * (gamma - 2.0));
  auto k = make_rank_one_kernel(n, (gamma - 1.0) / n, marginal, second);
  k.pareto_gamma = gamma;
  // Makes W(x)^2 dx bounded near x = 1 in the graded variable.
  k.grading = std::min(3.0, gamma / (gamma - 2.0));
  return k;
}

struct KernelGraph {
  Graph graph;
  std::vector<double> marks;       // X_i
  std::size_t clamp_count = 0;     // pairs whose W(X_i, X_j) exceeded 1
};

/// Samples X_1..X_n iid uniform, then each pair independently with
/// probability clamp(W(X_i, X_j)).
inline KernelGraph gen_kernel_graph(std::size_t n, const KernelSpec& k, std::uint64_t seed) {
  Rng rng(seed);
  KernelGraph out;
  out.marks.resize(n);
  for (auto& x : out.marks) x = rng.uniform();
  Rng edge_rng = rng.split(1);
  std::vector<Edge> e;

  if (k.rank_one) {
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = k.rank_one->marginal(out.marks[i]);
    std::vector<Node> order(n);
    std::iota(order.begin(), order.end(), Node{0});
    std::stable_sort(order.begin(), order.end(), [&](Node x, Node y) { return a[x] > a[y]; });
    std::vector<double> sorted(n);
    for (std::size_t i = 0; i < n; ++i) sorted[i] = a[order[i]];
    if (k.rank_one->scale > 0.0) {
      detail::sample_rank_one(std::span<const double>(sorted), k.rank_one->scale, edge_rng,
                              [&](std::size_t i, std::size_t j) {
                                Node u = order[i], v = order[j];
                                e.emplace_back(std::min(u, v), std::max(u, v));
                              });
    }
    out.clamp_count = detail::count_clamped_pairs(sorted, k.rank_one->scale);
    std::sort(e.begin(), e.end());
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double w = k(out.marks[i], out.marks[j]);
        if (w > 1.0) ++out.clamp_count;
        if (edge_rng.uniform() < w) e.emplace_back(static_cast<Node>(i), static_cast<Node>(j));
      }
    }
  }
  out.graph = GraphBuilder::from_sorted_unique(n, e);
  return out;
}

}  // namespace sirnet
