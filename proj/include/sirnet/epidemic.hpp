#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "sirnet/error.hpp"
#include "sirnet/graph.hpp"
#include "sirnet/rng.hpp"

namespace sirnet {

enum class Status : std::uint8_t { susceptible, infected, removed };

struct EpidemicConfig {
  double beta = 0;             // per-edge, per-slot transmission probability
  std::vector<Node> initial;   // X(0)
  std::uint64_t seed = 0;
};

inline void validate_initial(const Graph& g, const std::vector<Node>& initial) {
  if (initial.empty()) throw ParameterError("initial infective set is empty");
  for (Node u : initial)
    if (u >= g.node_count())
      throw ParameterError("initial infective " + std::to_string(u) + " out of range");
}

inline void validate(const Graph& g, const EpidemicConfig& cfg) {
  if (!(cfg.beta >= 0.0 && cfg.beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  validate_initial(g, cfg.initial);
}

/// Per-node S/I/R statuses plus the current infective list (sorted).
struct SimState {
  std::vector<Status> status;
  std::vector<Node> infectives;
  std::size_t t = 0;
  std::size_t removed = 0;

  bool extinct() const noexcept { return infectives.empty(); }
};

inline SimState initial_state(const Graph& g, std::vector<Node> initial) {
  validate_initial(g, initial);
  SimState s;
  s.status.assign(g.node_count(), Status::susceptible);
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
  for (Node u : initial) s.status[u] = Status::infected;
  s.infectives = std::move(initial);
  return s;
}

/// Independent Bernoulli(beta) infection attempts keyed by (infective, target).
/// The same uniform is used for a directed pair at every beta, which couples
/// runs monotonically in beta; the result does not depend on call order.
struct CoupledAttempts {
  std::uint64_t seed;
  double beta;
  bool operator()(Node from, Node to) const { return keyed_uniform(seed, from, to) < beta; }
};

/// One Reed-Frost slot. Every infective attempts each susceptible neighbour
/// once, in sorted (infective, neighbour) order; a susceptible node becomes
/// infected if any attempt on it succeeds. All current infectives are removed
/// at the end of the slot. `attempt(from, to)` realizes one attempt.
template <class Attempt>
SimState reed_frost_step(SimState s, const Graph& g, Attempt&& attempt) {
  std::vector<Node> next;
  for (Node v : s.infectives) {
    for (Node u : g.neighbours(v)) {
      if (s.status[u] != Status::susceptible) continue;
      if (attempt(v, u)) {
        s.status[u] = Status::infected;
        next.push_back(u);
      }
    }
  }
  // New infectives were marked immediately so later attempts skip them; the
  // current ones are retired now.
  for (Node v : s.infectives) s.status[v] = Status::removed;
  s.removed += s.infectives.size();
  std::sort(next.begin(), next.end());
  s.infectives = std::move(next);
  ++s.t;
  return s;
}

/// Sequential-stream variant: draws attempts from `rng` in slot order.
inline SimState reed_frost_step(SimState s, const Graph& g, double beta, Rng& rng) {
  return reed_frost_step(std::move(s), g, [&](Node, Node) { return rng.bernoulli(beta); });
}

struct EpidemicOutcome {
  std::size_t final_removed = 0;     // |Y(∞)|
  std::vector<Node> removed_set;     // sorted
  double extinction_time = 0;        // last slot with an infective (continuous time for CT)
  std::uint64_t trial_seed = 0;
  std::vector<std::size_t> infective_counts;  // per slot; Reed-Frost only
};

/// Runs Reed-Frost slots until no infectives remain.
template <class Attempt>
EpidemicOutcome run_reed_frost_with(const Graph& g, std::vector<Node> initial, Attempt&& attempt) {
  SimState s = initial_state(g, std::move(initial));
  EpidemicOutcome out;
  out.infective_counts.push_back(s.infectives.size());
  while (true) {
    s = reed_frost_step(std::move(s), g, attempt);
    if (s.extinct()) break;
    out.infective_counts.push_back(s.infectives.size());
  }
  out.extinction_time = double(s.t - 1);
  out.final_removed = s.removed;
  out.removed_set.reserve(s.removed);
  for (Node u = 0; u < g.node_count(); ++u)
    if (s.status[u] == Status::removed) out.removed_set.push_back(u);
  return out;
}

inline EpidemicOutcome run_reed_frost(const Graph& g, const EpidemicConfig& cfg) {
  validate(g, cfg);
  auto out = run_reed_frost_with(g, cfg.initial, CoupledAttempts{cfg.seed, cfg.beta});
  out.trial_seed = cfg.seed;
  return out;
}

// ---------------------------------------------------------------------------
// Bond percolation

/// Edge retention keyed by the unordered pair; coupled monotonically in beta.
struct CoupledRetention {
  std::uint64_t seed;
  double beta;
  bool operator()(Node u, Node v) const {
    return keyed_uniform(derive_seed(seed, {0x70657263ULL}), std::min(u, v), std::max(u, v)) < beta;
  }
};

template <class Keep>
Graph percolate_with(const Graph& g, Keep&& keep) {
  std::vector<Edge> kept;
  for (auto [u, v] : g.edges())
    if (keep(u, v)) kept.emplace_back(u, v);
  return GraphBuilder::from_sorted_unique(g.node_count(), kept);
}

/// Spanning subgraph keeping each edge independently with probability beta.
inline Graph percolate(const Graph& g, double beta, std::uint64_t seed) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  return percolate_with(g, CoupledRetention{seed, beta});
}

/// Union of the percolation components containing the initial nodes,
/// explored lazily: `keep(u, v)` is only consulted for edges the search
/// reaches. extinction_time is the BFS depth of the explored set, an upper
/// bound on the number of slots rather than a simulated time.
template <class Keep>
EpidemicOutcome final_set_with(const Graph& g, std::vector<Node> initial, Keep&& keep) {
  validate_initial(g, initial);
  std::sort(initial.begin(), initial.end());
  initial.erase(std::unique(initial.begin(), initial.end()), initial.end());
  std::vector<std::uint8_t> seen(g.node_count(), 0);
  std::vector<Node> frontier = initial, next;
  for (Node u : initial) seen[u] = 1;
  EpidemicOutcome out;
  std::size_t depth = 0;
  while (!frontier.empty()) {
    next.clear();
    for (Node u : frontier) {
      for (Node v : g.neighbours(u)) {
        if (seen[v] || !keep(u, v)) continue;
        seen[v] = 1;
        next.push_back(v);
      }
    }
    if (!next.empty()) ++depth;
    std::swap(frontier, next);
  }
  for (Node u = 0; u < g.node_count(); ++u)
    if (seen[u]) out.removed_set.push_back(u);
  out.final_removed = out.removed_set.size();
  out.extinction_time = double(depth);
  return out;
}

inline EpidemicOutcome final_set_via_percolation(const Graph& g, const EpidemicConfig& cfg) {
  validate(g, cfg);
  auto out = final_set_with(g, cfg.initial, CoupledRetention{cfg.seed, cfg.beta});
  out.trial_seed = cfg.seed;
  return out;
}

// ---------------------------------------------------------------------------
// Continuous-time SIR with a general infectious period

enum class PeriodKind { deterministic, exponential };

/// Infectious period J (deterministic tau, or exponential with rate mu) and
/// contact rate lambda along each edge.
struct InfectiousPeriodLaw {
  PeriodKind kind = PeriodKind::exponential;
  double param = 1;   // tau or mu
  double lambda = 1;

  static InfectiousPeriodLaw deterministic(double tau, double lambda) {
    return {PeriodKind::deterministic, tau, lambda};
  }
  static InfectiousPeriodLaw exponential(double mu, double lambda) {
    return {PeriodKind::exponential, mu, lambda};
  }

  void validate() const {
    if (!(param > 0.0) || !(lambda > 0.0))
      throw ParameterError("infectious period law needs positive parameters");
  }

  /// Draws J from a uniform in [0, 1).
  double sample(double u) const {
    return kind == PeriodKind::deterministic ? param : -std::log1p(-u) / param;
  }
};

/// p_J = 1 - E[exp(-lambda J)].
inline double effective_transmissibility(const InfectiousPeriodLaw& law) {
  law.validate();
  if (law.kind == PeriodKind::deterministic) return -std::expm1(-law.lambda * law.param);
  return law.lambda / (law.lambda + law.param);
}

/// Event-driven SIR: an infected node u draws J_u and, per neighbour, an
/// exponential(lambda) contact delay; it transmits along edges whose delay is
/// below J_u. Infection times are first-passage times over transmitting edges.
inline EpidemicOutcome run_ct_sir(const Graph& g, const InfectiousPeriodLaw& law,
                                  std::vector<Node> initial, std::uint64_t seed) {
  law.validate();
  validate_initial(g, initial);
  const auto period_seed = derive_seed(seed, {0x4aULL});
  const auto contact_seed = derive_seed(seed, {0x45ULL});
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> infected_at(g.node_count(), inf);
  std::vector<std::uint8_t> done(g.node_count(), 0);
  using Item = std::pair<double, Node>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (Node u : initial) {
    infected_at[u] = 0.0;
    queue.emplace(0.0, u);
  }
  EpidemicOutcome out;
  out.trial_seed = seed;
  while (!queue.empty()) {
    auto [t, u] = queue.top();
    queue.pop();
    if (done[u]) continue;
    done[u] = 1;
    const double period = law.sample(keyed_uniform(period_seed, u, 0));
    out.extinction_time = std::max(out.extinction_time, t + period);
    for (Node v : g.neighbours(u)) {
      if (done[v]) continue;
      const double delay = -std::log1p(-keyed_uniform(contact_seed, u, v)) / law.lambda;
      if (delay < period && t + delay < infected_at[v]) {
        infected_at[v] = t + delay;
        queue.emplace(t + delay, v);
      }
    }
  }
  for (Node u = 0; u < g.node_count(); ++u)
    if (done[u]) out.removed_set.push_back(u);
  out.final_removed = out.removed_set.size();
  return out;
}

}  // namespace sirnet
