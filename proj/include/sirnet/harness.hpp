#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sirnet/epidemic.hpp"
#include "sirnet/generators.hpp"
#include "sirnet/graph.hpp"
#include "sirnet/rng.hpp"
#include "sirnet/spectral.hpp"
#include "sirnet/theory.hpp"

namespace sirnet {

inline constexpr const char* kVersion = "0.1.0";

using json = nlohmann::json;

/// Validation failure naming the offending field.
class SpecError : public std::invalid_argument {
 public:
  SpecError(const std::string& field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// ---------------------------------------------------------------------------
// Parallel trial execution

/// Worker count from SIRNET_THREADS, else the hardware concurrency.
inline std::size_t default_parallelism() {
  if (const char* env = std::getenv("SIRNET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, count) on up to `workers` threads. Results must be
/// written to per-index slots; the first exception is rethrown.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Graph families

struct GeneratedGraph {
  Graph graph;
  std::size_t dropped_self_loops = 0;
  std::size_t clamp_count = 0;
};

inline bool is_random_family(const std::string& f) {
  return f == "er" || f == "chung_lu" || f == "pareto_kernel" || f == "constant_kernel";
}

inline bool is_known_family(const std::string& f) {
  return f == "star" || f == "ring" || f == "complete" || f == "file" || is_random_family(f);
}

namespace detail {

inline double num(const json& params, const std::string& key) {
  if (!params.contains(key)) throw SpecError("params." + key, "missing");
  if (!params[key].is_number()) throw SpecError("params." + key, "must be a number");
  return params[key].get<double>();
}

inline std::size_t count_param(const json& params, const std::string& key) {
  const double v = num(params, key);
  if (!(v >= 0.0) || std::floor(v) != v) throw SpecError("params." + key, "must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

inline std::optional<double> opt_num(const json& params, const std::string& key) {
  if (!params.contains(key)) return std::nullopt;
  return num(params, key);
}

}  // namespace detail

inline KernelSpec kernel_for(const std::string& family, const json& params) {
  const double n = double(detail::count_param(params, "n"));
  if (family == "pareto_kernel") return pareto_kernel(detail::num(params, "gamma"), n);
  if (family == "constant_kernel") return constant_kernel(detail::num(params, "p"), n);
  throw SpecError("family", "not a kernel family: " + family);
}

inline GeneratedGraph make_graph(const std::string& family, const json& params, std::uint64_t seed) {
  GeneratedGraph out;
  if (family == "star") {
    out.graph = gen_star(detail::count_param(params, "n"));
  } else if (family == "ring") {
    out.graph = gen_ring(detail::count_param(params, "n"));
  } else if (family == "complete") {
    out.graph = gen_complete(detail::count_param(params, "n"));
  } else if (family == "er") {
    out.graph = gen_er(detail::count_param(params, "n"), detail::num(params, "p"), seed);
  } else if (family == "chung_lu") {
    auto w = power_law_weights(detail::count_param(params, "n"), detail::num(params, "d"),
                               detail::num(params, "m"), detail::num(params, "gamma"));
    out.graph = gen_chung_lu(w, seed);
  } else if (family == "pareto_kernel" || family == "constant_kernel") {
    auto kg = gen_kernel_graph(detail::count_param(params, "n"), kernel_for(family, params), seed);
    out.graph = std::move(kg.graph);
    out.clamp_count = kg.clamp_count;
  } else if (family == "file") {
    if (!params.contains("path") || !params["path"].is_string()) throw SpecError("params.path", "missing");
    std::ifstream in(params["path"].get<std::string>());
    if (!in) throw SpecError("params.path", "cannot open " + params["path"].get<std::string>());
    auto built = read_edge_list(in);
    out.graph = std::move(built.graph);
    out.dropped_self_loops = built.dropped_self_loops;
  } else {
    throw SpecError("family", "unknown family '" + family + "'");
  }
  return out;
}

inline std::size_t family_node_count(const std::string& family, const json& params) {
  if (family == "file") return make_graph(family, params, 0).graph.node_count();
  return detail::count_param(params, "n");
}

// ---------------------------------------------------------------------------
// Experiment specification

struct SweepAxis {
  std::string param;  // beta, c, lambda, or a family parameter
  std::vector<double> grid;
};

struct ExperimentSpec {
  std::string family = "star";
  json params = json::object();
  std::string engine = "percolation";  // reed-frost | percolation | ct
  double beta = 0.0;
  std::optional<double> c;             // sets beta = c / reference scale
  std::string law;                     // "det:tau" or "exp:mu" for the ct engine
  double lambda = 1.0;
  std::string initial = "random:1";    // node list | hub | random:k | nonhub:k
  std::size_t trials = 100;
  std::uint64_t master_seed = 1;
  std::optional<SweepAxis> sweep;
  bool fixed_graph = false;
  std::string output;
};

inline json to_json(const ExperimentSpec& s) {
  json j;
  j["family"] = s.family;
  j["params"] = s.params;
  j["engine"] = s.engine;
  j["beta"] = s.beta;
  if (s.c) j["c"] = *s.c;
  if (!s.law.empty()) j["law"] = s.law;
  j["lambda"] = s.lambda;
  j["initial"] = s.initial;
  j["trials"] = s.trials;
  j["master_seed"] = s.master_seed;
  if (s.sweep) j["sweep"] = {{"param", s.sweep->param}, {"grid", s.sweep->grid}};
  j["fixed_graph"] = s.fixed_graph;
  if (!s.output.empty()) j["output"] = s.output;
  return j;
}

inline ExperimentSpec spec_from_json(const json& j) {
  if (!j.is_object()) throw SpecError("spec", "must be a JSON object");
  ExperimentSpec s;
  auto get = [&](const char* key, auto& dst) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(dst);
    } catch (const json::exception& e) {
      throw SpecError(key, e.what());
    }
  };
  get("family", s.family);
  if (j.contains("params")) s.params = j["params"];
  get("engine", s.engine);
  get("beta", s.beta);
  if (j.contains("c")) {
    double c = 0;
    get("c", c);
    s.c = c;
  }
  get("law", s.law);
  get("lambda", s.lambda);
  get("initial", s.initial);
  get("trials", s.trials);
  get("master_seed", s.master_seed);
  get("fixed_graph", s.fixed_graph);
  get("output", s.output);
  if (j.contains("sweep")) {
    const auto& sw = j["sweep"];
    if (!sw.is_object() || !sw.contains("param") || !sw.contains("grid"))
      throw SpecError("sweep", "needs 'param' and 'grid'");
    SweepAxis axis;
    try {
      sw["param"].get_to(axis.param);
      sw["grid"].get_to(axis.grid);
    } catch (const json::exception& e) {
      throw SpecError("sweep", e.what());
    }
    s.sweep = axis;
  }
  return s;
}

inline InfectiousPeriodLaw parse_law(const std::string& text, double lambda) {
  auto colon = text.find(':');
  if (colon == std::string::npos) throw SpecError("law", "expected det:tau or exp:mu");
  const auto kind = text.substr(0, colon);
  double value = 0;
  try {
    value = std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw SpecError("law", "bad number in '" + text + "'");
  }
  InfectiousPeriodLaw law;
  if (kind == "det") law = InfectiousPeriodLaw::deterministic(value, lambda);
  else if (kind == "exp") law = InfectiousPeriodLaw::exponential(value, lambda);
  else throw SpecError("law", "unknown law '" + kind + "'");
  try {
    law.validate();
  } catch (const ParameterError& e) {
    throw SpecError("law", e.what());
  }
  return law;
}

/// Initial-infective rule: "hub", "random:k", "nonhub:k" or a comma list.
struct InitialRule {
  enum class Kind { list, hub, random, nonhub } kind = Kind::list;
  std::vector<Node> nodes;
  std::size_t k = 1;

  std::size_t count() const { return kind == Kind::list ? nodes.size() : kind == Kind::hub ? 1 : k; }
};

inline InitialRule parse_initial(const std::string& text) {
  InitialRule r;
  auto parse_k = [&](const std::string& rest) {
    try {
      const long v = std::stol(rest);
      if (v < 1) throw SpecError("initial", "k must be >= 1");
      return static_cast<std::size_t>(v);
    } catch (const std::logic_error&) {
      throw SpecError("initial", "bad count in '" + text + "'");
    }
  };
  if (text == "hub") {
    r.kind = InitialRule::Kind::hub;
  } else if (text.rfind("random:", 0) == 0) {
    r.kind = InitialRule::Kind::random;
    r.k = parse_k(text.substr(7));
  } else if (text.rfind("nonhub:", 0) == 0) {
    r.kind = InitialRule::Kind::nonhub;
    r.k = parse_k(text.substr(7));
  } else {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        const long v = std::stol(item);
        if (v < 0) throw SpecError("initial", "negative node id");
        r.nodes.push_back(static_cast<Node>(v));
      } catch (const std::logic_error&) {
        throw SpecError("initial", "expected hub, random:k, nonhub:k or a node list, got '" + text + "'");
      }
    }
    if (r.nodes.empty()) throw SpecError("initial", "empty node list");
  }
  return r;
}

/// Hub = max-degree node (smallest id on ties); random:k = k distinct uniform
/// picks from `rng`; nonhub:k = the k smallest ids other than the hub.
inline std::vector<Node> choose_initial(const InitialRule& r, const Graph& g, Rng& rng) {
  const std::size_t n = g.node_count();
  switch (r.kind) {
    case InitialRule::Kind::list:
      return r.nodes;
    case InitialRule::Kind::hub:
      return {max_degree_node(g)};
    case InitialRule::Kind::nonhub: {
      if (r.k >= n) throw SpecError("initial", "nonhub:k needs k < n");
      const Node hub = max_degree_node(g);
      std::vector<Node> out;
      for (Node u = 0; out.size() < r.k; ++u)
        if (u != hub) out.push_back(u);
      return out;
    }
    case InitialRule::Kind::random: {
      if (r.k > n) throw SpecError("initial", "random:k needs k <= n");
      // Floyd's algorithm: k distinct picks with k draws.
      std::vector<Node> out;
      for (std::size_t j = n - r.k; j < n; ++j) {
        const auto t = static_cast<Node>(rng.below(j + 1));
        if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
        else out.push_back(static_cast<Node>(j));
      }
      std::sort(out.begin(), out.end());
      return out;
    }
  }
  return {};
}

/// Scale that converts the per-family reproduction parameter c into
/// beta: n-1 (complete), (n-1)p (er), sqrt(n-1) (star), 2 (ring), d
/// (chung_lu), ||T_W|| (kernels), lambda1 (file).
inline double c_scale(const std::string& family, const json& params) {
  if (family == "complete") return double(detail::count_param(params, "n") - 1);
  if (family == "er") return double(detail::count_param(params, "n") - 1) * detail::num(params, "p");
  if (family == "star") return std::sqrt(double(detail::count_param(params, "n") - 1));
  if (family == "ring") return 2.0;
  if (family == "chung_lu") return detail::num(params, "d");
  if (family == "pareto_kernel") return 2.0 / (detail::num(params, "gamma") - 2.0);
  if (family == "constant_kernel") return double(detail::count_param(params, "n")) * detail::num(params, "p");
  if (family == "file") return spectral_radius(make_graph(family, params, 0).graph).lambda1;
  throw SpecError("family", "unknown family '" + family + "'");
}

/// Spec with the sweep axis (if any) fixed at `value` and c resolved to beta.
inline ExperimentSpec resolve_point(ExperimentSpec s, std::optional<double> value) {
  if (value) {
    const auto& p = s.sweep->param;
    if (p == "beta") {
      s.beta = *value;
      s.c.reset();
    } else if (p == "c") {
      s.c = *value;
    } else if (p == "lambda") {
      s.lambda = *value;
    } else {
      s.params[p] = *value;
    }
  }
  s.sweep.reset();
  if (s.c) {
    const double scale = c_scale(s.family, s.params);
    if (!(scale > 0.0)) throw SpecError("c", "family has zero reference scale");
    s.beta = *s.c / scale;
  }
  return s;
}

inline void validate(const ExperimentSpec& s) {
  if (!is_known_family(s.family)) throw SpecError("family", "unknown family '" + s.family + "'");
  if (!s.params.is_object()) throw SpecError("params", "must be an object");
  if (s.engine != "reed-frost" && s.engine != "percolation" && s.engine != "ct")
    throw SpecError("engine", "must be reed-frost, percolation or ct");
  if (s.trials < 1) throw SpecError("trials", "must be >= 1");
  if (s.engine == "ct") {
    if (s.law.empty()) throw SpecError("law", "required for the ct engine");
    parse_law(s.law, s.lambda);
  }
  if (s.sweep) {
    if (s.sweep->grid.empty()) throw SpecError("sweep.grid", "must be non-empty");
    for (std::size_t i = 1; i < s.sweep->grid.size(); ++i)
      if (!(s.sweep->grid[i] > s.sweep->grid[i - 1]))
        throw SpecError("sweep.grid", "must be strictly increasing");
  }
  parse_initial(s.initial);
  // Each grid point must resolve to a valid beta.
  std::vector<std::optional<double>> points;
  if (s.sweep) for (double v : s.sweep->grid) points.emplace_back(v);
  else points.emplace_back(std::nullopt);
  for (const auto& v : points) {
    auto p = resolve_point(s, v);
    if (p.engine != "ct" && !(p.beta >= 0.0 && p.beta <= 1.0))
      throw SpecError(s.c || (s.sweep && s.sweep->param == "c") ? "c" : "beta",
                      "resolves to beta outside [0, 1]");
    family_node_count(p.family, p.params);
  }
}

// ---------------------------------------------------------------------------
// Theory for one grid point

/// Bounds keyed as upper_* / lower_* so the comparison knows their direction.
inline TheoryReport theory_for(const ExperimentSpec& point) {
  TheoryReport r;
  const auto& f = point.family;
  const auto& pr = point.params;
  const double n = double(family_node_count(f, pr));
  const double x0 = double(parse_initial(point.initial).count());
  const bool ct = point.engine == "ct";
  const double beta = ct ? effective_transmissibility(parse_law(point.law, point.lambda)) : point.beta;
  r.inputs["n"] = n;
  r.inputs["x0"] = x0;
  r.inputs[ct ? "p_J" : "beta"] = beta;

  std::optional<double> lambda1;
  bool regular = false;
  if (f == "star" || f == "ring" || f == "complete") {
    lambda1 = closed_form_radius(f, std::size_t(n));
    regular = f != "star";
  } else if (f == "file" || (point.fixed_graph && is_random_family(f))) {
    const auto g = make_graph(f, pr, derive_seed(point.master_seed, {0x6772617068ULL})).graph;
    auto rep = spectral_radius(g);
    lambda1 = rep.lambda1;
    r.diagnostics["lambda1_residual"] = rep.residual;
    r.diagnostics["lambda1_iterations"] = double(rep.iterations);
    const auto deg = degree_extremes(g);
    regular = deg.min == deg.max;
  }
  if (lambda1) {
    r.inputs["lambda1"] = *lambda1;
    r.bounds.emplace("upper_general", upper_bound_general(n, *lambda1, beta, x0));
    if (regular) r.bounds.emplace("upper_regular", upper_bound_regular(*lambda1, beta, x0));
  }

  if (f == "complete") {
    const double c = beta * (n - 1.0);
    r.inputs["c"] = c;
    auto root = giant_fraction(c);
    r.diagnostics["giant_fraction"] = root.value;
    r.diagnostics["giant_fraction_residual"] = root.residual;
    r.bounds.emplace("lower_complete", epidemic_lower_bound_complete(n, c));
  } else if (f == "er") {
    const double c = beta * (n - 1.0) * detail::num(pr, "p");
    r.inputs["c"] = c;
    auto root = giant_fraction(c);
    r.diagnostics["giant_fraction"] = root.value;
    r.diagnostics["giant_fraction_residual"] = root.residual;
    r.bounds.emplace("upper_branching", upper_bound_branching(c, x0));
    r.bounds.emplace("lower_er", c > 1.0 ? Bound::of(root.value * root.value * n)
                                         : Bound::inapplicable("c <= 1"));
  } else if (f == "chung_lu") {
    const double d = detail::num(pr, "d"), m = detail::num(pr, "m"), gamma = detail::num(pr, "gamma");
    r.inputs["d"] = d;
    r.inputs["m"] = m;
    r.inputs["gamma"] = gamma;
    if (gamma != 2.5) r.diagnostics["clv_radius_estimate"] = clv_radius_estimate(d, m, gamma);
    if (auto delta = detail::opt_num(pr, "delta")) {
      r.inputs["delta"] = *delta;
      auto core = core_size(std::size_t(n), beta, d, gamma, *delta);
      if (core) {
        r.diagnostics["core_size"] = double(core.value().size);
        r.diagnostics["core_size_vacuous"] = core.value().vacuous ? 1.0 : 0.0;
      }
      if (auto cd = detail::opt_num(pr, "c_delta")) {
        auto giant = giant_core_weight_and_size(n, beta, d, gamma, *delta, *cd);
        if (giant) {
          r.diagnostics["giant_core_weight_lower"] = giant.value().weight_lower;
          r.diagnostics["giant_core_size_estimate"] = giant.value().size_estimate;
        }
      }
    }
  } else if (f == "pareto_kernel" || f == "constant_kernel") {
    const auto k = kernel_for(f, pr);
    const auto norm = kernel_operator_norm(k, 1024);
    r.diagnostics["kernel_norm"] = norm.norm;
    if (norm.analytic) r.diagnostics["kernel_norm_analytic"] = *norm.analytic;
    if (f == "pareto_kernel") r.diagnostics["pareto_threshold"] = pareto_threshold(detail::num(pr, "gamma")).beta_star;
    if (beta * norm.norm > 1.0) {
      auto tau = kernel_outbreak_fraction(k, beta, 1024);
      r.diagnostics["outbreak_fraction"] = tau.tau;
      r.bounds.emplace("lower_kernel", Bound::of(tau.tau * tau.tau * n));
    } else {
      r.diagnostics["outbreak_fraction"] = 0.0;
      r.bounds.emplace("lower_kernel", Bound::inapplicable("beta ||T_W|| <= 1"));
    }
  }
  return r;
}

inline json to_json(const Bound& b) {
  if (b) return {{"applicable", true}, {"value", b.value()}};
  return {{"applicable", false}, {"reason", b.reason()}};
}

inline json to_json(const TheoryReport& r) {
  json j;
  j["bounds"] = json::object();
  for (const auto& [k, b] : r.bounds) j["bounds"][k] = to_json(b);
  j["inputs"] = r.inputs;
  j["diagnostics"] = r.diagnostics;
  return j;
}

// ---------------------------------------------------------------------------
// Running

struct TrialRecord {
  std::size_t final_removed = 0;
  double extinction_time = 0;
  std::uint64_t trial_seed = 0;
};

struct Summary {
  double mean = 0;
  double variance = 0;  // sample variance (n - 1 denominator)
  double se = 0;        // sqrt(variance / trials)
  double frac_large = 0;  // fraction of trials with final size > n / 10
};

/// Deterministic fold in trial order.
inline Summary summarize(const std::vector<TrialRecord>& trials, double n) {
  Summary s;
  const double k = double(trials.size());
  if (trials.empty()) return s;
  double sum = 0;
  std::size_t large = 0;
  for (const auto& t : trials) {
    sum += double(t.final_removed);
    if (double(t.final_removed) > n / 10.0) ++large;
  }
  s.mean = sum / k;
  double ss = 0;
  for (const auto& t : trials) {
    const double dlt = double(t.final_removed) - s.mean;
    ss += dlt * dlt;
  }
  s.variance = trials.size() > 1 ? ss / (k - 1.0) : 0.0;
  s.se = std::sqrt(s.variance / k);
  s.frac_large = double(large) / k;
  return s;
}

struct PointResult {
  std::optional<double> sweep_value;
  ExperimentSpec point;  // resolved
  std::vector<TrialRecord> trials;
  Summary summary;
  TheoryReport theory;
  std::size_t node_count = 0;
};

struct SweepResult {
  ExperimentSpec spec;
  std::vector<PointResult> points;
};

inline std::string spec_hash(const ExperimentSpec& s) {
  // FNV-1a over the canonical JSON text.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(s).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace detail {

inline constexpr std::uint64_t kGraphKey = 1, kEpidemicKey = 2, kInitialKey = 3;

inline TrialRecord run_trial(const ExperimentSpec& p, const InitialRule& rule,
                             const std::shared_ptr<const Graph>& shared, std::uint64_t trial_seed,
                             const std::optional<InfectiousPeriodLaw>& law) {
  Rng init_rng(derive_seed(trial_seed, {kInitialKey}));
  const auto epi_seed = derive_seed(trial_seed, {kEpidemicKey});
  TrialRecord rec;
  rec.trial_seed = trial_seed;

  // A percolated complete graph is G(n, beta): sample it directly instead of
  // materializing K_n.
  if (!shared && p.family == "complete" && p.engine == "percolation") {
    const auto n = count_param(p.params, "n");
    const Graph g = gen_er(n, p.beta, epi_seed);
    Graph kn_proxy = gen_star(std::max<std::size_t>(n, 2));  // only used for initial selection ids
    std::vector<Node> init;
    if (rule.kind == InitialRule::Kind::hub) init = {0};  // K_n: every node has max degree
    else if (rule.kind == InitialRule::Kind::nonhub) {
      for (Node u = 1; init.size() < rule.k; ++u) init.push_back(u);
    } else {
      init = choose_initial(rule, kn_proxy, init_rng);
    }
    auto out = final_set_with(g, init, [](Node, Node) { return true; });
    rec.final_removed = out.final_removed;
    rec.extinction_time = out.extinction_time;
    return rec;
  }

  std::shared_ptr<const Graph> graph = shared;
  if (!graph)
    graph = std::make_shared<const Graph>(
        make_graph(p.family, p.params, derive_seed(trial_seed, {kGraphKey})).graph);
  const auto init = choose_initial(rule, *graph, init_rng);
  EpidemicOutcome out;
  if (p.engine == "reed-frost") out = run_reed_frost(*graph, {p.beta, init, epi_seed});
  else if (p.engine == "percolation") out = final_set_via_percolation(*graph, {p.beta, init, epi_seed});
  else out = run_ct_sir(*graph, *law, init, epi_seed);
  rec.final_removed = out.final_removed;
  rec.extinction_time = out.extinction_time;
  return rec;
}

}  // namespace detail

/// Runs every grid point; per-trial seeds are derive_seed(master, {grid, trial}),
/// so results do not depend on the worker count.
inline SweepResult run_experiment(const ExperimentSpec& spec, std::size_t workers = default_parallelism()) {
  validate(spec);
  SweepResult result;
  result.spec = spec;
  std::vector<std::optional<double>> values;
  if (spec.sweep) for (double v : spec.sweep->grid) values.emplace_back(v);
  else values.emplace_back(std::nullopt);

  for (std::size_t gi = 0; gi < values.size(); ++gi) {
    PointResult pr;
    pr.sweep_value = values[gi];
    pr.point = resolve_point(spec, values[gi]);
    const auto& p = pr.point;
    const auto rule = parse_initial(p.initial);
    std::optional<InfectiousPeriodLaw> law;
    if (p.engine == "ct") law = parse_law(p.law, p.lambda);

    std::shared_ptr<const Graph> shared;
    const bool kn_fast_path = p.family == "complete" && p.engine == "percolation";
    if (!is_random_family(p.family) && !kn_fast_path) {
      shared = std::make_shared<const Graph>(make_graph(p.family, p.params, 0).graph);
    } else if (is_random_family(p.family) && p.fixed_graph) {
      shared = std::make_shared<const Graph>(
          make_graph(p.family, p.params, derive_seed(p.master_seed, {0x6772617068ULL})).graph);
    }
    pr.node_count = shared ? shared->node_count() : family_node_count(p.family, p.params);

    pr.trials.resize(p.trials);
    parallel_for(p.trials, workers, [&](std::size_t t) {
      pr.trials[t] = detail::run_trial(p, rule, shared, derive_seed(spec.master_seed, {gi, t}), law);
    });
    pr.summary = summarize(pr.trials, double(pr.node_count));
    pr.theory = theory_for(p);
    result.points.push_back(std::move(pr));
  }
  return result;
}

inline json to_json(const SweepResult& r, bool include_trials = true) {
  json j;
  j["provenance"] = {{"spec", to_json(r.spec)},
                     {"spec_hash", spec_hash(r.spec)},
                     {"master_seed", r.spec.master_seed},
                     {"version", kVersion}};
  j["points"] = json::array();
  for (const auto& p : r.points) {
    json pj;
    pj["sweep_value"] = p.sweep_value ? json(*p.sweep_value) : json(nullptr);
    pj["beta"] = p.point.beta;
    pj["params"] = p.point.params;
    pj["node_count"] = p.node_count;
    pj["summary"] = {{"mean", p.summary.mean},
                     {"variance", p.summary.variance},
                     {"se", p.summary.se},
                     {"frac_large", p.summary.frac_large},
                     {"trials", p.trials.size()}};
    pj["theory"] = to_json(p.theory);
    if (include_trials) {
      pj["trials"] = json::array();
      for (const auto& t : p.trials)
        pj["trials"].push_back({{"final_removed", t.final_removed},
                                {"extinction_time", t.extinction_time},
                                {"trial_seed", t.trial_seed}});
    }
    j["points"].push_back(std::move(pj));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Theory comparison

/// Harness policy for one-sided checks against asymptotic statements.
struct CheckPolicy {
  double se_multiplier = 3.0;
  double lower_factor = 0.9;
};

struct BoundCheck {
  std::string name;
  bool upper = true;
  double bound = 0;
  bool pass = false;
};

struct ComparisonRow {
  double sweep_value = 0;
  double mean = 0;
  double se = 0;
  std::vector<BoundCheck> checks;
  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.pass; });
  }
};

struct ComparisonTable {
  CheckPolicy policy;
  std::vector<ComparisonRow> rows;
  bool any_applicable() const {
    return std::any_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return !r.checks.empty(); });
  }
  bool pass() const {
    return std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass(); });
  }
};

/// mean - k SE <= upper bound; mean + k SE >= lower_factor * lower bound.
inline ComparisonTable compare_theory(const SweepResult& r, const CheckPolicy& policy = {}) {
  ComparisonTable t;
  t.policy = policy;
  for (const auto& p : r.points) {
    ComparisonRow row;
    row.sweep_value = p.sweep_value.value_or(p.point.beta);
    row.mean = p.summary.mean;
    row.se = p.summary.se;
    for (const auto& [name, b] : p.theory.bounds) {
      if (!b) continue;
      BoundCheck c;
      c.name = name;
      c.upper = name.rfind("upper", 0) == 0;
      c.bound = b.value();
      c.pass = c.upper ? row.mean - policy.se_multiplier * row.se <= c.bound
                       : row.mean + policy.se_multiplier * row.se >= policy.lower_factor * c.bound;
      row.checks.push_back(c);
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ComparisonTable compare_theory(const ExperimentSpec& spec, const CheckPolicy& policy = {},
                                      std::size_t workers = default_parallelism()) {
  return compare_theory(run_experiment(spec, workers), policy);
}

inline json to_json(const ComparisonTable& t) {
  json j;
  j["policy"] = {{"rule", "upper: mean - k*se <= bound; lower: mean + k*se >= factor*bound"},
                 {"k", t.policy.se_multiplier},
                 {"factor", t.policy.lower_factor}};
  j["rows"] = json::array();
  for (const auto& r : t.rows) {
    json rj{{"sweep_value", r.sweep_value}, {"mean", r.mean}, {"se", r.se}, {"pass", r.pass()}};
    rj["checks"] = json::array();
    for (const auto& c : r.checks)
      rj["checks"].push_back({{"bound", c.name}, {"direction", c.upper ? "upper" : "lower"},
                              {"value", c.bound}, {"pass", c.pass}});
    j["rows"].push_back(std::move(rj));
  }
  j["pass"] = t.pass();
  return j;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Tightest applicable upper / lower bound at a point.
inline std::pair<std::optional<double>, std::optional<double>> point_bounds(const PointResult& p) {
  std::optional<double> upper, lower;
  for (const auto& [name, b] : p.theory.bounds) {
    if (!b) continue;
    if (name.rfind("upper", 0) == 0) upper = upper ? std::min(*upper, b.value()) : b.value();
    else lower = lower ? std::max(*lower, b.value()) : b.value();
  }
  return {upper, lower};
}

inline constexpr const char* kCsvHeader =
    "sweep_value,mean,se,bound_upper,bound_lower,upper_applicable,lower_applicable";

/// One row per grid point; inapplicable bounds are empty cells.
inline void emit_plot_data(const SweepResult& r, const std::string& path) {
  if (r.points.empty()) throw std::invalid_argument("emit_plot_data: empty result");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kCsvHeader << '\n';
  for (const auto& p : r.points) {
    auto [upper, lower] = point_bounds(p);
    out << format_number(p.sweep_value.value_or(p.point.beta)) << ',' << format_number(p.summary.mean) << ','
        << format_number(p.summary.se) << ',' << (upper ? format_number(*upper) : "") << ','
        << (lower ? format_number(*lower) : "") << ',' << (upper ? 1 : 0) << ',' << (lower ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

struct PlotRow {
  double sweep_value = 0, mean = 0, se = 0;
  std::optional<double> bound_upper, bound_lower;
};

inline std::vector<PlotRow> read_plot_data(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  if (line != kCsvHeader) throw std::runtime_error("unexpected CSV header in " + path);
  std::vector<PlotRow> rows;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (cells.size() != 7) throw std::runtime_error("malformed CSV row: " + line);
    PlotRow r;
    r.sweep_value = std::stod(cells[0]);
    r.mean = std::stod(cells[1]);
    r.se = std::stod(cells[2]);
    if (!cells[3].empty()) r.bound_upper = std::stod(cells[3]);
    if (!cells[4].empty()) r.bound_lower = std::stod(cells[4]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace sirnet
