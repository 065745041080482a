#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sirnet/epidemic.hpp"
#include "sirnet/error.hpp"
#include "sirnet/generators.hpp"
#include "sirnet/spectral.hpp"

namespace sirnet {

/// A value that exists only when a theorem's hypothesis holds. Inapplicable
/// results carry the reason instead of a number.
template <class T>
class Applicable {
 public:
  static Applicable of(T v) { return Applicable(std::move(v), {}); }
  static Applicable inapplicable(std::string reason) { return Applicable(std::nullopt, std::move(reason)); }

  bool applicable() const noexcept { return value_.has_value(); }
  explicit operator bool() const noexcept { return applicable(); }

  const T& value() const {
    if (!value_) throw std::logic_error("inapplicable: " + reason_);
    return *value_;
  }
  const std::string& reason() const noexcept { return reason_; }

 private:
  Applicable(std::optional<T> v, std::string r) : value_(std::move(v)), reason_(std::move(r)) {}
  std::optional<T> value_;
  std::string reason_;
};

using Bound = Applicable<double>;

// ---------------------------------------------------------------------------
// Upper bounds on E|Y(∞)|

/// sqrt(n x0) / (1 - beta lambda1), valid when beta lambda1 < 1.
inline Bound upper_bound_general(double n, double lambda1, double beta, double x0) {
  const double r = beta * lambda1;
  if (!(r < 1.0)) return Bound::inapplicable("beta * lambda1 >= 1");
  return Bound::of(std::sqrt(n * x0) / (1.0 - r));
}

/// x0 / (1 - beta d) for a d-regular graph, valid when beta d < 1.
inline Bound upper_bound_regular(double d, double beta, double x0) {
  const double r = beta * d;
  if (!(r < 1.0)) return Bound::inapplicable("beta * d >= 1");
  return Bound::of(x0 / (1.0 - r));
}

/// The same bounds with beta replaced by p_J = 1 - E[exp(-lambda J)].
inline Bound upper_bound_theorem2(double n, double lambda1, const InfectiousPeriodLaw& law, double x0,
                                  bool regular) {
  const double pj = effective_transmissibility(law);
  if (!(pj * lambda1 < 1.0)) return Bound::inapplicable("p_J * lambda1 >= 1");
  return regular ? upper_bound_regular(lambda1, pj, x0) : upper_bound_general(n, lambda1, pj, x0);
}

/// Mean total progeny x0 / (1 - c) of a subcritical branching process with
/// mean offspring c; dominates the epidemic on G(n, p) with c = (n-1) beta p.
inline Bound upper_bound_branching(double c, double x0) {
  if (!(c < 1.0)) return Bound::inapplicable("c >= 1");
  return Bound::of(x0 / (1.0 - c));
}

// ---------------------------------------------------------------------------
// Giant component fixed point

struct RootReport {
  double value = 0;
  double residual = 0;
  std::size_t iterations = 0;
};

/// Unique positive root of g + exp(-c g) = 1 for c > 1, and 0 for c <= 1.
/// Bisection on [1e-12, 1] to 1e-6, then Newton to 1e-12.
inline RootReport giant_fraction(double c) {
  if (!(c >= 0.0)) throw ParameterError("giant_fraction needs c >= 0");
  RootReport r;
  if (c <= 1.0) return r;
  auto f = [c](double g) { return g + std::exp(-c * g) - 1.0; };
  double lo = 1e-12, hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
    ++r.iterations;
  }
  double g = 0.5 * (lo + hi);
  for (int i = 0; i < 50; ++i) {
    const double step = f(g) / (1.0 - c * std::exp(-c * g));
    g -= step;
    ++r.iterations;
    if (std::abs(step) < 1e-15) break;
  }
  r.value = g;
  r.residual = std::abs(f(g));
  return r;
}

/// gamma(c)^2 n for the complete graph with beta = c / (n-1), c > 1.
inline Bound epidemic_lower_bound_complete(double n, double c) {
  if (!(c > 1.0)) return Bound::inapplicable("c <= 1");
  const double g = giant_fraction(c).value;
  return Bound::of(g * g * n);
}

// ---------------------------------------------------------------------------
// Power-law (Chung-Lu) core

/// Asymptotic mean expected degree of the subgraph induced by the k heaviest
/// nodes of G(beta w): beta d n^((3-gamma)/(gamma-1)) k^((gamma-3)/(gamma-1)).
inline double subgraph_mean_degree(double k, double n, double beta, double d, double gamma) {
  if (!(gamma > 2.0)) throw ParameterError("subgraph mean degree needs gamma > 2");
  if (!(k >= 1.0 && k <= n)) throw ParameterError("need 1 <= k <= n");
  return beta * d * std::pow(n, (3.0 - gamma) / (gamma - 1.0)) * std::pow(k, (gamma - 3.0) / (gamma - 1.0));
}

/// Finite-n version beta (Σ_{i<=k} w_i)^2 / (k n d) with d = Σ w / n, so the
/// value at k = n is exactly beta d.
inline double subgraph_mean_degree_exact(std::size_t k, double beta, const WeightSequence& w) {
  if (k < 1 || k > w.size()) throw ParameterError("need 1 <= k <= n");
  const double head = std::accumulate(w.weights.begin(), w.weights.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
  const double n = double(w.size());
  const double d = w.mean();
  return beta * head * head / (double(k) * n * d);
}

struct CoreSize {
  std::size_t size = 0;
  bool vacuous = false;  // size exceeds n
};

/// N_delta = floor((beta d / (1+delta))^((gamma-1)/(3-gamma)) n) + 1 for
/// 2 < gamma < 3.
inline Applicable<CoreSize> core_size(std::size_t n, double beta, double d, double gamma, double delta) {
  if (!(gamma > 2.0)) throw ParameterError("core size needs gamma > 2");
  if (!(delta > 0.0)) throw ParameterError("core size needs delta > 0");
  if (gamma >= 3.0) return Applicable<CoreSize>::inapplicable("gamma >= 3: only beta d > 1 is available");
  const double base = beta * d / (1.0 + delta);
  const double scaled = std::pow(base, (gamma - 1.0) / (3.0 - gamma)) * double(n);
  CoreSize c;
  c.size = static_cast<std::size_t>(std::floor(scaled)) + 1;
  c.vacuous = c.size > n;
  return Applicable<CoreSize>::of(c);
}

struct GiantCore {
  double weight_lower = 0;  // d n (1-c_delta) (beta d/(1+delta))^((gamma-2)/(3-gamma))
  double size_estimate = 0; // n (1-c_delta)^((gamma-1)/(gamma-2)) (beta d/(1+delta))^((gamma-1)/(3-gamma))
};

/// c_delta has no default: it is an existential constant supplied by the caller.
inline Applicable<GiantCore> giant_core_weight_and_size(double n, double beta, double d, double gamma,
                                                        double delta, double c_delta) {
  if (!(gamma > 2.0)) throw ParameterError("giant core needs gamma > 2");
  if (!(delta > 0.0)) throw ParameterError("giant core needs delta > 0");
  if (!(c_delta >= 0.0 && c_delta < 1.0)) throw ParameterError("c_delta must lie in [0, 1)");
  if (gamma >= 3.0) return Applicable<GiantCore>::inapplicable("gamma >= 3");
  const double base = beta * d / (1.0 + delta);
  GiantCore g;
  g.weight_lower = d * n * (1.0 - c_delta) * std::pow(base, (gamma - 2.0) / (3.0 - gamma));
  g.size_estimate = n * std::pow(1.0 - c_delta, (gamma - 1.0) / (gamma - 2.0)) *
                    std::pow(base, (gamma - 1.0) / (3.0 - gamma));
  return Applicable<GiantCore>::of(g);
}

// ---------------------------------------------------------------------------
// Kernel graphs

struct ParetoThreshold {
  double beta_star = 0;             // (gamma - 2) / 2 = 1 / ||T_W||
  bool never_supercritical = false; // beta_star >= 1
};

inline ParetoThreshold pareto_threshold(double gamma) {
  if (!(gamma > 2.0)) throw ParameterError("Pareto threshold needs gamma > 2");
  ParetoThreshold t;
  t.beta_star = (gamma - 2.0) / 2.0;
  t.never_supercritical = t.beta_star >= 1.0;
  return t;
}

struct OutbreakFraction {
  double tau = 0;           // ∫ f
  double beta_norm = 0;     // beta ||T_W|| on the same grid
  std::vector<double> survival;  // f on the grid nodes
  std::size_t iterations = 0;
  double residual = 0;      // sup |f - (1 - exp(-beta T f))|
};

/// Largest solution of f = 1 - exp(-beta T_W f) on the quadrature grid,
/// by damped fixed-point iteration from f = 1 (monotone decreasing); tau = ∫ f.
/// Returns tau = 0 when beta ||T_W|| <= 1.
inline OutbreakFraction kernel_outbreak_fraction(const KernelSpec& k, double beta, std::size_t resolution,
                                                 double damping = 1.0, std::size_t max_iter = 1000000) {
  if (resolution < 256) throw ParameterError("outbreak fraction needs resolution >= 256");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ParameterError("beta must lie in [0, 1]");
  if (!(damping > 0.0 && damping <= 1.0)) throw ParameterError("damping must lie in (0, 1]");
  OutbreakFraction out;
  out.beta_norm = beta * kernel_operator_norm(k, resolution).norm;
  if (out.beta_norm <= 1.0) {
    out.survival.assign(resolution, 0.0);
    return out;
  }
  DiscretizedKernel op(k, resolution, beta);
  std::vector<double> f(resolution, 1.0), tf(resolution);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op.apply(f, tf);
    double change = 0;
    for (std::size_t i = 0; i < resolution; ++i) {
      const double target = -std::expm1(-tf[i]);
      const double next = (1.0 - damping) * f[i] + damping * target;
      change = std::max(change, std::abs(next - f[i]));
      f[i] = next;
    }
    out.iterations = it;
    if (change < 1e-14) break;
  }
  op.apply(f, tf);
  for (std::size_t i = 0; i < resolution; ++i)
    out.residual = std::max(out.residual, std::abs(f[i] + std::expm1(-tf[i])));
  if (out.residual > 1e-10) throw ConvergenceError("outbreak fraction: fixed point did not converge");
  out.tau = op.integrate(f);
  out.survival = std::move(f);
  return out;
}

// ---------------------------------------------------------------------------

/// Named bound values plus echoed inputs and solver diagnostics.
struct TheoryReport {
  std::map<std::string, Bound> bounds;
  std::map<std::string, double> inputs;
  std::map<std::string, double> diagnostics;
};

}  // namespace sirnet
