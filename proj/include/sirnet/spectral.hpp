#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sirnet/error.hpp"
#include "sirnet/generators.hpp"
#include "sirnet/graph.hpp"

namespace sirnet {

enum class SpectralMethod { power_iteration, closed_form, clv_estimate };

inline std::string_view to_string(SpectralMethod m) {
  switch (m) {
    case SpectralMethod::power_iteration: return "power-iteration";
    case SpectralMethod::closed_form: return "closed-form";
    case SpectralMethod::clv_estimate: return "clv-estimate";
  }
  return "unknown";
}

struct SpectralReport {
  double lambda1 = 0;
  std::vector<double> eigvec;  // unit 2-norm, non-negative up to tolerance
  std::size_t iterations = 0;
  double residual = 0;  // ||A v - lambda1 v||_2
  SpectralMethod method = SpectralMethod::power_iteration;
  bool converged = false;
};

struct PowerIterationOptions {
  double tol = 1e-10;          // on the Rayleigh-quotient residual
  std::size_t max_iter = 0;    // 0 selects 100 * n
};

namespace detail {

struct ComponentPower {
  double lambda = 0;
  std::vector<double> vec;
  std::size_t iterations = 0;
  double residual = 0;
  bool converged = false;
};

/// Power iteration on (A + I) restricted to one component; `nodes` are the
/// component's members and `local` maps a graph node to its index in `nodes`.
inline ComponentPower power_iterate_component(const Graph& g, std::span<const Node> nodes,
                                              std::span<const std::uint32_t> local,
                                              const PowerIterationOptions& opt,
                                              std::size_t max_iter) {
  const std::size_t k = nodes.size();
  ComponentPower out;
  out.vec.assign(k, 1.0 / std::sqrt(double(k)));
  if (k == 1) {
    out.converged = true;
    return out;
  }
  std::vector<double> y(k);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t a = 0; a < k; ++a) {
      double s = out.vec[a];
      for (Node v : g.neighbours(nodes[a])) s += out.vec[local[v]];
      y[a] = s;
    }
    // Rayleigh quotient of A + I and residual of A at the current vector.
    double rq = 0;
    for (std::size_t a = 0; a < k; ++a) rq += out.vec[a] * y[a];
    double res2 = 0, norm2 = 0;
    for (std::size_t a = 0; a < k; ++a) {
      const double r = y[a] - rq * out.vec[a];
      res2 += r * r;
      norm2 += y[a] * y[a];
    }
    out.lambda = rq - 1.0;
    out.residual = std::sqrt(res2);
    out.iterations = it;
    if (out.residual <= opt.tol) {
      out.converged = true;
      return out;
    }
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t a = 0; a < k; ++a) out.vec[a] = y[a] * inv;
  }
  return out;
}

}  // namespace detail

/// Largest eigenvalue of the adjacency matrix by power iteration on A + I
/// from the normalized all-ones vector, per connected component. Components
/// whose maximum degree cannot beat the best value found so far are skipped.
inline SpectralReport spectral_radius(const Graph& g, const PowerIterationOptions& opt = {}) {
  if (g.empty()) throw ParameterError("spectral radius of an empty graph");
  if (!(opt.tol > 0.0)) throw ParameterError("tolerance must be positive");
  const std::size_t n = g.node_count();
  const std::size_t max_iter = opt.max_iter ? opt.max_iter : 100 * n;

  auto cc = connected_components(g);
  std::vector<std::vector<Node>> members(cc.component_count());
  std::vector<std::size_t> max_deg(cc.component_count(), 0);
  for (Node u = 0; u < n; ++u) {
    members[cc.label[u]].push_back(u);
    max_deg[cc.label[u]] = std::max(max_deg[cc.label[u]], g.degree(u));
  }
  std::vector<std::size_t> order(cc.component_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return max_deg[a] > max_deg[b]; });

  std::vector<std::uint32_t> local(n);
  for (const auto& comp : members)
    for (std::size_t a = 0; a < comp.size(); ++a) local[comp[a]] = static_cast<std::uint32_t>(a);

  SpectralReport report;
  report.method = SpectralMethod::power_iteration;
  report.converged = true;
  std::optional<std::size_t> best;
  detail::ComponentPower best_run;
  for (std::size_t c : order) {
    if (best && double(max_deg[c]) <= best_run.lambda) break;
    auto run = detail::power_iterate_component(g, members[c], local, opt, max_iter);
    report.iterations += run.iterations;
    if (!run.converged) report.converged = false;
    if (!best || run.lambda > best_run.lambda) {
      best = c;
      best_run = std::move(run);
    }
  }
  report.lambda1 = best_run.lambda;
  report.residual = best_run.residual;
  report.eigvec.assign(n, 0.0);
  for (std::size_t a = 0; a < members[*best].size(); ++a)
    report.eigvec[members[*best][a]] = best_run.vec[a];
  return report;
}

enum class Family { star, ring, complete };

inline std::optional<Family> parse_family(std::string_view s) {
  if (s == "star") return Family::star;
  if (s == "ring") return Family::ring;
  if (s == "complete") return Family::complete;
  return std::nullopt;
}

/// sqrt(n-1) for the star, 2 for the ring, n-1 for the complete graph.
inline double closed_form_radius(Family f, std::size_t n) {
  switch (f) {
    case Family::star:
      if (n < 2) throw ParameterError("star needs n >= 2");
      return std::sqrt(double(n - 1));
    case Family::ring:
      if (n < 3) throw ParameterError("ring needs n >= 3");
      return 2.0;
    case Family::complete:
      if (n < 2) throw ParameterError("complete graph needs n >= 2");
      return double(n - 1);
  }
  throw ParameterError("unknown family");
}

inline double closed_form_radius(std::string_view family, std::size_t n) {
  auto f = parse_family(family);
  if (!f) throw ParameterError("no closed-form spectral radius for family '" + std::string(family) + "'");
  return closed_form_radius(*f, n);
}

/// Asymptotic spectral radius of the Chung-Lu power-law graph:
/// sqrt(m) for gamma > 2.5, and
/// d (gamma-2)^2 / ((gamma-1)(3-gamma)) * ((gamma-1) m / ((gamma-2) d))^(3-gamma)
/// for 2 < gamma < 2.5. Undefined at gamma = 2.5.
inline double clv_radius_estimate(double d, double m, double gamma) {
  if (!(d > 0.0 && m > 0.0)) throw ParameterError("d and m must be positive");
  if (!(gamma > 2.0)) throw ParameterError("CLV estimate needs gamma > 2");
  if (gamma == 2.5) throw ParameterError("CLV estimate is undefined at gamma = 2.5");
  if (gamma > 2.5) return std::sqrt(m);
  const double lead = d * (gamma - 2.0) * (gamma - 2.0) / ((gamma - 1.0) * (3.0 - gamma));
  return lead * std::pow((gamma - 1.0) * m / ((gamma - 2.0) * d), 3.0 - gamma);
}

// ---------------------------------------------------------------------------
// Kernel integral operator (T f)(x) = ∫ n W(x,y) f(y) dy on L^2[0,1]

/// Nyström discretization on a (possibly graded) midpoint grid. The symmetric
/// matrix B_ij = sqrt(h_i) n W(x_i,x_j) sqrt(h_j) has the same spectrum as the
/// discretized operator.
class DiscretizedKernel {
 public:
  DiscretizedKernel(const KernelSpec& k, std::size_t resolution, double beta = 1.0)
      : x_(resolution), h_(resolution), n_scale_(k.n * beta) {
    if (resolution < 2) throw ParameterError("resolution too small");
    const double q = k.grading;
    const double ds = 1.0 / double(resolution);
    for (std::size_t i = 0; i < resolution; ++i) {
      const double s = (double(i) + 0.5) * ds;
      const double tail = std::pow(1.0 - s, q);
      x_[i] = 1.0 - tail;
      h_[i] = q * std::pow(1.0 - s, q - 1.0) * ds;
    }
    if (k.rank_one) {
      phi_.resize(resolution);
      for (std::size_t i = 0; i < resolution; ++i) phi_[i] = k.rank_one->marginal(x_[i]);
      rank_one_scale_ = k.rank_one->scale;
    } else {
      dense_.resize(resolution * resolution);
      for (std::size_t i = 0; i < resolution; ++i)
        for (std::size_t j = i; j < resolution; ++j)
          dense_[i * resolution + j] = dense_[j * resolution + i] = k(x_[i], x_[j]);
    }
  }

  std::size_t size() const noexcept { return x_.size(); }
  std::span<const double> nodes() const noexcept { return x_; }
  std::span<const double> weights() const noexcept { return h_; }

  /// out_i = (T f)(x_i) = Σ_j n W(x_i, x_j) h_j f_j.
  void apply(std::span<const double> f, std::span<double> out) const {
    const std::size_t r = size();
    if (!phi_.empty()) {
      double acc = 0;
      for (std::size_t j = 0; j < r; ++j) acc += phi_[j] * h_[j] * f[j];
      for (std::size_t i = 0; i < r; ++i) out[i] = n_scale_ * rank_one_scale_ * phi_[i] * acc;
      return;
    }
    for (std::size_t i = 0; i < r; ++i) {
      const double* row = dense_.data() + i * r;
      double acc = 0;
      for (std::size_t j = 0; j < r; ++j) acc += row[j] * h_[j] * f[j];
      out[i] = n_scale_ * acc;
    }
  }

  /// Symmetric form: out = B v.
  void apply_symmetric(std::span<const double> v, std::span<double> out) const {
    const std::size_t r = size();
    std::vector<double> f(r);
    for (std::size_t j = 0; j < r; ++j) f[j] = v[j] / std::sqrt(h_[j]);
    apply(f, out);
    for (std::size_t i = 0; i < r; ++i) out[i] *= std::sqrt(h_[i]);
  }

  /// Σ h_i f_i.
  double integrate(std::span<const double> f) const {
    double s = 0;
    for (std::size_t i = 0; i < size(); ++i) s += h_[i] * f[i];
    return s;
  }

 private:
  std::vector<double> x_, h_;
  std::vector<double> phi_;
  std::vector<double> dense_;
  double rank_one_scale_ = 0;
  double n_scale_;
};

struct KernelNormReport {
  double norm = 0;                  // largest eigenvalue of the discretized operator
  std::optional<double> analytic;   // n * scale * ∫ marginal^2 for rank-one kernels
  std::size_t iterations = 0;
  double residual = 0;
  std::size_t resolution = 0;
};

/// ||T_W|| by power iteration on the discretized operator.
inline KernelNormReport kernel_operator_norm(const KernelSpec& k, std::size_t resolution,
                                             double tol = 1e-12, std::size_t max_iter = 100000) {
  if (resolution < 64) throw ParameterError("kernel operator norm needs resolution >= 64");
  if (k.pareto_gamma && *k.pareto_gamma <= 2.0)
    throw ParameterError("integral of W^2 diverges for gamma <= 2");
  DiscretizedKernel op(k, resolution);
  KernelNormReport rep;
  rep.resolution = resolution;
  if (k.rank_one && k.rank_one->marginal_second_moment)
    rep.analytic = k.n * k.rank_one->scale * *k.rank_one->marginal_second_moment;

  std::vector<double> v(resolution, 1.0 / std::sqrt(double(resolution))), y(resolution);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    op.apply_symmetric(v, y);
    double rq = 0, norm2 = 0, res2 = 0;
    for (std::size_t i = 0; i < resolution; ++i) rq += v[i] * y[i];
    for (std::size_t i = 0; i < resolution; ++i) {
      const double r = y[i] - rq * v[i];
      res2 += r * r;
      norm2 += y[i] * y[i];
    }
    rep.norm = rq;
    rep.residual = std::sqrt(res2);
    rep.iterations = it;
    if (norm2 == 0.0) return rep;  // zero operator
    if (rep.residual <= tol * std::max(1.0, std::abs(rq))) return rep;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < resolution; ++i) v[i] = y[i] * inv;
  }
  throw ConvergenceError("kernel operator norm: power iteration did not converge");
}

}  // namespace sirnet
