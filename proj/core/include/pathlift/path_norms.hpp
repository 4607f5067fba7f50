#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pathlift/power.hpp"
#include "pathlift/dyadic_path.hpp"
#include "pathlift/error.hpp"

namespace pathlift {

/// Anything sampled on a dyadic grid of [0, horizon] with a metric between
/// grid points. DyadicPath (Euclidean) and WassersteinCurve (W_p between
/// marginals) both qualify, so every seminorm below applies to lifts and to
/// their marginal curves alike.
template <class C>
concept GridCurve = requires(const C& c, std::size_t i, std::size_t j) {
  { c.depth() } -> std::convertible_to<int>;
  { c.horizon() } -> std::convertible_to<double>;
  { c.distance(i, j) } -> std::convertible_to<double>;
};

/// Closed range of grid indices [first, last].
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
};

enum class NormKind { holder, pvar, frac_sobolev, besov };

std::string_view to_string(NormKind kind);
/// Accepts "holder", "pvar", "frac_sobolev", "besov"; throws InvalidInput otherwise.
NormKind parse_norm_kind(std::string_view name);

/// Which seminorm, and the exponent used when it is raised to a power in
/// energies. alpha is read by frac_sobolev/besov, gamma by holder, and p by
/// all four (as the variation exponent for pvar).
struct NormSpec {
  NormKind kind = NormKind::besov;
  double alpha = 0.5;
  double p = 2.0;
  double gamma = 0.5;

  /// Throws InvalidInput when the parameters are outside their domains.
  void validate() const;
  /// True when 1 < p and 1/p < alpha < 1, the range where W^{alpha,p} and
  /// b^{alpha,p} are equivalent.
  bool in_equivalence_range() const noexcept { return p > 1.0 && alpha * p > 1.0 && alpha < 1.0; }
};

namespace detail {

inline void require_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidInput("holder exponent must lie in (0, 1]");
}
inline void require_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("exponent p must be finite and >= 1");
}
inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidInput("alpha must lie in (0, 1)");
}

inline double grid_step(int depth, double horizon) {
  return horizon / static_cast<double>(std::size_t{1} << depth);
}

}  // namespace detail

/// sup over grid pairs u < v inside the window of d(X_u, X_v) / (v - u)^gamma,
/// with physical (horizon-scaled) times. An empty window gives 0.
template <GridCurve C>
double holder_seminorm(const C& curve, double gamma, std::optional<Window> window = std::nullopt) {
  detail::require_gamma(gamma);
  const std::size_t n = (std::size_t{1} << curve.depth()) + 1;
  const Window w = window.value_or(Window{0, n - 1});
  if (w.first > w.last || w.last >= n) throw InvalidInput("holder window outside the grid");
  const double h = detail::grid_step(curve.depth(), curve.horizon());
  // (v - u)^gamma depends only on the index lag
  std::vector<double> lag_pow(w.last - w.first + 1, 0.0);
  for (std::size_t l = 1; l < lag_pow.size(); ++l) lag_pow[l] = std::pow(h * static_cast<double>(l), gamma);
  double best = 0.0;
  for (std::size_t i = w.first; i < w.last; ++i) {
    for (std::size_t j = i + 1; j <= w.last; ++j) {
      const double q = curve.distance(i, j) / lag_pow[j - i];
      if (q > best) best = q;
    }
  }
  return best;
}

namespace detail {
/// p-variation of a scalar sequence. Only the endpoints and turning points
/// can be needed by an optimal dissection when p >= 1, so the DP runs on those.
double scalar_p_variation(std::span<const double> values, double p);
}  // namespace detail

/// Exact p-variation over dissections built from grid points, by dynamic
/// programming: best[j] = max_{i<j} best[i] + d(X_i, X_j)^p.
template <GridCurve C>
double p_variation(const C& curve, double p) {
  detail::require_p(p);
  if constexpr (std::same_as<C, DyadicPath>)
    if (curve.dim() == 1) return detail::scalar_p_variation(curve.values(), p);
  const std::size_t n = (std::size_t{1} << curve.depth()) + 1;
  std::vector<double> best(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = best[i] + pow_p(curve.distance(i, j), p);
      if (cand > b) b = cand;
    }
    best[j] = b;
  }
  return std::pow(best[n - 1], 1.0 / p);
}

/// Per-level contributions 2^{m(alpha p - 1)} sum_k d(X_{t_k^m}, X_{t_{k+1}^m})^p
/// for m = 0..depth. Their sum is the p-th power of the Besov seminorm
/// truncated at the curve's depth.
template <GridCurve C>
std::vector<double> besov_level_terms(const C& curve, double alpha, double p) {
  detail::require_alpha(alpha);
  detail::require_p(p);
  if (std::abs(static_cast<double>(curve.horizon()) - 1.0) > 1e-12)
    throw InvalidInput("besov seminorm is defined on [0,1]; rescale the path to unit horizon first");
  const int depth = curve.depth();
  std::vector<double> terms(static_cast<std::size_t>(depth) + 1, 0.0);
  for (int m = 0; m <= depth; ++m) {
    const std::size_t stride = std::size_t{1} << (depth - m);
    const std::size_t cells = std::size_t{1} << m;
    double sum = 0.0;
    for (std::size_t k = 0; k < cells; ++k) sum += pow_p(curve.distance(k * stride, (k + 1) * stride), p);
    terms[static_cast<std::size_t>(m)] = std::exp2(m * (alpha * p - 1.0)) * sum;
  }
  return terms;
}

template <GridCurve C>
double besov_energy(const C& curve, double alpha, double p) {
  double total = 0.0;
  for (double t : besov_level_terms(curve, alpha, p)) total += t;
  return total;
}

/// Dyadic Besov seminorm b^{alpha,p}, truncated at level m = depth.
template <GridCurve C>
double besov_seminorm(const C& curve, double alpha, double p) {
  return std::pow(besov_energy(curve, alpha, p), 1.0 / p);
}

/// Besov energy of the piecewise-linear interpolant of the grid values, summed
/// over all levels: the levels beyond the depth form a geometric series,
///   sum_{m>M} ... = 2^{M(alpha p - 1)} / (2^{p - alpha p} - 1) * sum_k d_k^p,
/// where d_k are the finest-level increments.
template <GridCurve C>
double besov_energy_piecewise_linear(const C& curve, double alpha, double p) {
  const auto terms = besov_level_terms(curve, alpha, p);
  double total = 0.0;
  for (double t : terms) total += t;
  return total + terms.back() / (std::exp2(p - alpha * p) - 1.0);
}

struct BesovReport {
  double value = 0.0;
  int truncation_level = 0;
  std::vector<double> level_terms;
};

template <GridCurve C>
BesovReport besov_report(const C& curve, double alpha, double p) {
  BesovReport r;
  r.level_terms = besov_level_terms(curve, alpha, p);
  r.truncation_level = curve.depth();
  double total = 0.0;
  for (double t : r.level_terms) total += t;
  r.value = std::pow(total, 1.0 / p);
  return r;
}

/// Midpoint quadrature of the W^{alpha,p} double integral over the
/// piecewise-linear interpolant; cells on the diagonal are dropped.
double frac_sobolev_seminorm(const DyadicPath& path, double alpha, double p);

/// Garsia-Rodemich-Rumsey constant (32 (alpha p + 1) / (alpha p - 1))^{1/p}.
/// Throws PreconditionFailure when alpha p <= 1.
double grr_constant(double alpha, double p);

/// seminorm(X on [0,T]) = horizon_scaling(...) * seminorm(X rescaled to [0,1]).
/// holder: T^{-gamma}; pvar: 1; frac_sobolev and besov: T^{(1 - alpha p)/p}
/// (the besov factor is the one that keeps it comparable with W^{alpha,p}).
double horizon_scaling(const NormSpec& spec, double horizon);

/// Evaluates the seminorm selected by spec on a path. besov requires horizon 1.
double seminorm(const DyadicPath& path, const NormSpec& spec);

/// Both sides of the three embedding inequalities
///   |X|_{(a-1/p)-Hol} <= cbar |X|_{W^{a,p}}
///   |X|_{(1/a)-var}   <= cbar T^{a-1/p} |X|_{W^{a,p}}
///   |X|_{W^{a,p}}^p   <= |X|_{g-Hol}^p 2 T^{gp-ap+1} / ((gp-ap)(gp-ap+1))
/// with violation flags. gamma must satisfy alpha < gamma <= 1.
struct EmbeddingReport {
  double cbar = 0.0;
  double ws = 0.0;
  double holder_lhs = 0.0;
  double cbar_rhs = 0.0;
  double pvar_lhs = 0.0;
  double pvar_rhs = 0.0;
  double ws_power = 0.0;
  double holder_to_ws_bound = 0.0;
  bool holder_violated = false;
  bool pvar_violated = false;
  bool holder_to_ws_violated = false;

  bool any_violation() const noexcept { return holder_violated || pvar_violated || holder_to_ws_violated; }
};

EmbeddingReport embedding_report(const DyadicPath& path, double alpha, double p, double gamma);

}  // namespace pathlift
