#include "pathlift/path_norms.hpp"

#include <algorithm>

namespace pathlift {

std::string_view to_string(NormKind kind) {
  switch (kind) {
    case NormKind::holder: return "holder";
    case NormKind::pvar: return "pvar";
    case NormKind::frac_sobolev: return "frac_sobolev";
    case NormKind::besov: return "besov";
  }
  return "unknown";
}

NormKind parse_norm_kind(std::string_view name) {
  if (name == "holder") return NormKind::holder;
  if (name == "pvar") return NormKind::pvar;
  if (name == "frac_sobolev") return NormKind::frac_sobolev;
  if (name == "besov") return NormKind::besov;
  throw InvalidInput("unknown norm kind '" + std::string(name) + "'");
}

void NormSpec::validate() const {
  detail::require_p(p);
  switch (kind) {
    case NormKind::holder: detail::require_gamma(gamma); break;
    case NormKind::pvar: break;
    case NormKind::frac_sobolev:
    case NormKind::besov: detail::require_alpha(alpha); break;
  }
}

namespace detail {

double scalar_p_variation(std::span<const double> values, double p) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (!v.empty() && x == v.back()) continue;
    // drop the middle point of a monotone run
    if (v.size() >= 2 && (v[v.size() - 1] - v[v.size() - 2]) * (x - v.back()) > 0.0) v.back() = x;
    else v.push_back(x);
  }
  const std::size_t n = v.size();
  std::vector<double> best(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double b = 0.0;
    for (std::size_t i = 0; i < j; ++i) {
      const double cand = best[i] + pow_p(std::abs(v[j] - v[i]), p);
      if (cand > b) b = cand;
    }
    best[j] = b;
  }
  return std::pow(best[n - 1], 1.0 / p);
}

}  // namespace detail

double frac_sobolev_seminorm(const DyadicPath& path, double alpha, double p) {
  detail::require_alpha(alpha);
  detail::require_p(p);
  const std::size_t cells = path.size() - 1;
  const std::size_t dim = path.dim();
  const double h = detail::grid_step(path.depth(), path.horizon());

  // midpoints of the piecewise-linear interpolant
  std::vector<double> mid(cells * dim);
  for (std::size_t a = 0; a < cells; ++a) {
    const auto x0 = path.point(a);
    const auto x1 = path.point(a + 1);
    for (std::size_t c = 0; c < dim; ++c) mid[a * dim + c] = 0.5 * (x0[c] + x1[c]);
  }
  // kernel h^2 / |u - v|^{1 + alpha p} depends on the lag only
  std::vector<double> kernel(cells, 0.0);
  for (std::size_t l = 1; l < cells; ++l)
    kernel[l] = h * h / std::pow(h * static_cast<double>(l), 1.0 + alpha * p);

  double sum = 0.0;
  for (std::size_t a = 0; a < cells; ++a) {
    for (std::size_t b = a + 1; b < cells; ++b) {
      double d2 = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double d = mid[a * dim + c] - mid[b * dim + c];
        d2 += d * d;
      }
      if (d2 == 0.0) continue;
      sum += pow_half_p(d2, p) * kernel[b - a];
    }
  }
  // the integrand is symmetric in (u, v)
  return std::pow(2.0 * sum, 1.0 / p);
}

double grr_constant(double alpha, double p) {
  detail::require_alpha(alpha);
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("GRR constant needs 1 < p < infinity");
  const double ap = alpha * p;
  if (!(ap > 1.0)) throw PreconditionFailure("GRR constant is undefined for alpha * p <= 1");
  return std::pow(32.0 * (ap + 1.0) / (ap - 1.0), 1.0 / p);
}

double horizon_scaling(const NormSpec& spec, double horizon) {
  spec.validate();
  if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
  switch (spec.kind) {
    case NormKind::holder: return std::pow(horizon, -spec.gamma);
    case NormKind::pvar: return 1.0;
    case NormKind::frac_sobolev:
    case NormKind::besov: return std::pow(horizon, (1.0 - spec.alpha * spec.p) / spec.p);
  }
  return 1.0;
}

double seminorm(const DyadicPath& path, const NormSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NormKind::holder: return holder_seminorm(path, spec.gamma);
    case NormKind::pvar: return p_variation(path, spec.p);
    case NormKind::frac_sobolev: return frac_sobolev_seminorm(path, spec.alpha, spec.p);
    case NormKind::besov: return besov_seminorm(path, spec.alpha, spec.p);
  }
  return 0.0;
}

namespace {

bool exceeds(double lhs, double rhs) { return lhs > rhs * (1.0 + 1e-12) + 1e-300; }

}  // namespace

EmbeddingReport embedding_report(const DyadicPath& path, double alpha, double p, double gamma) {
  if (!(gamma > alpha && gamma <= 1.0)) throw InvalidInput("embedding report needs alpha < gamma <= 1");
  EmbeddingReport r;
  r.cbar = grr_constant(alpha, p);
  r.ws = frac_sobolev_seminorm(path, alpha, p);
  const double T = path.horizon();

  r.holder_lhs = holder_seminorm(path, alpha - 1.0 / p);
  r.cbar_rhs = r.cbar * r.ws;
  r.holder_violated = exceeds(r.holder_lhs, r.cbar_rhs);

  r.pvar_lhs = p_variation(path, 1.0 / alpha);
  r.pvar_rhs = r.cbar * std::pow(T, alpha - 1.0 / p) * r.ws;
  r.pvar_violated = exceeds(r.pvar_lhs, r.pvar_rhs);

  const double e = gamma * p - alpha * p;
  r.ws_power = std::pow(r.ws, p);
  r.holder_to_ws_bound = std::pow(holder_seminorm(path, gamma), p) * 2.0 * std::pow(T, e + 1.0) / (e * (e + 1.0));
  r.holder_to_ws_violated = exceeds(r.ws_power, r.holder_to_ws_bound);
  return r;
}

}  // namespace pathlift
