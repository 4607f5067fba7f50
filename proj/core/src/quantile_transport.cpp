#include "pathlift/quantile_transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathlift/error.hpp"
#include "pathlift/power.hpp"

namespace pathlift {

QuantileMeasure::QuantileMeasure(std::vector<double> quantiles) : q_(std::move(quantiles)) {
  if (q_.empty()) throw InvalidInput("quantile measure needs at least one atom");
  for (double v : q_)
    if (!std::isfinite(v)) throw InvalidInput("quantiles must be finite");
  if (!std::is_sorted(q_.begin(), q_.end())) throw InvalidInput("quantiles must be nondecreasing");
}

QuantileMeasure QuantileMeasure::from_samples(std::span<const double> samples) {
  if (samples.empty()) throw InvalidInput("cannot build a measure from zero samples");
  std::vector<double> q(samples.begin(), samples.end());
  std::stable_sort(q.begin(), q.end());
  return QuantileMeasure(std::move(q));
}

QuantileMeasure QuantileMeasure::dirac(double x, std::size_t n) {
  if (n == 0) throw InvalidInput("quantile measure needs at least one atom");
  return QuantileMeasure(std::vector<double>(n, x));
}

double QuantileMeasure::mean() const noexcept {
  return std::accumulate(q_.begin(), q_.end(), 0.0) / static_cast<double>(q_.size());
}

QuantileMeasure QuantileMeasure::shifted(double c) const {
  std::vector<double> q(q_);
  for (double& v : q) v += c;
  return QuantileMeasure(std::move(q));
}

QuantileMeasure QuantileMeasure::regrid(std::size_t n) const {
  if (n == 0) throw InvalidInput("regrid target size must be positive");
  if (n == q_.size()) return *this;
  std::vector<double> q(n);
  for (std::size_t j = 0; j < n; ++j) q[j] = generalized_inverse(*this, level(j, n));
  return QuantileMeasure(std::move(q));
}

double generalized_inverse(const QuantileMeasure& m, double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidInput("generalized inverse is evaluated on (0, 1)");
  const std::size_t n = m.size();
  const double nd = static_cast<double>(n);
  // smallest j with j / N >= u; the ceil may overshoot by one through rounding
  auto j = static_cast<std::size_t>(std::ceil(u * nd));
  if (j > 1 && static_cast<double>(j - 1) / nd >= u) --j;
  j = std::clamp<std::size_t>(j, 1, n);
  return m[j - 1];
}

double cdf(const QuantileMeasure& m, double x) {
  const auto q = m.quantiles();
  const auto it = std::upper_bound(q.begin(), q.end(), x);
  return static_cast<double>(it - q.begin()) / static_cast<double>(q.size());
}

double wasserstein_pp(const QuantileMeasure& mu, const QuantileMeasure& nu, double p) {
  if (mu.size() != nu.size()) throw InvalidInput("wasserstein_p needs equal grid sizes; regrid first");
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("wasserstein_p needs finite p >= 1");
  const std::size_t n = mu.size();
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = mu[j] - nu[j];
      s += d * d;
    }
  } else {
    for (std::size_t j = 0; j < n; ++j) s += pow_p(std::abs(mu[j] - nu[j]), p);
  }
  return s / static_cast<double>(n);
}

double wasserstein_p(const QuantileMeasure& mu, const QuantileMeasure& nu, double p) {
  return std::pow(wasserstein_pp(mu, nu, p), 1.0 / p);
}

double MonotoneCoupling::cost(double p) const {
  if (pairs.empty()) return 0.0;
  double s = 0.0;
  for (const auto& [x, y] : pairs) s += pow_p(std::abs(x - y), p);
  return s / static_cast<double>(pairs.size());
}

MonotoneCoupling monotone_coupling(const QuantileMeasure& mu, const QuantileMeasure& nu) {
  if (mu.size() != nu.size()) throw InvalidInput("monotone coupling needs equal grid sizes; regrid first");
  MonotoneCoupling c;
  c.pairs.reserve(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) c.pairs.emplace_back(mu[j], nu[j]);
  return c;
}

std::vector<std::vector<double>> monotone_multicoupling(std::span<const QuantileMeasure> measures) {
  if (measures.empty()) return {};
  const std::size_t n = measures.front().size();
  for (const auto& m : measures)
    if (m.size() != n) throw InvalidInput("multi-coupling needs equal grid sizes; regrid first");
  std::vector<std::vector<double>> traj(n, std::vector<double>(measures.size()));
  for (std::size_t i = 0; i < measures.size(); ++i)
    for (std::size_t j = 0; j < n; ++j) traj[j][i] = measures[i][j];
  return traj;
}

}  // namespace pathlift
