#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace pathlift {

/// Probability measure on R stored as its quantile function on the midpoint
/// grid u_j = (j + 1/2) / N, j = 0..N-1: equivalently, N atoms of mass 1/N.
class QuantileMeasure {
public:
  QuantileMeasure() = default;
  /// Throws InvalidInput if empty, unsorted or non-finite.
  explicit QuantileMeasure(std::vector<double> quantiles);

  /// Sorts the samples (stable for ties); throws InvalidInput when empty.
  static QuantileMeasure from_samples(std::span<const double> samples);
  static QuantileMeasure dirac(double x, std::size_t n = 1);

  std::size_t size() const noexcept { return q_.size(); }
  std::span<const double> quantiles() const noexcept { return q_; }
  double operator[](std::size_t j) const noexcept { return q_[j]; }

  /// Midpoint label of atom j.
  static double level(std::size_t j, std::size_t n) noexcept {
    return (static_cast<double>(j) + 0.5) / static_cast<double>(n);
  }

  double mean() const noexcept;
  /// Same measure shifted by c.
  QuantileMeasure shifted(double c) const;
  /// Evaluates the generalized inverse at the target midpoint grid.
  QuantileMeasure regrid(std::size_t n) const;

  friend bool operator==(const QuantileMeasure&, const QuantileMeasure&) = default;

private:
  std::vector<double> q_;
};

/// Left-continuous generalized inverse inf{x : F(x) >= u}, i.e. the
/// ceil(u N)-th smallest atom. Throws InvalidInput unless 0 < u < 1.
double generalized_inverse(const QuantileMeasure& m, double u);

/// Right-continuous CDF F(x) = #{atoms <= x} / N.
double cdf(const QuantileMeasure& m, double x);

/// W_p between equal-size quantile measures: ((1/N) sum_j |x_j - y_j|^p)^{1/p}.
/// Throws InvalidInput on size mismatch or p < 1.
double wasserstein_p(const QuantileMeasure& mu, const QuantileMeasure& nu, double p);
/// The p-th power, without the final root.
double wasserstein_pp(const QuantileMeasure& mu, const QuantileMeasure& nu, double p);

/// Comonotone pairing (x_j, y_j) = (F_mu^{-1}(u_j), F_nu^{-1}(u_j)).
struct MonotoneCoupling {
  std::vector<std::pair<double, double>> pairs;

  double cost(double p) const;
};

MonotoneCoupling monotone_coupling(const QuantileMeasure& mu, const QuantileMeasure& nu);

/// trajectories[j][i] = F_{i}^{-1}(u_j): particle j of the quantile process
/// visiting every measure of the family. Every two-time marginal is the
/// monotone, hence W_p-optimal, coupling.
std::vector<std::vector<double>> monotone_multicoupling(std::span<const QuantileMeasure> measures);

}  // namespace pathlift
