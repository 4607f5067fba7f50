#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <variant>
#include <vector>

#include "pathlift/dyadic_path.hpp"
#include "pathlift/nu_transport.hpp"
#include "pathlift/path_norms.hpp"
#include "pathlift/quantile_transport.hpp"

namespace pathlift {

/// Finitely supported measure on paths: weighted DyadicPaths sharing depth,
/// dimension and unit horizon. Immutable once built.
class PathMeasure {
public:
  /// Throws InvalidInput on empty input, mixed shapes, a horizon other than 1,
  /// negative weights, or weights not summing to 1 within 1e-12.
  PathMeasure(std::vector<DyadicPath> paths, std::vector<double> weights);
  static PathMeasure uniform(std::vector<DyadicPath> paths);

  std::size_t size() const noexcept { return paths_.size(); }
  int depth() const noexcept { return paths_.front().depth(); }
  std::size_t dim() const noexcept { return paths_.front().dim(); }
  std::size_t grid_size() const noexcept { return paths_.front().size(); }
  const std::vector<DyadicPath>& paths() const noexcept { return paths_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  bool has_uniform_weights() const noexcept;

private:
  std::vector<DyadicPath> paths_;
  std::vector<double> weights_;
};

/// Quantile measures at the 2^depth + 1 dyadic times of [0,1].
struct QuantileMeasurePath {
  int depth = 0;
  std::vector<QuantileMeasure> measures;

  /// Throws InvalidInput on a wrong count or mixed grid sizes.
  void validate() const;
  /// The sub-family at the dyadic times of a coarser level.
  QuantileMeasurePath restricted(int level) const;
};

/// Particle ensembles over one label set at the 2^depth + 1 dyadic times.
struct EnsemblePath {
  int depth = 0;
  std::vector<ParticleEnsemble> ensembles;

  void validate() const;
  EnsemblePath restricted(int level) const;
};

using MeasurePathSample = std::variant<QuantileMeasurePath, EnsemblePath>;

int depth_of(const MeasurePathSample& mp);

/// A measure path viewed as a curve in (P_p(R), W_p).
class WassersteinCurve {
public:
  WassersteinCurve(const QuantileMeasurePath& mp, double p);
  WassersteinCurve(QuantileMeasurePath&&, double) = delete;

  int depth() const noexcept { return mp_->depth; }
  double horizon() const noexcept { return 1.0; }
  double distance(std::size_t i, std::size_t j) const;

private:
  const QuantileMeasurePath* mp_;
  double p_;
};

/// An ensemble path viewed as a curve under the nu-based distance W_{p,nu}.
class NuWassersteinCurve {
public:
  NuWassersteinCurve(const EnsemblePath& mp, double p);
  NuWassersteinCurve(EnsemblePath&&, double) = delete;

  int depth() const noexcept { return mp_->depth; }
  double horizon() const noexcept { return 1.0; }
  double distance(std::size_t i, std::size_t j) const;

private:
  const EnsemblePath* mp_;
  double p_;
};

enum class Coupler { quantile, nu_based };

/// Dyadic optimal-coupling lift at level n: particle j follows the j-th
/// multi-coupling trajectory through the 2^n + 1 measures and moves on
/// straight lines in between. The quantile coupler needs a
/// QuantileMeasurePath, nu_based an EnsemblePath (labels shared).
/// Throws InvalidInput on a wrong number of times, mismatched
/// representation, or a label mismatch.
PathMeasure build_dyadic_lift(const MeasurePathSample& mp, Coupler coupler, int n);

/// Lift whose pairing between consecutive times is a seeded random
/// permutation (identity at t = 0). Marginals match the input exactly; the
/// couplings are generally not optimal.
PathMeasure build_shuffled_lift(const QuantileMeasurePath& mp, std::uint64_t seed);

/// sum_j w_j seminorm(path_j)^p.
double lift_energy(const PathMeasure& pi, const NormSpec& spec);

/// Point cloud with weights, used for marginals in d > 1.
struct WeightedCloud {
  std::size_t dim = 1;
  std::vector<double> points;
  std::vector<double> weights;
};

/// Grid index of a dyadic time; throws InvalidInput when t is off the grid.
std::size_t grid_index(const PathMeasure& pi, double t);

/// (e_t)_# pi at grid index k as a quantile measure. Requires d = 1 and
/// uniform weights.
QuantileMeasure marginal_at(const PathMeasure& pi, std::size_t k);
/// Same, with t given as a time; throws InvalidInput off the grid.
QuantileMeasure marginal(const PathMeasure& pi, double t);
/// Marginal in any dimension as a weighted cloud.
WeightedCloud marginal_cloud(const PathMeasure& pi, std::size_t k);
/// Marginals at every grid time.
QuantileMeasurePath marginal_path(const PathMeasure& pi);

struct OptimalityGap {
  double coupling_cost = 0.0;
  double wp_cost = 0.0;
  double gap = 0.0;
};

/// Cost of the lift's own (s,t) coupling against W_p^p of its marginals.
OptimalityGap pairwise_optimality_gap(const PathMeasure& pi, double s, double t, double p);

struct TrackRow {
  int level = 0;
  /// Lift energy truncated at the lift's depth.
  double energy = 0.0;
  /// Energy of the piecewise-geodesic paths summed over all levels.
  double geodesic_energy = 0.0;
  bool within_bound = true;
};

struct TrackResult {
  std::vector<TrackRow> rows;
  double bound_factor = 0.0;
  /// Besov energy of the marginal curve at the finest level.
  double marginal_energy = 0.0;
  double bound = 0.0;
  bool nondecreasing = true;
  bool all_within_bound = true;
  /// max over levels n and level-n times of W_p between the marginals of
  /// pi_n and pi_{n_max}.
  double max_marginal_drift = 0.0;
};

using LevelProvider = std::function<MeasurePathSample(int level)>;

/// 1 / (1 - 2^{-(p - alpha p)}).
double refinement_bound_factor(double alpha, double p);

/// Builds pi_0..pi_{n_max}, tracks their Besov energies and checks them
/// against bound_factor * (Besov energy of the marginal curve).
/// spec.kind must be besov.
TrackResult refine_and_track(const LevelProvider& provider, Coupler coupler, const NormSpec& spec, int n_max);

struct TightnessReport {
  double sup_ratio = 0.0;
  double start_moment = 0.0;
  /// sup over members and k of the ratio, one entry per level m.
  std::vector<double> level_sup;
  /// Least-squares slope of log2(level_sup) against m.
  double growth_rate = 0.0;
  bool diverging = false;
};

/// Discrete tightness certificate: sup over members, levels and k of
/// (sum_j w_j |gamma_j(t_{k+1}^m) - gamma_j(t_k^m)|^p) / |Delta t_m|^{p gamma},
/// plus sup of sum_j w_j |gamma_j(0)|. Requires 1 < p and 1/p < gamma <= 1.
TightnessReport tightness_diagnostic(std::span<const PathMeasure> lifts, double p, double gamma);

}  // namespace pathlift
