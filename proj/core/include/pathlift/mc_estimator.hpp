#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathlift/lift_builder.hpp"
#include "pathlift/path_norms.hpp"
#include "pathlift/quantile_transport.hpp"

namespace pathlift {

/// Scenario i of a run uses seed derive_seed(base_seed, i).
struct McConfig {
  std::size_t n_mc = 1000;
  std::uint64_t base_seed = 0;
  int depth = 8;
  std::size_t grid_n = 256;
  bool report_confidence = true;
  /// Worker threads; 0 picks std::thread::hardware_concurrency(). Results do
  /// not depend on this value.
  std::size_t threads = 0;

  void validate() const;
  std::uint64_t scenario_seed(std::size_t i) const noexcept;
  /// Human-readable recipe for the per-scenario seeds.
  std::string seed_derivation() const;
};

struct EnergyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
  NormSpec spec;
};

/// Estimate of the L^p(Omega)-averaged distance (E[W_p^p])^{1/p}.
struct WpEstimate {
  /// MC mean of W_p^p and its standard error.
  double mean_pp = 0.0;
  double std_error_pp = 0.0;
  /// (mean_pp)^{1/p} with a delta-method standard error.
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Pairwise (cascade) summation; fixed association order for a given length.
double pairwise_sum(std::span<const double> values);

/// Mean and standard error of the mean with pairwise-summed moments.
std::pair<double, double> mean_and_std_error(std::span<const double> values);

/// Evaluates f(scenario_seed(i)) for i < n_mc, possibly in parallel, and
/// returns the values in scenario order.
std::vector<double> run_scenarios(const McConfig& cfg, const std::function<double(std::uint64_t)>& f);

using PairSampler = std::function<std::pair<QuantileMeasure, QuantileMeasure>(std::uint64_t seed)>;
using MeasurePathSampler = std::function<QuantileMeasurePath(std::uint64_t seed)>;
using LiftSampler = std::function<PathMeasure(std::uint64_t seed)>;

/// Samplers must be pure functions of the seed; they may run concurrently.
WpEstimate expected_wp(const PairSampler& sampler, double p, const McConfig& cfg);

/// E[|mu|_{b^{alpha,p}}^p] from samplewise W_p between dyadic marginals.
EnergyEstimate process_besov_energy(const MeasurePathSampler& sampler, double alpha, double p, const McConfig& cfg);

/// E[lift_energy(pi)].
EnergyEstimate expected_lift_energy(const LiftSampler& sampler, const NormSpec& spec, const McConfig& cfg);

/// A lift sampler together with whether its marginals are meant to match the
/// measure path exactly. Particle (Monte Carlo) lifts such as B + W only match
/// in law, so their marginal discrepancy is reported instead of enforced.
struct LiftCandidate {
  std::string name;
  LiftSampler sampler;
  bool exact_marginals = true;
};

struct LiftComparison {
  EnergyEstimate energy_a;
  EnergyEstimate energy_b;
  EnergyEstimate marginal_energy;
  /// Both lift energies >= marginal energy - tolerance.
  bool both_above_marginal = false;
  /// 'a', 'b', or '=' when the difference is inside the tolerance.
  char smaller = '=';
  /// The smaller lift attains the marginal energy within tolerance.
  bool smaller_attains = false;
  /// Largest spot-check W_p distance between lift and measure marginals,
  /// per candidate.
  double marginal_mismatch_a = 0.0;
  double marginal_mismatch_b = 0.0;
};

/// Equality tolerance used by compare_lifts: 1e-3 relative plus three
/// combined standard errors.
double attainment_tolerance(const EnergyEstimate& lift, const EnergyEstimate& marginal);

/// Runs both lifts and the marginal energy on the same scenario seeds and
/// spot-checks marginals at t = 1/4, 1/2, 1. Throws PreconditionFailure if
/// an exact-marginal candidate misses by more than 1e-8 in W_p.
/// spec.kind must be besov.
LiftComparison compare_lifts(const LiftCandidate& a, const LiftCandidate& b, const MeasurePathSampler& marginals,
                             const NormSpec& spec, const McConfig& cfg);

struct AverageLift {
  PathMeasure pooled;
  /// (e_t)_# E pi equals the mixture of the per-scenario marginals at every
  /// grid time (W_p^p gap within 1e-12).
  bool marginals_consistent = false;
  /// W_p^p(E mu_s, E mu_t) <= int |gamma_t - gamma_s|^p d(E pi) on every
  /// dyadic neighbour pair, checked with p = check_p.
  bool coupling_bound_holds = false;
  double check_p = 2.0;
  double worst_slack = 0.0;
};

/// Pools all scenarios' paths with weights divided by n_mc. Throws
/// InvalidInput if the sampled lifts differ in depth, dim or path count.
AverageLift average_lift(const LiftSampler& sampler, const McConfig& cfg, double check_p = 2.0);

}  // namespace pathlift
