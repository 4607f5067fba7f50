#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pathlift/dyadic_path.hpp"
#include "pathlift/lift_builder.hpp"
#include "pathlift/quantile_transport.hpp"

namespace pathlift {

/// Phi^{-1}(u), the standard normal quantile.
double normal_quantile(double u);
/// c(q) = sqrt(2) erf^{-1}(2q - 1); equal to Phi^{-1}(q), computed through erf.
double gaussian_label_offset(double q);

/// Brownian motion on a dyadic grid of [0,1] built by Brownian-bridge
/// midpoint refinement. The Gaussian draw attached to the dyadic node k/2^m
/// (k odd) depends only on (seed, stream, node), so a deeper path keeps every
/// coarser value: refine(depth) of a path equals generating at that depth.
class BrownianPath {
public:
  BrownianPath(std::uint64_t seed, std::uint64_t stream, int depth, std::size_t dim = 1);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }
  const DyadicPath& path() const noexcept { return path_; }
  int depth() const noexcept { return path_.depth(); }
  std::size_t dim() const noexcept { return path_.dim(); }

  BrownianPath refined(int depth) const { return BrownianPath(seed_, stream_, depth, dim()); }

private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  DyadicPath path_;
};

/// Heat flow d_t mu = (1/2) Laplacian mu from delta_0: N(0, t) on the
/// quantile grid, quantiles sqrt(t) Phi^{-1}(u_j).
QuantileMeasure heat_flow_marginal(double t, std::size_t n);
/// Heat flow at every dyadic time of the given depth.
QuantileMeasurePath heat_flow_path(int depth, std::size_t n);

/// One realization of the stochastic heat equation
/// d mu = Laplacian mu dt - div(mu dW), mu_0 = delta_0, whose solution is
/// mu_t = N(W_t, t). The Brownian path uses stream 0 of the seed.
struct ScenarioSample {
  std::uint64_t seed = 0;
  BrownianPath common;
  QuantileMeasurePath measures;
  std::optional<PathMeasure> lift;
};

ScenarioSample stochastic_heat_scenario(std::uint64_t seed, int depth, std::size_t n);

/// Particle representation X = B^(j) + W with B^(j) independent Brownian
/// motions (seed2, stream j + 1). zero_noise replaces every B by 0.
PathMeasure independent_particle_paths(const ScenarioSample& scenario, std::uint64_t seed2, std::size_t count,
                                       bool zero_noise = false);

/// Quantile representation Y^j_t = c(u_j) sqrt(t) + W_t.
PathMeasure quantile_particle_paths(const ScenarioSample& scenario, std::size_t n);

/// Coefficients of the conditional SDE dX = b dt + alpha dB + sigma dW with
/// alpha = (2a - sigma sigma^T)^{1/2}. Each callable receives the time, the
/// state and the common-noise value W_t.
struct SdeCoefficients {
  using Vector = Eigen::VectorXd;
  using Matrix = Eigen::MatrixXd;
  using Field = std::function<Vector(double t, const Vector& x, const Vector& w)>;
  using MatrixField = std::function<Matrix(double t, const Vector& x, const Vector& w)>;

  std::size_t dim = 1;
  Field drift;
  MatrixField diffusion_a;
  MatrixField common_sigma;
};

struct Parabolicity {
  bool ok = false;
  double min_eigenvalue = 0.0;
  Eigen::MatrixXd alpha;
};

/// ok iff the smallest eigenvalue of 2a - sigma sigma^T is >= -1e-10; alpha is
/// its PSD square root with slightly negative eigenvalues clamped to 0.
/// Throws InvalidInput if a is not symmetric or shapes disagree.
Parabolicity parabolicity_and_alpha(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma);

struct EulerOptions {
  /// Number of Euler steps on [0,1]; a power of two >= 2^depth(W).
  std::size_t substeps = 1024;
  /// Integration starts here with state x0; must be a substep grid point.
  double t_start = 0.0;
  /// Drop the individual noise B (the test hook for additive cases).
  bool zero_individual_noise = false;
};

struct SdeTrajectory {
  /// Values on W's grid; entries before t_start repeat x0.
  DyadicPath path;
  double t_start = 0.0;
};

/// Explicit Euler-Maruyama on the substep grid. W is refined to substep
/// resolution by its own Brownian bridge; B increments come from seed_b.
/// Throws PreconditionFailure naming (t, x) if parabolicity fails at any
/// evaluation point.
SdeTrajectory euler_maruyama(const SdeCoefficients& coeffs, const BrownianPath& w, std::uint64_t seed_b,
                             const Eigen::VectorXd& x0, const EulerOptions& options);

/// Named coefficient presets in d = 1:
///   she-form1: b = 0, a = 1, sigma = 1       (alpha = 1)
///   she-form2: b = -(1/2) grad log rho_t = (x - W_t) / (2t), a = 1/2, sigma = 1
///   heat:      b = 0, a = 1/2, sigma = 0     (alpha = 1)
/// a_override / sigma_override replace the constant a and sigma.
SdeCoefficients sde_preset(std::string_view name, std::optional<double> a_override = std::nullopt,
                           std::optional<double> sigma_override = std::nullopt);

/// Monte Carlo + trapezoid-in-time estimate of
///   T^{(p-1)/2} E[int int |b|^p dmu dt] + (E[int int |a|^p dmu dt])^{1/2},
/// |a| the Frobenius norm. samples[omega][k] is the measure at t_k = k T / K.
struct CloudSeries {
  std::vector<WeightedCloud> slices;
};

using DriftEval = std::function<Eigen::VectorXd(std::size_t omega, double t, const Eigen::VectorXd& x)>;
using DiffusionEval = std::function<Eigen::MatrixXd(std::size_t omega, double t, const Eigen::VectorXd& x)>;

double sfpe_p_energy(std::span<const CloudSeries> samples, const DriftEval& b, const DiffusionEval& a, double p,
                     double horizon);

struct HolderExponent {
  double gamma = 0.0;
  /// Admissible fractional Sobolev exponents (1/p, gamma); empty when p <= 3.
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool window_empty = true;
};

/// gamma = 1/2 - 1/(2p). Throws InvalidInput unless p > 1.
HolderExponent sfpe_holder_exponent(double p);

}  // namespace pathlift
