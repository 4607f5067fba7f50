#include "pathlift/processes.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/erf.hpp>

#include "pathlift/error.hpp"
#include "pathlift/rng.hpp"

namespace pathlift {

double normal_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw InvalidInput("normal quantile needs 0 < u < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

double gaussian_label_offset(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidInput("label offset needs 0 < q < 1");
  return std::numbers::sqrt2 * boost::math::erf_inv(2.0 * q - 1.0);
}

namespace {

std::vector<double> brownian_values(std::uint64_t seed, std::uint64_t stream, int depth, std::size_t dim) {
  if (depth < 0 || depth > 30) throw InvalidInput("Brownian depth must lie in [0, 30]");
  if (dim == 0) throw InvalidInput("Brownian dimension must be positive");
  const CounterRng rng(seed, stream);
  const std::size_t last = std::size_t{1} << depth;
  std::vector<double> v((last + 1) * dim, 0.0);
  for (std::size_t c = 0; c < dim; ++c) v[last * dim + c] = rng.normal(1, static_cast<std::uint32_t>(c));
  // level m fills the odd multiples of 2^-m; node id 2^m + k is unique per node
  for (int m = 1; m <= depth; ++m) {
    const std::size_t half = std::size_t{1} << (depth - m);
    const double sd = std::sqrt(std::exp2(-(m + 1)));
    for (std::size_t k = 1; k < (std::size_t{1} << m); k += 2) {
      const std::uint64_t node = (std::uint64_t{1} << m) + k;
      const std::size_t mid = k * half;
      for (std::size_t c = 0; c < dim; ++c) {
        const double left = v[(mid - half) * dim + c];
        const double right = v[(mid + half) * dim + c];
        v[mid * dim + c] = 0.5 * (left + right) + sd * rng.normal(node, static_cast<std::uint32_t>(c));
      }
    }
  }
  return v;
}

// Offsets for the most recent grid size, cached per thread.
const std::vector<double>& label_offsets(std::size_t n) {
  thread_local std::vector<double> c;
  if (c.size() != n) {
    c.resize(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = gaussian_label_offset(QuantileMeasure::level(j, n));
  }
  return c;
}

}  // namespace

BrownianPath::BrownianPath(std::uint64_t seed, std::uint64_t stream, int depth, std::size_t dim)
    : seed_(seed), stream_(stream), path_(depth, dim, brownian_values(seed, stream, depth, dim)) {}

QuantileMeasure heat_flow_marginal(double t, std::size_t n) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidInput("heat flow time must be nonnegative");
  if (n == 0) throw InvalidInput("quantile grid size must be positive");
  std::vector<double> q(n, 0.0);
  const double s = std::sqrt(t);
  if (s > 0.0)
    for (std::size_t j = 0; j < n; ++j) q[j] = s * normal_quantile(QuantileMeasure::level(j, n));
  return QuantileMeasure(std::move(q));
}

QuantileMeasurePath heat_flow_path(int depth, std::size_t n) {
  if (depth < 0 || depth > 30) throw InvalidInput("depth must lie in [0, 30]");
  QuantileMeasurePath mp{depth, {}};
  const std::size_t last = std::size_t{1} << depth;
  mp.measures.reserve(last + 1);
  for (std::size_t k = 0; k <= last; ++k)
    mp.measures.push_back(heat_flow_marginal(static_cast<double>(k) / static_cast<double>(last), n));
  return mp;
}

ScenarioSample stochastic_heat_scenario(std::uint64_t seed, int depth, std::size_t n) {
  if (n == 0) throw InvalidInput("quantile grid size must be positive");
  BrownianPath w(seed, 0, depth, 1);
  const auto& c = label_offsets(n);
  QuantileMeasurePath mp{depth, {}};
  const auto& path = w.path();
  mp.measures.reserve(path.size());
  for (std::size_t k = 0; k < path.size(); ++k) {
    const double s = std::sqrt(path.time(k));
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) q[j] = c[j] * s + path[k];
    mp.measures.emplace_back(std::move(q));
  }
  return ScenarioSample{seed, std::move(w), std::move(mp), std::nullopt};
}

PathMeasure independent_particle_paths(const ScenarioSample& scenario, std::uint64_t seed2, std::size_t count,
                                       bool zero_noise) {
  if (count == 0) throw InvalidInput("particle count must be positive");
  const auto& w = scenario.common.path();
  std::vector<DyadicPath> paths;
  paths.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::vector<double> v(w.values().begin(), w.values().end());
    if (!zero_noise) {
      const BrownianPath b(seed2, j + 1, w.depth(), w.dim());
      const auto bv = b.path().values();
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += bv[i];
    }
    paths.emplace_back(w.depth(), w.dim(), std::move(v));
  }
  return PathMeasure::uniform(std::move(paths));
}

PathMeasure quantile_particle_paths(const ScenarioSample& scenario, std::size_t n) {
  if (n == 0) throw InvalidInput("quantile grid size must be positive");
  const auto& w = scenario.common.path();
  if (w.dim() != 1) throw InvalidInput("quantile particles need a scalar Brownian path");
  const auto& c = label_offsets(n);
  std::vector<DyadicPath> paths;
  paths.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> v(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) v[k] = c[j] * std::sqrt(w.time(k)) + w[k];
    paths.push_back(DyadicPath::scalar(w.depth(), std::move(v)));
  }
  return PathMeasure::uniform(std::move(paths));
}

Parabolicity parabolicity_and_alpha(const Eigen::MatrixXd& a, const Eigen::MatrixXd& sigma) {
  if (a.rows() != a.cols() || a.rows() == 0) throw InvalidInput("a must be a nonempty square matrix");
  if (sigma.rows() != a.rows()) throw InvalidInput("sigma must have as many rows as a");
  if (!a.allFinite() || !sigma.allFinite()) throw InvalidInput("coefficients must be finite");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidInput("a must be symmetric");
  const Eigen::MatrixXd m = 2.0 * a - sigma * sigma.transpose();
  Parabolicity r;
  if (m.rows() == 1) {
    const double v = m(0, 0);
    r.min_eigenvalue = v;
    r.ok = v >= -1e-10;
    r.alpha = Eigen::MatrixXd::Constant(1, 1, std::sqrt(std::max(v, 0.0)));
    return r;
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  const Eigen::VectorXd ev = es.eigenvalues();
  r.min_eigenvalue = ev.minCoeff();
  r.ok = r.min_eigenvalue >= -1e-10;
  const Eigen::VectorXd root = ev.cwiseMax(0.0).cwiseSqrt();
  r.alpha = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
  return r;
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

int log2_exact(std::size_t n) {
  int k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

std::string describe_point(double t, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(17);
  os << "parabolicity fails at (t=" << t << ", x=(";
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << "))";
  return os.str();
}

}  // namespace

SdeTrajectory euler_maruyama(const SdeCoefficients& coeffs, const BrownianPath& w, std::uint64_t seed_b,
                             const Eigen::VectorXd& x0, const EulerOptions& options) {
  const std::size_t d = coeffs.dim;
  if (d == 0 || !coeffs.drift || !coeffs.diffusion_a || !coeffs.common_sigma)
    throw InvalidInput("SDE coefficients are incomplete");
  if (static_cast<std::size_t>(x0.size()) != d) throw InvalidInput("x0 has the wrong dimension");
  if (w.dim() != d) throw InvalidInput("common noise dimension must match the state dimension");
  const std::size_t steps = options.substeps;
  if (!is_power_of_two(steps) || steps < (std::size_t{1} << w.depth()))
    throw InvalidInput("substeps must be a power of two no smaller than 2^depth(W)");
  const int fine_depth = log2_exact(steps);
  if (fine_depth > 30) throw InvalidInput("substeps exceed 2^30");
  const double h = 1.0 / static_cast<double>(steps);
  const double start_scaled = options.t_start * static_cast<double>(steps);
  if (!(options.t_start >= 0.0 && options.t_start < 1.0) || start_scaled != std::floor(start_scaled))
    throw InvalidInput("t_start must be a substep grid point in [0, 1)");
  const auto n0 = static_cast<std::size_t>(start_scaled);

  const BrownianPath fine_w = w.refined(fine_depth);
  const auto& wf = fine_w.path();
  const CounterRng rng_b(seed_b, 0);
  const double sqrt_h = std::sqrt(h);
  const std::size_t stride = steps >> w.depth();

  std::vector<double> out((w.path().size()) * d);
  Eigen::VectorXd x = x0;
  Eigen::VectorXd wt(d), dw(d), db(d);
  auto store = [&](std::size_t n) {
    if (n % stride == 0)
      for (std::size_t c = 0; c < d; ++c) out[(n / stride) * d + c] = x[c];
  };
  for (std::size_t n = 0; n <= n0; ++n) store(n);
  for (std::size_t n = n0; n < steps; ++n) {
    const double t = static_cast<double>(n) * h;
    for (std::size_t c = 0; c < d; ++c) {
      wt[c] = wf.point(n)[c];
      dw[c] = wf.point(n + 1)[c] - wt[c];
      db[c] = options.zero_individual_noise ? 0.0 : sqrt_h * rng_b.normal(n, static_cast<std::uint32_t>(c));
    }
    const Eigen::VectorXd b = coeffs.drift(t, x, wt);
    const Eigen::MatrixXd a = coeffs.diffusion_a(t, x, wt);
    const Eigen::MatrixXd sigma = coeffs.common_sigma(t, x, wt);
    const Parabolicity par = parabolicity_and_alpha(a, sigma);
    if (!par.ok) throw PreconditionFailure(describe_point(t, x));
    x += b * h + par.alpha * db + sigma * dw;
    if (!x.allFinite()) throw PreconditionFailure("Euler-Maruyama state left the finite range");
    store(n + 1);
  }
  return SdeTrajectory{DyadicPath(w.depth(), d, std::move(out)), options.t_start};
}

SdeCoefficients sde_preset(std::string_view name, std::optional<double> a_override,
                           std::optional<double> sigma_override) {
  double a = 0.0, sigma = 0.0;
  bool singular_drift = false;
  if (name == "she-form1") {
    a = 1.0;
    sigma = 1.0;
  } else if (name == "she-form2") {
    a = 0.5;
    sigma = 1.0;
    singular_drift = true;
  } else if (name == "heat") {
    a = 0.5;
    sigma = 0.0;
  } else {
    throw InvalidInput("unknown SDE preset '" + std::string(name) + "'");
  }
  if (a_override) a = *a_override;
  if (sigma_override) sigma = *sigma_override;
  if (!std::isfinite(a) || !std::isfinite(sigma)) throw InvalidInput("preset coefficients must be finite");

  SdeCoefficients c;
  c.dim = 1;
  if (singular_drift) {
    c.drift = [](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& w) -> Eigen::VectorXd {
      if (!(t > 0.0)) throw PreconditionFailure("the drift (x - W_t)/(2t) is singular at t = 0");
      return (x - w) / (2.0 * t);
    };
  } else {
    c.drift = [](double, const Eigen::VectorXd& x, const Eigen::VectorXd&) -> Eigen::VectorXd {
      return Eigen::VectorXd::Zero(x.size());
    };
  }
  c.diffusion_a = [a](double, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, a);
  };
  c.common_sigma = [sigma](double, const Eigen::VectorXd&, const Eigen::VectorXd&) -> Eigen::MatrixXd {
    return Eigen::MatrixXd::Constant(1, 1, sigma);
  };
  return c;
}

double sfpe_p_energy(std::span<const CloudSeries> samples, const DriftEval& b, const DiffusionEval& a, double p,
                     double horizon) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("p-energy needs 1 < p < infinity");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidInput("horizon must be positive");
  if (samples.empty()) throw InvalidInput("p-energy needs at least one sample");
  double eb = 0.0, ea = 0.0;
  for (std::size_t omega = 0; omega < samples.size(); ++omega) {
    const auto& slices = samples[omega].slices;
    if (slices.size() < 2) throw InvalidInput("p-energy needs at least two time slices");
    const std::size_t steps = slices.size() - 1;
    const double dt = horizon / static_cast<double>(steps);
    double ib = 0.0, ia = 0.0;
    for (std::size_t k = 0; k <= steps; ++k) {
      const auto& cloud = slices[k];
      const double t = horizon * static_cast<double>(k) / static_cast<double>(steps);
      const std::size_t count = cloud.weights.size();
      if (cloud.dim == 0 || cloud.points.size() != count * cloud.dim)
        throw InvalidInput("malformed weighted cloud");
      double sb = 0.0, sa = 0.0;
      for (std::size_t i = 0; i < count; ++i) {
        const Eigen::Map<const Eigen::VectorXd> x(cloud.points.data() + i * cloud.dim,
                                                  static_cast<Eigen::Index>(cloud.dim));
        const Eigen::VectorXd xi = x;
        const double nb = b(omega, t, xi).norm();
        const double na = a(omega, t, xi).norm();
        if (nb > 0.0) sb += cloud.weights[i] * std::pow(nb, p);
        if (na > 0.0) sa += cloud.weights[i] * std::pow(na, p);
      }
      const double wq = (k == 0 || k == steps) ? 0.5 * dt : dt;
      ib += wq * sb;
      ia += wq * sa;
    }
    eb += ib;
    ea += ia;
  }
  const double n = static_cast<double>(samples.size());
  return std::pow(horizon, 0.5 * (p - 1.0)) * (eb / n) + std::sqrt(ea / n);
}

HolderExponent sfpe_holder_exponent(double p) {
  if (!(p > 1.0) || std::isnan(p)) throw InvalidInput("Holder exponent needs p > 1");
  HolderExponent h;
  h.gamma = std::isinf(p) ? 0.5 : 0.5 - 1.0 / (2.0 * p);
  h.window_empty = !(p > 3.0);
  if (!h.window_empty) {
    h.window_lo = std::isinf(p) ? 0.0 : 1.0 / p;
    h.window_hi = h.gamma;
  }
  return h;
}

}  // namespace pathlift
