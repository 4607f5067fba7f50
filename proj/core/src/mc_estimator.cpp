#include "pathlift/mc_estimator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "pathlift/error.hpp"
#include "pathlift/rng.hpp"
#include "pathlift/power.hpp"

namespace pathlift {

void McConfig::validate() const {
  if (n_mc < 1) throw InvalidInput("n_mc must be at least 1");
  if (depth < 0 || depth > 30) throw InvalidInput("depth must lie in [0, 30]");
  if (grid_n < 1) throw InvalidInput("grid_n must be at least 1");
}

std::uint64_t McConfig::scenario_seed(std::size_t i) const noexcept { return derive_seed(base_seed, i); }

std::string McConfig::seed_derivation() const {
  return "scenario i in [0, " + std::to_string(n_mc) + ") uses seed = first two words of Philox4x32-10(counter=(i_lo, i_hi, 0x5eed, 0), key=(" +
         std::to_string(base_seed & 0xffffffffu) + ", " + std::to_string(base_seed >> 32) +
         ")); W uses stream 0, particle j stream j+1";
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::pair<double, double> mean_and_std_error(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("mean of an empty sample");
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  if (values.size() == 1) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

namespace {

// Evaluates f(i) for i < n on a worker pool; on failure rethrows the
// exception of the smallest failing index so errors are deterministic.
template <class T, class F>
std::vector<T> parallel_map(std::size_t n, std::size_t threads, F&& f) {
  std::vector<T> out(n);
  std::size_t workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = f(i);
      } catch (...) {
        const std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

EnergyEstimate estimate(std::span<const double> values, const NormSpec& spec) {
  const auto [m, se] = mean_and_std_error(values);
  return EnergyEstimate{m, se, values.size(), spec};
}

NormSpec besov_spec(double alpha, double p) {
  NormSpec s;
  s.kind = NormKind::besov;
  s.alpha = alpha;
  s.p = p;
  s.validate();
  return s;
}

// W_p^p between two weighted atom lists on the line, by merging the
// quantile functions.
double weighted_wpp(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b, double p) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double ra = a.empty() ? 0.0 : a[0].second;
  double rb = b.empty() ? 0.0 : b[0].second;
  double cost = 0.0;
  while (i < a.size() && j < b.size()) {
    const double m = std::min(ra, rb);
    const double d = std::abs(a[i].first - b[j].first);
    if (d > 0.0 && m > 0.0) cost += m * pow_p(d, p);
    ra -= m;
    rb -= m;
    if (ra <= 1e-12 * a[i].second) {
      if (++i < a.size()) ra = a[i].second;
    }
    if (rb <= 1e-12 * b[j].second) {
      if (++j < b.size()) rb = b[j].second;
    }
  }
  return cost;
}

}  // namespace

std::vector<double> run_scenarios(const McConfig& cfg, const std::function<double(std::uint64_t)>& f) {
  cfg.validate();
  return parallel_map<double>(cfg.n_mc, cfg.threads, [&](std::size_t i) { return f(cfg.scenario_seed(i)); });
}

WpEstimate expected_wp(const PairSampler& sampler, double p, const McConfig& cfg) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidInput("expected_wp needs 1 <= p < infinity");
  const auto vals = run_scenarios(cfg, [&](std::uint64_t seed) {
    const auto [mu, nu] = sampler(seed);
    return wasserstein_pp(mu, nu, p);
  });
  WpEstimate r;
  std::tie(r.mean_pp, r.std_error_pp) = mean_and_std_error(vals);
  r.n = vals.size();
  r.value = std::pow(r.mean_pp, 1.0 / p);
  r.std_error = r.mean_pp > 0.0 ? r.std_error_pp * r.value / (p * r.mean_pp) : 0.0;
  return r;
}

EnergyEstimate process_besov_energy(const MeasurePathSampler& sampler, double alpha, double p, const McConfig& cfg) {
  const NormSpec spec = besov_spec(alpha, p);
  const auto vals = run_scenarios(cfg, [&](std::uint64_t seed) {
    const QuantileMeasurePath mp = sampler(seed);
    return besov_energy(WassersteinCurve(mp, p), alpha, p);
  });
  return estimate(vals, spec);
}

EnergyEstimate expected_lift_energy(const LiftSampler& sampler, const NormSpec& spec, const McConfig& cfg) {
  spec.validate();
  const auto vals = run_scenarios(cfg, [&](std::uint64_t seed) { return lift_energy(sampler(seed), spec); });
  return estimate(vals, spec);
}

double attainment_tolerance(const EnergyEstimate& lift, const EnergyEstimate& marginal) {
  return 1e-3 * std::abs(marginal.mean) +
         3.0 * std::sqrt(lift.std_error * lift.std_error + marginal.std_error * marginal.std_error);
}

namespace {

struct ScenarioComparison {
  double energy_a = 0.0;
  double energy_b = 0.0;
  double marginal = 0.0;
  double mismatch_a = 0.0;
  double mismatch_b = 0.0;
};

double spot_mismatch(const PathMeasure& pi, const QuantileMeasurePath& mp, double p) {
  if (pi.depth() != mp.depth) throw InvalidInput("lift and measure path differ in depth");
  double worst = 0.0;
  for (double t : {0.25, 0.5, 1.0}) {
    const std::size_t k = grid_index(pi, t);
    QuantileMeasure lifted = marginal_at(pi, k);
    const auto& target = mp.measures[k];
    if (lifted.size() != target.size()) lifted = lifted.regrid(target.size());
    worst = std::max(worst, wasserstein_p(lifted, target, p));
  }
  return worst;
}

}  // namespace

LiftComparison compare_lifts(const LiftCandidate& a, const LiftCandidate& b, const MeasurePathSampler& marginals,
                             const NormSpec& spec, const McConfig& cfg) {
  spec.validate();
  cfg.validate();
  if (spec.kind != NormKind::besov) throw InvalidInput("compare_lifts compares besov energies");
  const double p = spec.p;
  const auto rows = parallel_map<ScenarioComparison>(cfg.n_mc, cfg.threads, [&](std::size_t i) {
    const std::uint64_t seed = cfg.scenario_seed(i);
    const QuantileMeasurePath mp = marginals(seed);
    if (mp.depth < 2) throw InvalidInput("compare_lifts needs measure paths of depth >= 2");
    const PathMeasure pa = a.sampler(seed);
    const PathMeasure pb = b.sampler(seed);
    ScenarioComparison s;
    s.energy_a = lift_energy(pa, spec);
    s.energy_b = lift_energy(pb, spec);
    s.marginal = besov_energy(WassersteinCurve(mp, p), spec.alpha, p);
    s.mismatch_a = spot_mismatch(pa, mp, p);
    s.mismatch_b = spot_mismatch(pb, mp, p);
    if (a.exact_marginals && s.mismatch_a > 1e-8)
      throw PreconditionFailure("lift '" + a.name + "' does not reproduce the marginals (W_p gap " +
                                std::to_string(s.mismatch_a) + ")");
    if (b.exact_marginals && s.mismatch_b > 1e-8)
      throw PreconditionFailure("lift '" + b.name + "' does not reproduce the marginals (W_p gap " +
                                std::to_string(s.mismatch_b) + ")");
    return s;
  });

  const std::size_t n = rows.size();
  std::vector<double> ea(n), eb(n), em(n), diff(n);
  LiftComparison r;
  for (std::size_t i = 0; i < n; ++i) {
    ea[i] = rows[i].energy_a;
    eb[i] = rows[i].energy_b;
    em[i] = rows[i].marginal;
    diff[i] = ea[i] - eb[i];
    r.marginal_mismatch_a = std::max(r.marginal_mismatch_a, rows[i].mismatch_a);
    r.marginal_mismatch_b = std::max(r.marginal_mismatch_b, rows[i].mismatch_b);
  }
  r.energy_a = estimate(ea, spec);
  r.energy_b = estimate(eb, spec);
  r.marginal_energy = estimate(em, spec);

  const double tol_a = attainment_tolerance(r.energy_a, r.marginal_energy);
  const double tol_b = attainment_tolerance(r.energy_b, r.marginal_energy);
  r.both_above_marginal =
      r.energy_a.mean >= r.marginal_energy.mean - tol_a && r.energy_b.mean >= r.marginal_energy.mean - tol_b;

  // paired difference: both lifts see the same scenarios
  const auto [dm, dse] = mean_and_std_error(diff);
  const double dtol = 1e-3 * std::max(std::abs(r.energy_a.mean), std::abs(r.energy_b.mean)) + 3.0 * dse;
  r.smaller = std::abs(dm) <= dtol ? '=' : (dm < 0.0 ? 'a' : 'b');
  const bool use_b = r.smaller == 'b';
  const EnergyEstimate& best = use_b ? r.energy_b : r.energy_a;
  r.smaller_attains = std::abs(best.mean - r.marginal_energy.mean) <= (use_b ? tol_b : tol_a);
  return r;
}

AverageLift average_lift(const LiftSampler& sampler, const McConfig& cfg, double check_p) {
  cfg.validate();
  if (!(check_p >= 1.0) || !std::isfinite(check_p)) throw InvalidInput("check_p must be >= 1");
  const auto lifts = parallel_map<std::optional<PathMeasure>>(
      cfg.n_mc, cfg.threads, [&](std::size_t i) { return std::optional<PathMeasure>(sampler(cfg.scenario_seed(i))); });
  const PathMeasure& first = *lifts.front();
  if (first.dim() != 1) throw InvalidInput("average_lift checks need d = 1");
  const double share = 1.0 / static_cast<double>(cfg.n_mc);
  std::vector<DyadicPath> paths;
  std::vector<double> weights;
  for (const auto& pi : lifts) {
    if (pi->depth() != first.depth() || pi->dim() != first.dim() || pi->size() != first.size())
      throw InvalidInput("sampled lifts differ in depth, dimension or path count");
    for (std::size_t j = 0; j < pi->size(); ++j) {
      paths.push_back(pi->paths()[j]);
      weights.push_back(pi->weights()[j] * share);
    }
  }
  PathMeasure pooled(std::move(paths), std::move(weights));

  auto pooled_atoms = [&](std::size_t k) {
    std::vector<std::pair<double, double>> v(pooled.size());
    for (std::size_t j = 0; j < pooled.size(); ++j) v[j] = {pooled.paths()[j][k], pooled.weights()[j]};
    return v;
  };
  auto mixture_atoms = [&](std::size_t k) {
    std::vector<std::pair<double, double>> v;
    v.reserve(pooled.size());
    for (const auto& pi : lifts) {
      const WeightedCloud c = marginal_cloud(*pi, k);
      for (std::size_t j = 0; j < c.weights.size(); ++j) v.emplace_back(c.points[j], c.weights[j] * share);
    }
    return v;
  };

  AverageLift r{pooled, true, true, check_p, std::numeric_limits<double>::infinity()};
  std::vector<std::pair<double, double>> prev;
  for (std::size_t k = 0; k < pooled.grid_size(); ++k) {
    auto cur = pooled_atoms(k);
    const double gap = weighted_wpp(cur, mixture_atoms(k), check_p);
    if (gap > 1e-12) r.marginals_consistent = false;
    if (k > 0) {
      const double lhs = weighted_wpp(prev, cur, check_p);
      double rhs = 0.0;
      for (std::size_t j = 0; j < pooled.size(); ++j) {
        const double d = std::abs(pooled.paths()[j][k] - pooled.paths()[j][k - 1]);
        if (d > 0.0) rhs += pooled.weights()[j] * pow_p(d, check_p);
      }
      const double slack = rhs - lhs;
      r.worst_slack = std::min(r.worst_slack, slack);
      if (slack < -1e-12 * std::max(1.0, rhs)) r.coupling_bound_holds = false;
    }
    prev = std::move(cur);
  }
  if (pooled.grid_size() < 2) r.worst_slack = 0.0;
  return r;
}

}  // namespace pathlift
