#include "pathlift/lift_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pathlift/error.hpp"
#include "pathlift/rng.hpp"
#include "pathlift/power.hpp"

namespace pathlift {

namespace {

std::size_t points_at(int depth) { return (std::size_t{1} << depth) + 1; }

void check_level(int level, int depth) {
  if (level < 0 || level > depth)
    throw InvalidInput("level " + std::to_string(level) + " outside [0, " + std::to_string(depth) + "]");
}

}  // namespace

PathMeasure::PathMeasure(std::vector<DyadicPath> paths, std::vector<double> weights)
    : paths_(std::move(paths)), weights_(std::move(weights)) {
  if (paths_.empty()) throw InvalidInput("path measure needs at least one path");
  if (weights_.size() != paths_.size()) throw InvalidInput("path measure needs one weight per path");
  const auto& first = paths_.front();
  for (const auto& p : paths_) {
    if (p.depth() != first.depth() || p.dim() != first.dim())
      throw InvalidInput("all paths of a path measure must share depth and dimension");
    if (p.horizon() != 1.0) throw InvalidInput("path measures live on [0,1]");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInput("path weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("path weights must sum to 1");
}

PathMeasure PathMeasure::uniform(std::vector<DyadicPath> paths) {
  const std::size_t n = paths.size();
  if (n == 0) throw InvalidInput("path measure needs at least one path");
  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  return PathMeasure(std::move(paths), std::move(w));
}

bool PathMeasure::has_uniform_weights() const noexcept {
  const double w0 = weights_.front();
  return std::all_of(weights_.begin(), weights_.end(), [w0](double w) { return w == w0; });
}

void QuantileMeasurePath::validate() const {
  if (depth < 0) throw InvalidInput("measure path depth must be nonnegative");
  if (measures.size() != points_at(depth))
    throw InvalidInput("measure path at depth " + std::to_string(depth) + " needs " +
                       std::to_string(points_at(depth)) + " measures, got " + std::to_string(measures.size()));
  const std::size_t n = measures.front().size();
  for (const auto& m : measures)
    if (m.size() != n) throw InvalidInput("measure path mixes quantile grid sizes");
}

QuantileMeasurePath QuantileMeasurePath::restricted(int level) const {
  validate();
  check_level(level, depth);
  const std::size_t stride = std::size_t{1} << (depth - level);
  QuantileMeasurePath out{level, {}};
  out.measures.reserve(points_at(level));
  for (std::size_t k = 0; k < points_at(level); ++k) out.measures.push_back(measures[k * stride]);
  return out;
}

void EnsemblePath::validate() const {
  if (depth < 0) throw InvalidInput("ensemble path depth must be nonnegative");
  if (ensembles.size() != points_at(depth))
    throw InvalidInput("ensemble path at depth " + std::to_string(depth) + " needs " +
                       std::to_string(points_at(depth)) + " ensembles, got " + std::to_string(ensembles.size()));
  for (const auto& e : ensembles)
    if (!e.shares_labels_with(ensembles.front())) throw InvalidInput("ensemble path mixes label sets");
}

EnsemblePath EnsemblePath::restricted(int level) const {
  validate();
  check_level(level, depth);
  const std::size_t stride = std::size_t{1} << (depth - level);
  EnsemblePath out{level, {}};
  out.ensembles.reserve(points_at(level));
  for (std::size_t k = 0; k < points_at(level); ++k) out.ensembles.push_back(ensembles[k * stride]);
  return out;
}

int depth_of(const MeasurePathSample& mp) {
  return std::visit([](const auto& m) { return m.depth; }, mp);
}

WassersteinCurve::WassersteinCurve(const QuantileMeasurePath& mp, double p) : mp_(&mp), p_(p) { mp.validate(); }

double WassersteinCurve::distance(std::size_t i, std::size_t j) const {
  return wasserstein_p(mp_->measures[i], mp_->measures[j], p_);
}

NuWassersteinCurve::NuWassersteinCurve(const EnsemblePath& mp, double p) : mp_(&mp), p_(p) { mp.validate(); }

double NuWassersteinCurve::distance(std::size_t i, std::size_t j) const {
  return w_p_nu(mp_->ensembles[i], mp_->ensembles[j], p_);
}

PathMeasure build_dyadic_lift(const MeasurePathSample& mp, Coupler coupler, int n) {
  if (depth_of(mp) != n)
    throw InvalidInput("lift at level " + std::to_string(n) + " needs measures at exactly 2^" + std::to_string(n) +
                       " + 1 dyadic times");
  std::vector<DyadicPath> paths;
  if (coupler == Coupler::quantile) {
    const auto* qp = std::get_if<QuantileMeasurePath>(&mp);
    if (!qp) throw InvalidInput("the quantile coupler needs quantile measures");
    qp->validate();
    auto traj = monotone_multicoupling(qp->measures);
    paths.reserve(traj.size());
    for (auto& t : traj) paths.push_back(DyadicPath::scalar(n, std::move(t)));
  } else {
    const auto* ep = std::get_if<EnsemblePath>(&mp);
    if (!ep) throw InvalidInput("the nu-based coupler needs particle ensembles");
    ep->validate();
    const std::size_t count = ep->ensembles.front().size();
    const std::size_t dim = ep->ensembles.front().dim();
    const std::size_t times = ep->ensembles.size();
    paths.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<double> v;
      v.reserve(times * dim);
      for (const auto& e : ep->ensembles) {
        const auto x = e.position(i);
        v.insert(v.end(), x.begin(), x.end());
      }
      paths.emplace_back(n, dim, std::move(v));
    }
  }
  return PathMeasure::uniform(std::move(paths));
}

PathMeasure build_shuffled_lift(const QuantileMeasurePath& mp, std::uint64_t seed) {
  mp.validate();
  const std::size_t n = mp.measures.front().size();
  const std::size_t times = mp.measures.size();
  std::vector<std::vector<double>> values(n, std::vector<double>(times));
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < times; ++k) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    if (k > 0) {
      const CounterRng rng(seed, k);
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i, i)]);
    }
    for (std::size_t j = 0; j < n; ++j) values[j][k] = mp.measures[k][perm[j]];
  }
  std::vector<DyadicPath> paths;
  paths.reserve(n);
  for (auto& v : values) paths.push_back(DyadicPath::scalar(mp.depth, std::move(v)));
  return PathMeasure::uniform(std::move(paths));
}

double lift_energy(const PathMeasure& pi, const NormSpec& spec) {
  spec.validate();
  double total = 0.0;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    const auto& path = pi.paths()[j];
    if (spec.kind == NormKind::besov) {
      total += pi.weights()[j] * besov_energy(path, spec.alpha, spec.p);
    } else {
      const double s = seminorm(path, spec);
      if (s > 0.0) total += pi.weights()[j] * std::pow(s, spec.p);
    }
  }
  return total;
}

std::size_t grid_index(const PathMeasure& pi, double t) {
  const double scaled = t * static_cast<double>(std::size_t{1} << pi.depth());
  const double k = std::round(scaled);
  if (!(t >= 0.0 && t <= 1.0) || std::abs(scaled - k) > 1e-9)
    throw InvalidInput("time " + std::to_string(t) + " is not on the level-" + std::to_string(pi.depth()) +
                       " dyadic grid");
  return static_cast<std::size_t>(k);
}

QuantileMeasure marginal_at(const PathMeasure& pi, std::size_t k) {
  if (pi.dim() != 1) throw InvalidInput("quantile marginals need d = 1; use marginal_cloud");
  if (!pi.has_uniform_weights()) throw InvalidInput("quantile marginals need uniform path weights");
  if (k >= pi.grid_size()) throw InvalidInput("grid index outside the path grid");
  std::vector<double> x(pi.size());
  for (std::size_t j = 0; j < pi.size(); ++j) x[j] = pi.paths()[j][k];
  return QuantileMeasure::from_samples(x);
}

QuantileMeasure marginal(const PathMeasure& pi, double t) { return marginal_at(pi, grid_index(pi, t)); }

WeightedCloud marginal_cloud(const PathMeasure& pi, std::size_t k) {
  if (k >= pi.grid_size()) throw InvalidInput("grid index outside the path grid");
  WeightedCloud c;
  c.dim = pi.dim();
  c.weights = pi.weights();
  c.points.reserve(pi.size() * pi.dim());
  for (const auto& path : pi.paths()) {
    const auto x = path.point(k);
    c.points.insert(c.points.end(), x.begin(), x.end());
  }
  return c;
}

QuantileMeasurePath marginal_path(const PathMeasure& pi) {
  QuantileMeasurePath mp{pi.depth(), {}};
  mp.measures.reserve(pi.grid_size());
  for (std::size_t k = 0; k < pi.grid_size(); ++k) mp.measures.push_back(marginal_at(pi, k));
  return mp;
}

OptimalityGap pairwise_optimality_gap(const PathMeasure& pi, double s, double t, double p) {
  const std::size_t ks = grid_index(pi, s);
  const std::size_t kt = grid_index(pi, t);
  OptimalityGap g;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    const double d = std::abs(pi.paths()[j][kt] - pi.paths()[j][ks]);
    if (d > 0.0) g.coupling_cost += pi.weights()[j] * pow_p(d, p);
  }
  g.wp_cost = wasserstein_pp(marginal_at(pi, ks), marginal_at(pi, kt), p);
  g.gap = g.coupling_cost - g.wp_cost;
  return g;
}

double refinement_bound_factor(double alpha, double p) { return 1.0 / (1.0 - std::exp2(-(p - alpha * p))); }

namespace {

double marginal_curve_energy(const MeasurePathSample& mp, double alpha, double p) {
  if (const auto* qp = std::get_if<QuantileMeasurePath>(&mp)) return besov_energy(WassersteinCurve(*qp, p), alpha, p);
  return besov_energy(NuWassersteinCurve(std::get<EnsemblePath>(mp), p), alpha, p);
}

// L^p distance between the level-n grid values of two lifts whose paths are
// matched by index, compared on the coarser grid.
double marginal_drift(const PathMeasure& coarse, const PathMeasure& fine, Coupler coupler, double p) {
  const std::size_t stride = std::size_t{1} << (fine.depth() - coarse.depth());
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.grid_size(); ++k) {
    double d = 0.0;
    if (coupler == Coupler::quantile) {
      d = wasserstein_p(marginal_at(coarse, k), marginal_at(fine, k * stride), p);
    } else {
      double s = 0.0;
      for (std::size_t j = 0; j < coarse.size(); ++j) {
        const auto a = coarse.paths()[j].point(k);
        const auto b = fine.paths()[j].point(k * stride);
        double d2 = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) d2 += (a[c] - b[c]) * (a[c] - b[c]);
        s += coarse.weights()[j] * pow_half_p(d2, p);
      }
      d = std::pow(s, 1.0 / p);
    }
    worst = std::max(worst, d);
  }
  return worst;
}

}  // namespace

TrackResult refine_and_track(const LevelProvider& provider, Coupler coupler, const NormSpec& spec, int n_max) {
  spec.validate();
  if (spec.kind != NormKind::besov) throw InvalidInput("refine_and_track tracks besov energies");
  if (n_max < 0) throw InvalidInput("n_max must be nonnegative");
  const double alpha = spec.alpha;
  const double p = spec.p;

  TrackResult r;
  r.bound_factor = refinement_bound_factor(alpha, p);
  const MeasurePathSample finest = provider(n_max);
  if (depth_of(finest) != n_max) throw InvalidInput("provider returned the wrong level");
  r.marginal_energy = marginal_curve_energy(finest, alpha, p);
  r.bound = r.bound_factor * r.marginal_energy;
  const double slack = 1e-12 * std::max(1.0, r.bound);

  const PathMeasure top = build_dyadic_lift(finest, coupler, n_max);
  double previous = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const MeasurePathSample mp = n == n_max ? finest : provider(n);
    const PathMeasure pi = n == n_max ? top : build_dyadic_lift(mp, coupler, n);
    TrackRow row;
    row.level = n;
    row.energy = lift_energy(pi, spec);
    for (std::size_t j = 0; j < pi.size(); ++j)
      row.geodesic_energy += pi.weights()[j] * besov_energy_piecewise_linear(pi.paths()[j], alpha, p);
    row.within_bound = row.energy <= r.bound + slack && row.geodesic_energy <= r.bound + slack;
    if (n > 0 && row.energy < previous - slack) r.nondecreasing = false;
    r.all_within_bound = r.all_within_bound && row.within_bound;
    previous = row.energy;
    r.max_marginal_drift = std::max(r.max_marginal_drift, marginal_drift(pi, top, coupler, p));
    r.rows.push_back(row);
  }
  return r;
}

TightnessReport tightness_diagnostic(std::span<const PathMeasure> lifts, double p, double gamma) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidInput("tightness diagnostic needs 1 < p < infinity");
  if (!(gamma > 1.0 / p && gamma <= 1.0)) throw InvalidInput("tightness diagnostic needs 1/p < gamma <= 1");
  TightnessReport r;
  for (const auto& pi : lifts) {
    const int depth = pi.depth();
    if (r.level_sup.size() < static_cast<std::size_t>(depth) + 1) r.level_sup.resize(depth + 1, 0.0);
    double start = 0.0;
    for (std::size_t j = 0; j < pi.size(); ++j) {
      const auto x0 = pi.paths()[j].point(0);
      double n2 = 0.0;
      for (double v : x0) n2 += v * v;
      start += pi.weights()[j] * std::sqrt(n2);
    }
    r.start_moment = std::max(r.start_moment, start);
    for (int m = 0; m <= depth; ++m) {
      const std::size_t stride = std::size_t{1} << (depth - m);
      const std::size_t cells = std::size_t{1} << m;
      const double scale = std::pow(std::exp2(-m), p * gamma);
      for (std::size_t k = 0; k < cells; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < pi.size(); ++j) {
          const double d = pi.paths()[j].distance(k * stride, (k + 1) * stride);
          if (d > 0.0) s += pi.weights()[j] * pow_p(d, p);
        }
        r.level_sup[m] = std::max(r.level_sup[m], s / scale);
      }
    }
  }
  for (double v : r.level_sup) r.sup_ratio = std::max(r.sup_ratio, v);

  // slope of log2(level_sup) against m over the levels with positive mass
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t cnt = 0;
  for (std::size_t m = 0; m < r.level_sup.size(); ++m) {
    if (!(r.level_sup[m] > 0.0)) continue;
    const double x = static_cast<double>(m);
    const double y = std::log2(r.level_sup[m]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++cnt;
  }
  if (cnt >= 2) {
    const double c = static_cast<double>(cnt);
    r.growth_rate = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  }
  r.diverging = r.growth_rate > 0.25;
  return r;
}

}  // namespace pathlift
