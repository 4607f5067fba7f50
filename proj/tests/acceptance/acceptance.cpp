// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "../oracles.hpp"
#include "pathlift/lift_builder.hpp"
#include "pathlift/mc_estimator.hpp"
#include "pathlift/path_norms.hpp"
#include "pathlift/processes.hpp"
#include "pathlift/quantile_transport.hpp"
#include "pathlift/rng.hpp"

using namespace pathlift;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Tolerances and sizes.
constexpr double kOtTol = 1e-12;
constexpr double kIdentityTol = 1e-9;
constexpr double kInequalityTol = 1e-10;
constexpr double kSigmas = 3.0;
constexpr std::size_t kMc = 10000;
constexpr std::size_t kSheGrid = 1024;
constexpr std::size_t kIndependentParticles = 64;

QuantileMeasure random_measure(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0, 3.0);
  std::vector<double> x(n);
  for (double& v : x) v = z(rng);
  return QuantileMeasure::from_samples(x);
}

Outcome c1_ot_oracle() {
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> pdist(1.0, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = 1 + static_cast<std::size_t>(i % 6);
    const auto a = random_measure(rng, n), b = random_measure(rng, n);
    const double p = pdist(rng);
    const std::vector<double> x(a.quantiles().begin(), a.quantiles().end());
    const std::vector<double> y(b.quantiles().begin(), b.quantiles().end());
    worst = std::max(worst, std::abs(wasserstein_pp(a, b, p) - oracle::brute_force_wpp(x, y, p)));
  }
  return {worst <= kOtTol, fmt("200 instances, max |W_p^p - brute force| = %.3g (tol %.0e)", worst, kOtTol)};
}

Outcome c2_heat_identity() {
  const auto mp = heat_flow_path(8, 256);
  const double marginal = besov_energy(WassersteinCurve(mp, 2.0), 0.6, 2.0);
  const NormSpec spec{NormKind::besov, 0.6, 2.0, 0.5};
  const double lift = lift_energy(build_dyadic_lift(mp, Coupler::quantile, 8), spec);
  const double shuffled = lift_energy(build_shuffled_lift(mp, 7), spec);
  const double diff = std::abs(lift - marginal);
  return {diff <= kIdentityTol && shuffled - marginal > 0.0,
          fmt("marginal %.10g, quantile lift %.10g (|diff| %.2g, tol %.0e), shuffled gap %.6g", marginal, lift, diff,
              kIdentityTol, shuffled - marginal)};
}

McConfig she_config() {
  McConfig c;
  c.n_mc = kMc;
  c.base_seed = 2024;
  c.depth = 8;
  c.grid_n = kSheGrid;
  return c;
}

const NormSpec kSheSpec{NormKind::besov, 0.3, 4.0, 0.5};

PathMeasure she_quantile_lift(std::uint64_t seed) {
  return build_dyadic_lift(stochastic_heat_scenario(seed, 8, kSheGrid).measures, Coupler::quantile, 8);
}

PathMeasure she_independent_lift(std::uint64_t seed) {
  return independent_particle_paths(stochastic_heat_scenario(seed, 8, 1), derive_seed(seed, 1),
                                    kIndependentParticles);
}

QuantileMeasurePath she_marginals(std::uint64_t seed) { return stochastic_heat_scenario(seed, 8, kSheGrid).measures; }


Outcome c3_she_identity() {
  const McConfig cfg = she_config();
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto sc = stochastic_heat_scenario(cfg.scenario_seed(i), 8, kSheGrid);
    const double marginal = besov_energy(WassersteinCurve(sc.measures, 4.0), 0.3, 4.0);
    const double lift = lift_energy(build_dyadic_lift(sc.measures, Coupler::quantile, 8), kSheSpec);
    worst = std::max(worst, std::abs(lift - marginal));
  }
  const auto e = process_besov_energy(she_marginals, 0.3, 4.0, cfg);
  const double closed = oracle::she_marginal_energy_p4(0.3, 8);
  const double z = std::abs(e.mean - closed) / e.std_error;
  return {worst <= kIdentityTol && z <= kSigmas,
          fmt("per-seed max |diff| %.2g over 100 seeds (tol %.0e); MC mean %.5g +- %.3g vs closed form %.5g "
              "(%.2f se, n=%zu)",
              worst, kIdentityTol, e.mean, e.std_error, closed, z, e.n)};
}

Outcome c4_minimizer() {
  const auto r = compare_lifts({"quantile", she_quantile_lift, true}, {"independent", she_independent_lift, false},
                               she_marginals, kSheSpec, she_config());
  const double closed = oracle::she_independent_energy_p4(0.3, 8);
  const double z = std::abs(r.energy_b.mean - closed) / r.energy_b.std_error;
  const bool exceeds = r.smaller == 'a' && r.energy_b.mean > r.energy_a.mean;
  return {z <= kSigmas && exceeds && r.smaller_attains && r.both_above_marginal,
          fmt("independent %.5g +- %.3g vs closed form %.5g (%.2f se); quantile %.5g attains marginal %.5g: %s",
              r.energy_b.mean, r.energy_b.std_error, closed, z, r.energy_a.mean, r.marginal_energy.mean,
              r.smaller_attains ? "yes" : "no")};
}

Outcome c5_holder_exponent() {
  McConfig cfg;
  cfg.n_mc = kMc;
  cfg.base_seed = 99;
  std::vector<double> lh, lw;
  for (int k = 2; k <= 8; ++k) {
    const std::size_t i0 = std::size_t{1} << (8 - 2);
    const std::size_t i1 = i0 + (std::size_t{1} << (8 - k));
    const PairSampler pair = [i0, i1](std::uint64_t seed) {
      auto sc = stochastic_heat_scenario(seed, 8, 64);
      return std::pair{std::move(sc.measures.measures[i0]), std::move(sc.measures.measures[i1])};
    };
    const auto e = expected_wp(pair, 4.0, cfg);
    lh.push_back(std::log(std::exp2(-k)));
    lw.push_back(std::log(e.value));
  }
  const double slope = oracle::slope(lh, lw);
  const PairSampler ends = [](std::uint64_t seed) {
    auto sc = stochastic_heat_scenario(seed, 0, 4096);
    return std::pair{std::move(sc.measures.measures[0]), std::move(sc.measures.measures[1])};
  };
  const auto w2 = expected_wp(ends, 2.0, cfg);
  const double z = std::abs(w2.value - std::sqrt(2.0)) / w2.std_error;
  return {slope >= 0.45 && slope <= 0.55 && z <= kSigmas,
          fmt("log-log slope %.4f (window [0.45, 0.55]); W_2(mu_0, mu_1) = %.5f +- %.4f vs sqrt 2 (%.2f se)", slope,
              w2.value, w2.std_error, z)};
}

PathMeasure random_path_measure(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth_d(1, 5);
  std::uniform_int_distribution<std::size_t> count_d(1, 12);
  std::uniform_real_distribution<double> scale_d(0.05, 3.0);
  std::normal_distribution<double> z;
  const int depth = depth_d(rng);
  const std::size_t count = count_d(rng);
  const std::size_t k = (std::size_t{1} << depth) + 1;
  std::vector<DyadicPath> paths;
  for (std::size_t j = 0; j < count; ++j) {
    const double scale = scale_d(rng);
    std::vector<double> v(k);
    v[0] = z(rng);
    for (std::size_t i = 1; i < k; ++i) v[i] = v[i - 1] + scale * z(rng);
    paths.push_back(DyadicPath::scalar(depth, std::move(v)));
  }
  return PathMeasure::uniform(std::move(paths));
}

Outcome c6_lift_inequalities() {
  std::mt19937_64 rng(6006);
  std::uniform_real_distribution<double> p_d(1.5, 4.0);
  int violations = 0;
  double worst = -1e300;
  for (int i = 0; i < 500; ++i) {
    const PathMeasure pi = random_path_measure(rng);
    const double p = p_d(rng);
    const double alpha = std::min(0.95, 1.0 / p + 0.3);
    const double gamma = 0.4;
    const QuantileMeasurePath mp = marginal_path(pi);
    const WassersteinCurve curve(mp, p);
    const double pairs[3][2] = {
        {std::pow(holder_seminorm(curve, gamma), p), lift_energy(pi, NormSpec{NormKind::holder, alpha, p, gamma})},
        {std::pow(p_variation(curve, p), p), lift_energy(pi, NormSpec{NormKind::pvar, alpha, p, gamma})},
        {besov_energy(curve, alpha, p), lift_energy(pi, NormSpec{NormKind::besov, alpha, p, gamma})}};
    for (const auto& pr : pairs) {
      const double excess = pr[0] - pr[1];
      worst = std::max(worst, excess / std::max(1.0, pr[1]));
      if (excess > kInequalityTol * std::max(1.0, pr[1])) ++violations;
    }
  }
  return {violations == 0, fmt("500 path measures x 3 norms, %d violations, max relative excess %.3g (tol %.0e)",
                               violations, worst, kInequalityTol)};
}

Outcome c7_embeddings() {
  int grr = 0, hol = 0, pvar = 0;
  const double cases[2][2] = {{0.3, 4.0}, {0.6, 2.0}};
  for (const auto& c : cases) {
    const double alpha = c[0], p = c[1];
    const double gamma = 0.5 * (1.0 + alpha);
    for (std::uint64_t s = 0; s < 1024; ++s) {
      const auto r = embedding_report(BrownianPath(s, 0, 10).path(), alpha, p, gamma);
      grr += r.holder_violated;
      hol += r.holder_to_ws_violated;
      pvar += r.pvar_violated;
    }
  }
  return {grr == 0 && hol == 0,
          fmt("2 x 1024 paths at depth 10: %d GRR Holder violations, %d Holder-to-Sobolev violations "
              "(p-variation bound: %d)",
              grr, hol, pvar)};
}

Outcome c8_refinement_bound() {
  const NormSpec spec{NormKind::besov, 0.3, 4.0, 0.5};
  const auto heat = heat_flow_path(6, 256);
  const auto she = stochastic_heat_scenario(12345, 6, 256).measures;
  bool ok = true;
  std::string detail;
  for (const auto* mp : {&heat, &she}) {
    const auto r = refine_and_track([mp](int n) { return MeasurePathSample{mp->restricted(n)}; }, Coupler::quantile,
                                    spec, 6);
    ok = ok && r.nondecreasing && r.all_within_bound;
    detail += fmt("%s: E_6 %.5g <= %.5g x %.5g, nondecreasing %s; ", mp == &heat ? "heat" : "S-HE",
                  r.rows.back().energy, r.bound_factor, r.marginal_energy, r.nondecreasing ? "yes" : "no");
  }
  const NormSpec spec2{NormKind::besov, 0.6, 2.0, 0.5};
  const auto r2 = refine_and_track([&](int n) { return MeasurePathSample{heat.restricted(n)}; }, Coupler::quantile,
                                   spec2, 6);
  ok = ok && r2.nondecreasing && r2.all_within_bound;
  detail += fmt("heat p=2: factor %.4f", r2.bound_factor);
  return {ok, detail};
}

double form2_max_deviation(std::uint64_t seed, std::size_t substeps) {
  const auto coeffs = sde_preset("she-form2");
  const BrownianPath w(seed, 0, 8);
  const double t0 = std::exp2(-10);
  const BrownianPath fine = w.refined(static_cast<int>(std::log2(static_cast<double>(substeps))));
  const double w0 = fine.path()[static_cast<std::size_t>(t0 * static_cast<double>(substeps))];
  double worst = 0.0;
  for (double q : {0.1, 0.5, 0.9}) {
    const double c = oracle::normal_quantile(q);
    Eigen::VectorXd x0(1);
    x0[0] = c * std::sqrt(t0) + w0;
    const auto tr = euler_maruyama(coeffs, w, derive_seed(seed, 1), x0, {substeps, t0, true});
    for (std::size_t k = 0; k < tr.path.size(); ++k) {
      const double t = tr.path.time(k);
      if (t < t0) continue;
      worst = std::max(worst, std::abs(tr.path[k] - (c * std::sqrt(t) + w.path()[k])));
    }
  }
  return worst;
}

Outcome c9_sde_oracle() {
  double worst = 0.0, ratio_lo = 1e300, ratio_hi = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double d12 = form2_max_deviation(s, std::size_t{1} << 12);
    const double d13 = form2_max_deviation(s, std::size_t{1} << 13);
    worst = std::max(worst, d12);
    ratio_lo = std::min(ratio_lo, d13 / d12);
    ratio_hi = std::max(ratio_hi, d13 / d12);
  }
  return {worst < 5e-2 && ratio_lo >= 0.375 && ratio_hi <= 0.625,
          fmt("20 seeds: max deviation %.4g at 2^12 substeps (< 0.05); doubling ratio in [%.4f, %.4f] "
              "(window [0.375, 0.625])",
              worst, ratio_lo, ratio_hi)};
}

Outcome c10_pvar_exhaustive() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> p_d(1.0, 4.0);
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    const int depth = i % 5;
    std::vector<double> v((std::size_t{1} << depth) + 1);
    for (double& x : v) x = z(rng);
    const double p = i % 4 == 0 ? 2.0 : p_d(rng);
    const double dp = p_variation(DyadicPath::scalar(depth, v), p);
    const double brute = std::pow(oracle::brute_force_pvar_pp(v, p), 1.0 / p);
    if (dp != brute) ++mismatches;
  }
  return {mismatches == 0, fmt("100 paths of depth <= 4: %d mismatches (exact equality)", mismatches)};
}

}  // namespace

int main() {
#ifdef __GLIBC__
  // Scenario loops free and reallocate megabytes per seed; keep it mapped.
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 64 << 20);
#endif
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double budget_s;
  };
  const Criterion criteria[] = {
      {"1D OT oracle", c1_ot_oracle, 1.0},
      {"energy identity, heat flow", c2_heat_identity, 5.0},
      {"energy identity, stochastic heat", c3_she_identity, 120.0},
      {"minimizer comparison", c4_minimizer, 300.0},
      {"Holder exponent one half", c5_holder_exponent, 120.0},
      {"lift-to-marginal inequalities", c6_lift_inequalities, 60.0},
      {"embeddings", c7_embeddings, 30.0},
      {"refinement energy bound", c8_refinement_bound, 60.0},
      {"SDE oracle", c9_sde_oracle, 60.0},
      {"p-variation exhaustive", c10_pvar_exhaustive, 10.0},
  };
  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s [%d] %s: %s (%.2f s, budget %.0f s%s)\n", pass ? "PASS" : "FAIL", index, c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", over budget");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
