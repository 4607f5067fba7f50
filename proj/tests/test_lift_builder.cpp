#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "oracles.hpp"
#include "pathlift/error.hpp"
#include "pathlift/lift_builder.hpp"
#include "pathlift/processes.hpp"

using namespace pathlift;

namespace {

QuantileMeasurePath linear_family(int depth, const QuantileMeasure& a, const QuantileMeasure& b) {
  QuantileMeasurePath mp{depth, {}};
  const std::size_t n = std::size_t{1} << depth;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n);
    std::vector<double> q(a.size());
    for (std::size_t j = 0; j < q.size(); ++j) q[j] = (1.0 - t) * a[j] + t * b[j];
    mp.measures.emplace_back(std::move(q));
  }
  return mp;
}

NormSpec besov(double alpha, double p) { return NormSpec{NormKind::besov, alpha, p, 0.5}; }

}  // namespace

TEST(PathMeasure, Validation) {
  const auto a = DyadicPath::scalar(1, {0, 1, 2});
  EXPECT_THROW(PathMeasure({}, {}), InvalidInput);
  EXPECT_THROW(PathMeasure({a, a}, {0.5, 0.6}), InvalidInput);
  EXPECT_THROW(PathMeasure({a, a}, {1.5, -0.5}), InvalidInput);
  EXPECT_THROW(PathMeasure({a, DyadicPath::scalar(0, {0, 1})}, {0.5, 0.5}), InvalidInput);
  EXPECT_THROW(PathMeasure::uniform({DyadicPath::scalar(1, {0, 1, 2}, 2.0)}), InvalidInput);
  EXPECT_TRUE(PathMeasure::uniform({a, a}).has_uniform_weights());
}

TEST(DyadicLift, LevelZeroBetweenDiracsIsLinear) {
  const QuantileMeasurePath mp{0, {QuantileMeasure::dirac(0.0), QuantileMeasure::dirac(1.0)}};
  const auto pi = build_dyadic_lift(mp, Coupler::quantile, 0);
  ASSERT_EQ(pi.size(), 1u);
  EXPECT_EQ(pi.paths()[0], DyadicPath::scalar(0, {0.0, 1.0}));
}

TEST(DyadicLift, HeatFlowTwoAtoms) {
  const auto mp = heat_flow_path(2, 2);
  const auto pi = build_dyadic_lift(mp, Coupler::quantile, 2);
  ASSERT_EQ(pi.size(), 2u);
  const double z = oracle::normal_quantile(0.75);
  for (std::size_t k = 0; k <= 4; ++k) {
    EXPECT_NEAR(pi.paths()[1][k], z * std::sqrt(k / 4.0), 1e-12);
    EXPECT_NEAR(pi.paths()[0][k], -z * std::sqrt(k / 4.0), 1e-12);
  }
}

TEST(DyadicLift, PreservesMarginalsAtLevelTimes) {
  const auto sc = stochastic_heat_scenario(21, 5, 64);
  for (int n : {0, 2, 5}) {
    const auto pi = build_dyadic_lift(sc.measures.restricted(n), Coupler::quantile, n);
    const std::size_t stride = std::size_t{1} << (5 - n);
    for (std::size_t k = 0; k <= (std::size_t{1} << n); ++k)
      EXPECT_LE(wasserstein_p(marginal_at(pi, k), sc.measures.measures[k * stride], 2.0), 1e-12);
  }
  const auto pi = build_dyadic_lift(sc.measures.restricted(2), Coupler::quantile, 2);
  EXPECT_EQ(marginal(pi, 0.75), sc.measures.measures[24]);
  EXPECT_THROW(marginal(pi, 0.3), InvalidInput);
  EXPECT_THROW(build_dyadic_lift(sc.measures, Coupler::quantile, 2), InvalidInput);
  EXPECT_THROW(build_dyadic_lift(sc.measures, Coupler::nu_based, 5), InvalidInput);
}

TEST(DyadicLift, CouplingsAreOptimalAndShufflesAreNot) {
  const auto mp = heat_flow_path(3, 32);
  const auto pi = build_dyadic_lift(mp, Coupler::quantile, 3);
  for (double s : {0.0, 0.25, 0.5})
    for (double t : {0.625, 1.0}) EXPECT_LE(pairwise_optimality_gap(pi, s, t, 2.0).gap, 1e-12);
  const auto shuffled = build_shuffled_lift(mp, 4);
  for (std::size_t k = 0; k <= 8; ++k) EXPECT_EQ(marginal_at(shuffled, k), mp.measures[k]);
  EXPECT_GT(pairwise_optimality_gap(shuffled, 0.5, 1.0, 2.0).gap, 1e-3);
}

TEST(DyadicLift, NuCouplerFollowsLabels) {
  auto labels = std::make_shared<const LabelSet>(1, std::vector<double>{0.0, 1.0, 2.0});
  EnsemblePath ep{1, {}};
  ep.ensembles.emplace_back(labels, std::vector<double>{0.0, 0.0, 0.0});
  ep.ensembles.emplace_back(labels, std::vector<double>{3.0, 1.0, 2.0});
  ep.ensembles.emplace_back(labels, std::vector<double>{2.0, 2.0, 4.0});
  const auto pi = build_dyadic_lift(ep, Coupler::nu_based, 1);
  EXPECT_EQ(pi.paths()[0], DyadicPath::scalar(1, {0.0, 3.0, 2.0}));
  const auto coarse = build_dyadic_lift(ep.restricted(0), Coupler::nu_based, 0);
  EXPECT_EQ(coarse.paths()[2], DyadicPath::scalar(0, {0.0, 4.0}));
  auto other = std::make_shared<const LabelSet>(1, std::vector<double>{5.0, 1.0, 2.0});
  ep.ensembles[1] = ParticleEnsemble(other, {3.0, 1.0, 2.0});
  EXPECT_THROW(build_dyadic_lift(ep, Coupler::nu_based, 1), InvalidInput);
}

TEST(LiftEnergy, MatchesMarginalEnergyForOptimalLift) {
  const auto mp = heat_flow_path(6, 64);
  const auto pi = build_dyadic_lift(mp, Coupler::quantile, 6);
  const double marginal = besov_energy(WassersteinCurve(mp, 2.0), 0.6, 2.0);
  EXPECT_NEAR(lift_energy(pi, besov(0.6, 2.0)), marginal, 1e-10 * marginal);
  EXPECT_GT(lift_energy(build_shuffled_lift(mp, 9), besov(0.6, 2.0)), marginal);
}

TEST(LiftEnergy, LiftDominatesMarginalForEveryNorm) {
  const auto sc = stochastic_heat_scenario(31, 4, 16);
  const auto pi = build_shuffled_lift(sc.measures, 2);
  const WassersteinCurve curve(sc.measures, 2.0);
  const double h = std::pow(lift_energy(pi, NormSpec{NormKind::holder, 0.5, 2.0, 0.4}), 0.5);
  EXPECT_GE(h + 1e-12, holder_seminorm(curve, 0.4));
  const double v = std::pow(lift_energy(pi, NormSpec{NormKind::pvar, 0.5, 2.0, 0.5}), 0.5);
  EXPECT_GE(v + 1e-12, p_variation(curve, 2.0));
  EXPECT_GE(lift_energy(pi, besov(0.6, 2.0)) + 1e-12, besov_energy(curve, 0.6, 2.0));
}

TEST(RefineAndTrack, BoundFactor) {
  EXPECT_NEAR(refinement_bound_factor(0.6, 2.0), 2.3494, 1e-4);
  EXPECT_DOUBLE_EQ(refinement_bound_factor(0.5, 2.0), 2.0);
}

TEST(RefineAndTrack, ConstantFamilyHasZeroEnergy) {
  const QuantileMeasurePath mp{3, std::vector<QuantileMeasure>(9, QuantileMeasure({-1.0, 2.0}))};
  const auto r = refine_and_track([&](int n) { return MeasurePathSample{mp.restricted(n)}; }, Coupler::quantile, besov(0.6, 2.0), 3);
  for (const auto& row : r.rows) EXPECT_EQ(row.energy, 0.0);
  EXPECT_EQ(r.max_marginal_drift, 0.0);
  EXPECT_TRUE(r.all_within_bound);
}

TEST(RefineAndTrack, HeatFlowMonotoneAndBounded) {
  const auto mp = heat_flow_path(6, 128);
  const auto r =
      refine_and_track([&](int n) { return MeasurePathSample{mp.restricted(n)}; }, Coupler::quantile, besov(0.6, 2.0), 6);
  ASSERT_EQ(r.rows.size(), 7u);
  EXPECT_TRUE(r.nondecreasing);
  EXPECT_TRUE(r.all_within_bound);
  EXPECT_LE(r.max_marginal_drift, 1e-12);
  EXPECT_NEAR(r.rows.back().energy, r.marginal_energy, 1e-10 * r.marginal_energy);
  for (const auto& row : r.rows) EXPECT_LE(row.geodesic_energy, r.bound * (1 + 1e-12));
}

TEST(Tightness, ConstantHeatAndBrownian) {
  const std::vector<PathMeasure> constant{PathMeasure::uniform({DyadicPath::scalar(2, {1, 1, 1, 1, 1})})};
  auto rep = tightness_diagnostic(constant, 2.0, 0.75);
  EXPECT_EQ(rep.sup_ratio, 0.0);
  EXPECT_EQ(rep.start_moment, 1.0);

  std::vector<PathMeasure> heat;
  for (int n = 2; n <= 8; n += 2) heat.push_back(build_dyadic_lift(heat_flow_path(n, 64), Coupler::quantile, n));
  rep = tightness_diagnostic(heat, 4.0, 0.3);
  EXPECT_FALSE(rep.diverging);
  EXPECT_LT(rep.sup_ratio, 10.0);

  std::vector<DyadicPath> bm;
  for (std::uint64_t s = 0; s < 64; ++s) bm.push_back(BrownianPath(s, 0, 10).path());
  const std::vector<PathMeasure> brown{PathMeasure::uniform(bm)};
  rep = tightness_diagnostic(brown, 2.0, 0.9);
  EXPECT_TRUE(rep.diverging);
  EXPECT_GT(rep.growth_rate, 0.25);
  EXPECT_THROW(tightness_diagnostic(brown, 2.0, 0.4), InvalidInput);
}
