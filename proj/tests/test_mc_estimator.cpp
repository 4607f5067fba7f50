#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "pathlift/error.hpp"
#include "pathlift/mc_estimator.hpp"
#include "pathlift/processes.hpp"
#include "pathlift/rng.hpp"

using namespace pathlift;

namespace {

McConfig config(std::size_t n_mc, std::size_t threads) {
  McConfig c;
  c.n_mc = n_mc;
  c.base_seed = 77;
  c.depth = 4;
  c.grid_n = 32;
  c.threads = threads;
  return c;
}

const NormSpec kBesov{NormKind::besov, 0.3, 4.0, 0.5};

}  // namespace

TEST(PairwiseSum, ExactOnIntegersAndStableOnSmallTerms) {
  std::vector<double> v(1000);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  std::vector<double> w(1 << 20, 0.1);
  EXPECT_NEAR(pairwise_sum(w), 0.1 * (1 << 20), 1e-8);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
  const auto [m, se] = mean_and_std_error(std::vector<double>{1.0, 3.0});
  EXPECT_EQ(m, 2.0);
  EXPECT_NEAR(se, 1.0, 1e-15);
}

TEST(McConfig, ValidationAndSeeds) {
  auto c = config(0, 1);
  EXPECT_THROW(c.validate(), InvalidInput);
  c = config(4, 1);
  EXPECT_NE(c.scenario_seed(0), c.scenario_seed(1));
  EXPECT_EQ(c.scenario_seed(3), derive_seed(77, 3));
  EXPECT_FALSE(c.seed_derivation().empty());
}

TEST(RunScenarios, IndependentOfThreadCount) {
  const auto f = [](std::uint64_t s) { return BrownianPath(s, 0, 6).path()[64]; };
  const auto one = run_scenarios(config(100, 1), f);
  const auto four = run_scenarios(config(100, 4), f);
  EXPECT_EQ(one, four);
}

TEST(RunScenarios, RethrowsFirstFailure) {
  const auto f = [](std::uint64_t s) -> double {
    if (s % 3 == 0) throw PreconditionFailure("bad scenario");
    return 1.0;
  };
  EXPECT_THROW(run_scenarios(config(64, 3), f), PreconditionFailure);
}

TEST(ExpectedWp, DeterministicPairsAndDiagonal) {
  const PairSampler same = [](std::uint64_t) {
    return std::pair{heat_flow_marginal(0.5, 16), heat_flow_marginal(0.5, 16)};
  };
  auto e = expected_wp(same, 2.0, config(10, 2));
  EXPECT_EQ(e.value, 0.0);
  const PairSampler shift = [](std::uint64_t) {
    return std::pair{QuantileMeasure({0.0, 1.0}), QuantileMeasure({2.0, 3.0})};
  };
  e = expected_wp(shift, 3.0, config(10, 2));
  EXPECT_NEAR(e.value, 2.0, 1e-14);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n, 10u);
}

TEST(ExpectedWp, StochasticHeatIncrementScale) {
  // W_2^2(N(W_s, s), N(W_t, t)) = (W_t - W_s)^2 + (sqrt t - sqrt s)^2.
  const PairSampler f = [](std::uint64_t seed) {
    const auto sc = stochastic_heat_scenario(seed, 2, 256);
    return std::pair{sc.measures.measures[1], sc.measures.measures[4]};
  };
  const auto e = expected_wp(f, 2.0, config(4000, 0));
  EXPECT_NEAR(e.mean_pp, 0.75 + 0.25 * 0.99873, 4.0 * e.std_error_pp);
}

TEST(CompareLifts, IdenticalCandidatesTie) {
  const MeasurePathSampler marg = [](std::uint64_t s) { return stochastic_heat_scenario(s, 4, 32).measures; };
  const LiftSampler q = [](std::uint64_t s) {
    return build_dyadic_lift(stochastic_heat_scenario(s, 4, 32).measures, Coupler::quantile, 4);
  };
  const auto r = compare_lifts({"a", q, true}, {"b", q, true}, marg, kBesov, config(20, 2));
  EXPECT_EQ(r.smaller, '=');
  EXPECT_TRUE(r.both_above_marginal);
  EXPECT_TRUE(r.smaller_attains);
  EXPECT_EQ(r.energy_a.mean, r.energy_b.mean);
  EXPECT_LE(r.marginal_mismatch_a, 1e-12);
}

TEST(CompareLifts, QuantileBeatsShuffled) {
  const MeasurePathSampler marg = [](std::uint64_t s) { return stochastic_heat_scenario(s, 4, 32).measures; };
  const LiftSampler q = [](std::uint64_t s) {
    return build_dyadic_lift(stochastic_heat_scenario(s, 4, 32).measures, Coupler::quantile, 4);
  };
  const LiftSampler sh = [](std::uint64_t s) {
    return build_shuffled_lift(stochastic_heat_scenario(s, 4, 32).measures, s + 1);
  };
  const auto r = compare_lifts({"quantile", q, true}, {"shuffled", sh, true}, marg, kBesov, config(40, 2));
  EXPECT_EQ(r.smaller, 'a');
  EXPECT_TRUE(r.smaller_attains);
  EXPECT_TRUE(r.both_above_marginal);
}

TEST(CompareLifts, WrongMarginalsAreRejected) {
  const MeasurePathSampler marg = [](std::uint64_t s) { return stochastic_heat_scenario(s, 3, 8).measures; };
  const LiftSampler heat = [](std::uint64_t) { return build_dyadic_lift(heat_flow_path(3, 8), Coupler::quantile, 3); };
  EXPECT_THROW(compare_lifts({"a", heat, true}, {"b", heat, true}, marg, kBesov, config(4, 1)), PreconditionFailure);
  EXPECT_NO_THROW(compare_lifts({"a", heat, false}, {"b", heat, false}, marg, kBesov, config(4, 1)));
}

TEST(AverageLift, PoolsWeightsAndChecksMarginals) {
  const LiftSampler q = [](std::uint64_t s) {
    return build_dyadic_lift(stochastic_heat_scenario(s, 3, 8).measures, Coupler::quantile, 3);
  };
  const auto avg = average_lift(q, config(5, 2));
  EXPECT_EQ(avg.pooled.size(), 40u);
  EXPECT_NEAR(std::accumulate(avg.pooled.weights().begin(), avg.pooled.weights().end(), 0.0), 1.0, 1e-12);
  EXPECT_TRUE(avg.marginals_consistent);
  EXPECT_TRUE(avg.coupling_bound_holds);
  EXPECT_GE(avg.worst_slack, -1e-12);
}

TEST(AverageLift, RejectsMixedShapes) {
  const LiftSampler bad = [](std::uint64_t s) {
    const int depth = s % 2 == 0 ? 2 : 3;
    return build_dyadic_lift(heat_flow_path(depth, 4), Coupler::quantile, depth);
  };
  EXPECT_THROW(average_lift(bad, config(4, 1)), InvalidInput);
}
