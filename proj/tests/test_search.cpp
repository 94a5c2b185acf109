#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace certree;

namespace {
const ExactValue kLambda(1, 100);
}

TEST(Fit, SixSampleExampleCertifiesRoot) {
  const auto r = fit(testkit::six_sample_dataset(), testkit::config_for(kLambda));
  EXPECT_TRUE(r.certified);
  EXPECT_EQ(r.objective, ExactValue(1, 6));
  EXPECT_EQ(r.best_tree.size(), 1U);
  EXPECT_EQ(r.gap, ExactValue(0));
}

TEST(Fit, SeparatingFeatureCertifiesTwoLeaves) {
  for (bool warm : {true, false}) {
    SearchConfig c = testkit::config_for(kLambda);
    c.warm_start = warm;
    const auto r = fit(testkit::separable_dataset(100), c);
    EXPECT_TRUE(r.certified);
    EXPECT_EQ(r.objective, ExactValue(2, 100));
    EXPECT_EQ(r.best_tree.size(), 2U);
  }
}

TEST(Fit, RejectsNonPositiveLambda) {
  EXPECT_THROW(fit(testkit::separable_dataset(10), testkit::config_for(ExactValue(0))), UsageError);
  EXPECT_THROW(fit(testkit::separable_dataset(10), testkit::config_for(ExactValue(-1, 10))), UsageError);
}

TEST(Fit, MatchesOracleWithDebugChecks) {
  std::mt19937_64 rng(101);
  const ExactValue lambdas[] = {ExactValue(1, 100), ExactValue(1, 20), ExactValue(1, 10)};
  for (int trial = 0; trial < 60; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 5 + trial % 36, 1 + trial % 5, 0.25);
    const ExactValue& lambda = lambdas[trial % 3];
    const auto r = fit(ds, testkit::config_for(lambda));
    ASSERT_TRUE(r.certified);
    EXPECT_EQ(r.objective, exhaustive_optimum(ds, lambda).objective);
    EXPECT_EQ(r.objective, objective(r.best_tree, lambda, ds.n_samples()));
    EXPECT_NO_THROW(check_partition(r.best_tree, ds.n_samples()));
  }
}

TEST(Fit, AnySubsetOfTogglesGivesSameOptimum) {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 40; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 10 + trial % 20, 2 + trial % 3, 0.3);
    const ExactValue lambda(1, 20 - 5 * (trial % 3));
    const ExactValue expected = exhaustive_optimum(ds, lambda).objective;
    for (unsigned mask = 0; mask < 128; mask += 1 + trial % 5) {
      SearchConfig c = testkit::config_for(lambda);
      c.toggles.lookahead = mask & 1U;
      c.toggles.node_support = mask & 2U;
      c.toggles.incremental_accuracy = mask & 4U;
      c.toggles.leaf_accuracy = mask & 8U;
      c.toggles.equivalent_points = mask & 16U;
      c.toggles.permutation_cache = mask & 32U;
      c.toggles.similar_support = mask & 64U;
      const auto r = fit(ds, c);
      ASSERT_TRUE(r.certified);
      EXPECT_EQ(r.objective, expected) << "mask " << mask;
    }
  }
}

TEST(Fit, WarmStartChangesWorkNotAnswer) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 30, 5, 0.2);
    SearchConfig c = testkit::config_for(kLambda);
    const auto warm = fit(ds, c);
    c.warm_start = false;
    const auto cold = fit(ds, c);
    EXPECT_EQ(warm.objective, cold.objective);
    EXPECT_LE(warm.objective, greedy_fit(ds, {}, kLambda).objective);
  }
}

TEST(Fit, TraceMonotoneAndGapNonincreasing) {
  std::mt19937_64 rng(104);
  const Dataset ds = testkit::random_dataset(rng, 40, 5, 0.3);
  SearchConfig c = testkit::config_for(kLambda);
  c.trace_interval = 10;
  c.warm_start = false;
  const auto r = fit(ds, c);
  ASSERT_TRUE(r.certified);
  ASSERT_GE(r.trace.size(), 3U);
  std::optional<ExactValue> prev_gap;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& t = r.trace[i];
    if (i > 0) EXPECT_LE(t.best_objective, r.trace[i - 1].best_objective);
    const ExactValue floor = t.min_queue_lower_bound ? min(*t.min_queue_lower_bound, t.best_objective) : t.best_objective;
    const ExactValue gap = t.best_objective - floor;
    if (prev_gap) EXPECT_LE(gap, *prev_gap);
    prev_gap = gap;
  }
  EXPECT_EQ(r.trace.back().best_objective, r.objective);
  EXPECT_GT(r.stats.best_updates, 0U);
  EXPECT_EQ(r.stats.gc_runs, r.stats.best_updates);
}

TEST(Fit, LimitsLeaveSoundGap) {
  std::mt19937_64 rng(105);
  const Dataset ds = testkit::random_dataset(rng, 200, 10, 0.35);
  SearchConfig c;
  c.lambda = ExactValue(1, 200);
  c.max_trees = 500;
  const auto r = fit(ds, c);
  EXPECT_FALSE(r.certified);
  EXPECT_EQ(r.stop_reason, StopReason::MaxTrees);
  EXPECT_GT(r.gap, ExactValue(0));
  EXPECT_LE(r.stats.trees_evaluated, 500U);

  c.max_trees.reset();
  c.max_cache_entries = 300;
  const auto r2 = fit(ds, c);
  EXPECT_FALSE(r2.certified);
  EXPECT_EQ(r2.stop_reason, StopReason::MaxCacheEntries);

  c.max_cache_entries.reset();
  c.time_limit_s = 0.0;
  c.trace_interval = 1;
  const auto r3 = fit(ds, c);
  EXPECT_FALSE(r3.certified);
  EXPECT_EQ(r3.stop_reason, StopReason::TimeLimit);
}

TEST(Fit, GapBracketsTheOptimum) {
  std::mt19937_64 rng(106);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 40, 5, 0.3);
    const ExactValue opt = exhaustive_optimum(ds, kLambda).objective;
    SearchConfig c = testkit::config_for(kLambda);
    c.max_trees = 20 + trial * 5;
    const auto r = fit(ds, c);
    EXPECT_GE(r.gap, ExactValue(0));
    EXPECT_GE(r.objective, opt);
    EXPECT_LE(r.objective - r.gap, opt);
    if (r.certified) {
      EXPECT_EQ(r.gap, ExactValue(0));
      EXPECT_EQ(r.objective, opt);
    }
  }
}

TEST(Expand, TerminalTreeHasNoChildren) {
  const Dataset ds = testkit::separable_dataset(10);
  Searcher s(ds, testkit::config_for(kLambda));
  s.initialize();
  TreeState t = root_tree(ds, kLambda, s.equivalence());
  t.splittable[0] = 0;
  t.K = 1;
  const auto before = s.stats().children_generated;
  EXPECT_TRUE(s.expand(t).empty());
  EXPECT_EQ(s.stats().children_generated, before);
}

TEST(Expand, AllFeaturesDeadLeavesOnlyRetire) {
  // Both features are constant: every split is trivial.
  const Dataset ds = Dataset::from_rows({{1, 0}, {1, 0}, {1, 0}, {1, 0}}, {0, 1, 1, 1});
  Searcher s(ds, testkit::config_for(kLambda));
  s.initialize();
  const TreeState root = root_tree(ds, kLambda, s.equivalence());
  EXPECT_TRUE(s.expand(root).empty());
  EXPECT_EQ(s.stats().children_generated, 1U);
  EXPECT_TRUE(root.leaves[0]->is_dead_feature(0) || s.leaf_cache().size() == 1);
}

TEST(Expand, MustSplitPairForbidsDoubleRetire) {
  // Splitting on feature 0 gains nothing (labels depend on the XOR), so the
  // both-unchanged assignment never appears in the search.
  const Dataset ds = Dataset::from_rows({{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0, 0}, {0, 1}, {1, 0}, {1, 1}},
                                        {0, 1, 1, 0, 0, 1, 1, 0});
  SearchConfig c = testkit::config_for(kLambda);
  c.warm_start = false;
  bool saw_terminal_two_leaf = false;
  SearchHooks hooks;
  hooks.on_evaluate = [&](const TreeState& t) {
    if (t.size() == 2 && t.K == 2) saw_terminal_two_leaf = true;
  };
  const auto r = fit(ds, c, hooks);
  EXPECT_TRUE(r.certified);
  EXPECT_FALSE(saw_terminal_two_leaf);
}

TEST(Fit, DebugDuplicateDetectorStaysQuiet) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 20; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 30, 5, 0.3);
    SearchConfig c = testkit::config_for(ExactValue(1, 100));
    EXPECT_NO_THROW(fit(ds, c));
  }
}

TEST(Fit, RemainingBoundCoversLaterEvaluations) {
  std::mt19937_64 rng(108);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset ds = testkit::random_dataset(rng, 30, 3, 0.3);
    SearchConfig c = testkit::config_for(ExactValue(1, 50));
    c.trace_interval = 3;
    c.trace_remaining_exact = true;
    const auto r = fit(ds, c);
    ASSERT_TRUE(r.certified);
    for (const auto& t : r.trace) {
      const std::uint64_t later = r.stats.trees_evaluated - t.trees_evaluated;
      ASSERT_TRUE(t.remaining_exact.has_value());
      EXPECT_LE(BigInt(later), *t.remaining_exact);
      EXPECT_EQ(t.log10_remaining.has_value(), *t.remaining_exact > 0);
    }
  }
}
