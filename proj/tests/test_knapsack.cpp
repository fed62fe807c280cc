#include <gtest/gtest.h>

#include <random>

#include "kcef/knapsack.hpp"
#include "oracles.hpp"

using namespace kcef;
using oracle::frac;

namespace {

KnapsackInstance trio() { return KnapsackInstance({2, 3, 4}, 5); }
KnapsackInstance case_b() { return KnapsackInstance({3, 1, 1, 1, 1}, 4); }

ItemSet set(std::initializer_list<int> one_based) {
  ItemSet s;
  for (int i : one_based) s = s.with(i - 1);
  return s;
}

}  // namespace

TEST(Knapsack, RejectsBadInstances) {
  EXPECT_THROW(KnapsackInstance({}, 1), InputError);
  EXPECT_THROW(KnapsackInstance({0, 2}, 2), InputError);
  EXPECT_THROW(KnapsackInstance({3, 1}, 2), InputError);  // max s_i > D
  EXPECT_THROW(KnapsackInstance({1, 1}, 3), InputError);  // D > sum
}

TEST(Knapsack, Feasibility) {
  EXPECT_TRUE(trio().is_feasible(std::vector<int>{1, 1, 0}));
  EXPECT_FALSE(trio().is_feasible(std::vector<int>{0, 0, 1}));
  EXPECT_TRUE(KnapsackInstance({5}, 5).is_feasible(std::vector<int>{1}));
  EXPECT_THROW(trio().is_feasible(std::vector<int>{1, 1}), InputError);
}

TEST(Knapsack, ResidualAndClipped) {
  auto r = residual_and_clipped(trio(), set({3}));
  EXPECT_EQ(r.residual, 1);
  EXPECT_EQ(r.clipped, (std::vector<std::int64_t>{1, 1, 1}));
  r = residual_and_clipped(trio(), ItemSet{});
  EXPECT_EQ(r.residual, 5);
  EXPECT_EQ(r.clipped, (std::vector<std::int64_t>{2, 3, 4}));
  r = residual_and_clipped(case_b(), set({2, 3}));
  EXPECT_EQ(r.residual, 2);
  EXPECT_EQ(r.clipped, (std::vector<std::int64_t>{2, 1, 1, 1, 1}));
  EXPECT_THROW(residual_and_clipped(trio(), set({1, 2})), DomainError);
}

TEST(Knapsack, WeakenedSlackExamples) {
  EXPECT_EQ(weakened_kc_slack(KnapsackInstance({5}, 5), ItemSet{}, set({1}), 1), frac(5, 3));
  EXPECT_EQ(weakened_kc_slack(trio(), set({3}), set({1, 2}), 1), frac(4, 3));
  EXPECT_EQ(weakened_kc_slack(trio(), ItemSet{}, set({1, 2}), 1), frac(5, 3));
  EXPECT_THROW(weakened_kc_slack(trio(), set({1, 2}), set({1, 2}), 1), DomainError);
  EXPECT_THROW(weakened_kc_slack(trio(), ItemSet{}, set({3}), 1), DomainError);
  EXPECT_THROW(weakened_kc_slack(trio(), ItemSet{}, set({1, 2}), 0), DomainError);
}

TEST(Knapsack, SlackMatchesOracleOnRandomInstances) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    auto o = oracle::random_instance(rng, 1, 6, 9);
    KnapsackInstance inst(o.sizes, o.demand);
    for (const Rational eps : {Rational(1), frac(1, 4)}) {
      for (auto a : oracle::infeasible_sets(o.sizes, o.demand)) {
        for (auto b : oracle::feasible_sets(o.sizes, o.demand)) {
          const Rational got = weakened_kc_slack(inst, ItemSet(a), ItemSet(b), eps);
          ASSERT_EQ(got, oracle::weakened_slack(o.sizes, o.demand, a, b, eps));
          ASSERT_GE(got, 0);
          const Rational plain = kc_slack(inst, ItemSet(a), ItemSet(b));
          ASSERT_GE(plain, 0);
          ASSERT_LE(plain, got);
        }
      }
    }
  }
}

TEST(Knapsack, RowsAndColumns) {
  auto rc = enumerate_rows_and_columns(trio());
  EXPECT_EQ(rc.infeasible, (std::vector<ItemSet>{ItemSet{}, set({1}), set({2}), set({3})}));
  EXPECT_EQ(rc.feasible, (std::vector<ItemSet>{set({1, 2}), set({1, 3}), set({2, 3}), set({1, 2, 3})}));
  rc = enumerate_rows_and_columns(KnapsackInstance({5}, 5));
  EXPECT_EQ(rc.infeasible, std::vector<ItemSet>{ItemSet{}});
  EXPECT_EQ(rc.feasible, std::vector<ItemSet>{set({1})});
  rc = enumerate_rows_and_columns(KnapsackInstance({1, 1}, 2));
  EXPECT_EQ(rc.infeasible.size(), 3u);
  EXPECT_EQ(rc.feasible, std::vector<ItemSet>{set({1, 2})});
  EXPECT_THROW(enumerate_rows_and_columns(KnapsackInstance(std::vector<std::int64_t>(17, 1), 3)), CapacityError);
}

TEST(Knapsack, SlackMatrix) {
  auto m = exact_slack_matrix(trio(), 1);
  ASSERT_EQ(m.entries.size(), 4u);
  ASSERT_EQ(m.entries[0].size(), 4u);
  EXPECT_EQ(m.entries[3][0], frac(4, 3));  // A = {3}, b = {1,2}
  for (const auto& row : m.entries) {
    for (const auto& v : row) EXPECT_GE(v, 0);
  }
  auto single = exact_slack_matrix(KnapsackInstance({5}, 5), 1);
  EXPECT_EQ(single.entries, (std::vector<std::vector<Rational>>{{frac(5, 3)}}));
}

TEST(Knapsack, OptimumExamples) {
  auto o = dp_optimum(trio(), {1, 1, 1});
  EXPECT_EQ(o.value, 2);
  EXPECT_EQ(o.witness, set({1, 2}));
  o = dp_optimum(trio(), {4, 3, 2});
  EXPECT_EQ(o.value, 5);
  EXPECT_EQ(o.witness, set({2, 3}));
  o = dp_optimum(KnapsackInstance({5}, 5), {7});
  EXPECT_EQ(o.value, 7);
  EXPECT_EQ(o.witness, set({1}));
  EXPECT_THROW(dp_optimum(trio(), {1, 1}), InputError);
  EXPECT_THROW(dp_optimum(trio(), {1, -1, 1}), InputError);
}

TEST(Knapsack, OptimumRoutesAgreeWithBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> cd(0, 20);
  for (int trial = 0; trial < 80; ++trial) {
    auto o = oracle::random_instance(rng, 1, 10, 15);
    std::vector<Rational> costs;
    for (std::size_t i = 0; i < o.sizes.size(); ++i) costs.push_back(frac(cd(rng), 1 + trial % 3));
    KnapsackInstance inst(o.sizes, o.demand);
    const Rational want = oracle::brute_min_cost(o.sizes, o.demand, costs);
    auto e = enumerate_optimum(inst, costs);
    auto d = demand_dp_optimum(inst, costs);
    ASSERT_EQ(e.value, want);
    ASSERT_EQ(d.value, want);
    ASSERT_TRUE(inst.is_feasible(e.witness));
    ASSERT_TRUE(inst.is_feasible(d.witness));
    ASSERT_EQ(cost_of(costs, e.witness), want);
    ASSERT_EQ(cost_of(costs, d.witness), want);
  }
}

TEST(Knapsack, LargeInstanceUsesDemandDp) {
  std::vector<std::int64_t> sizes(30, 3);
  sizes[0] = 7;
  KnapsackInstance inst(sizes, 20);
  std::vector<Rational> costs(30, Rational(1));
  costs[0] = frac(3, 2);
  // Item 1 plus 5 items of size 3 = 22 >= 20 for 6.5; 7 items of size 3 = 21 for 7.
  EXPECT_EQ(dp_optimum(inst, costs).value, frac(13, 2));
}
