#include <gtest/gtest.h>

#include <random>

#include "kcef/kc_protocol.hpp"
#include "oracles.hpp"

using namespace kcef;
using oracle::frac;

namespace {

ItemSet set(std::initializer_list<int> one_based) {
  ItemSet s;
  for (int i : one_based) s = s.with(i - 1);
  return s;
}

const KnapsackInstance kTrio({2, 3, 4}, 5);
const KnapsackInstance kCaseB({3, 1, 1, 1, 1}, 4);

}  // namespace

TEST(Discretization, Trio) {
  auto d = discretize(kTrio, set({3}), 1);
  EXPECT_EQ(d.alpha, frac(2, 3));
  EXPECT_EQ(d.delta, frac(1, 8));
  EXPECT_EQ(d.residual, 1);
  EXPECT_EQ(d.k, 0);
  EXPECT_EQ(d.u_tilde, 1);
  EXPECT_EQ(d.ell, -1);
  EXPECT_EQ(d.delta_tilde, frac(7, 8));
}

TEST(Discretization, CaseBInstance) {
  auto d = discretize(kCaseB, set({2, 3}), 1);
  const Rational ut = frac(59049, 32768);
  EXPECT_EQ(d.residual, 2);
  EXPECT_EQ(d.k, 5);
  EXPECT_EQ(d.u_tilde, ut);
  EXPECT_EQ(d.ell, 9);
  EXPECT_EQ(d.delta_tilde, frac(17, 8) * ut);
  EXPECT_EQ(d.sigma_tilde, ut);
  EXPECT_LT((1 + 9 * d.delta) * ut, 4);
  EXPECT_LE(4, (1 + 10 * d.delta) * ut);
}

TEST(Discretization, SandwichOnRandomInstances) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 60; ++trial) {
    auto o = oracle::random_instance(rng, 1, 7, 40);
    KnapsackInstance inst(o.sizes, o.demand);
    for (const Rational eps : {Rational(1), frac(1, 2), frac(1, 5), Rational(3)}) {
      for (auto a : oracle::infeasible_sets(o.sizes, o.demand)) {
        auto d = discretize(inst, ItemSet(a), eps);
        const Rational step = d.delta * d.u_tilde;
        ASSERT_GE(d.ell, -1);
        ASSERT_LE(d.u_tilde, d.residual);
        ASSERT_LT(d.residual, d.u_tilde * (1 + d.delta));
        const Rational x(inst.demand() - d.large_in_a);
        ASSERT_LT(d.delta_tilde, x);
        ASSERT_LE(x, d.delta_tilde + step);
        ASSERT_LE(d.sigma_tilde, d.small_in_a);
        ASSERT_LT(d.small_in_a, d.sigma_tilde + step);
        ASSERT_GT((1 - 2 * d.delta) * d.u_tilde - d.alpha * d.residual, 0);
      }
    }
  }
}

TEST(Discretization, CaseSelection) {
  auto d = discretize(kTrio, set({3}), 1);
  EXPECT_EQ(case_of(kTrio, set({1, 2}), d), SlackCase::CaseA);
  auto db = discretize(kCaseB, set({2, 3}), 1);
  EXPECT_EQ(case_of(kCaseB, set({2, 3, 4, 5}), db), SlackCase::CaseB);
  // B = I_large with s(I_large) >= D.
  const KnapsackInstance big({5, 1}, 5);
  auto d0 = discretize(big, ItemSet{}, 1);
  EXPECT_EQ(d0.split.i_large, set({1}));
  EXPECT_EQ(case_of(big, d0.split.i_large, d0), SlackCase::CaseA);
}

TEST(KCProtocol, TrioCaseA) {
  auto proto = build_kc_protocol(kTrio, 1);
  EXPECT_EQ(exact_expectation(proto.tree(), set({3}), set({1, 2})), frac(4, 3));
  std::map<Rational, Rational> by_value;
  for_each_reached_leaf(proto.tree(), set({3}), set({1, 2}), [&](const LeafVisit& v) {
    by_value[v.output] += v.alice_reach * v.bob_reach;
  });
  EXPECT_EQ(by_value, (std::map<Rational, Rational>{{0, frac(1, 3)}, {1, frac(1, 3)}, {3, frac(1, 3)}}));
}

TEST(KCProtocol, CaseBExample) {
  auto proto = build_kc_protocol(kCaseB, 1);
  const ItemSet a = set({2, 3});
  const ItemSet b = set({2, 3, 4, 5});
  EXPECT_EQ(exact_expectation(proto.tree(), a, b), frac(2, 3));
  const Rational ut = frac(59049, 32768);
  std::vector<Rational> nonzero;
  for_each_reached_leaf(proto.tree(), a, b, [&](const LeafVisit& v) {
    if (v.output != 0) nonzero.push_back(v.output);
  });
  std::sort(nonzero.begin(), nonzero.end());
  std::vector<Rational> want{7 * (frac(15, 8) * ut - frac(10, 3)), 7 * (4 - frac(15, 8) * ut)};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(nonzero, want);
}

TEST(KCProtocol, SingleItem) {
  KnapsackInstance one({5}, 5);
  auto proto = build_kc_protocol(one, 1);
  EXPECT_EQ(exact_expectation(proto.tree(), ItemSet{}, set({1})), frac(5, 3));
}

TEST(KCProtocol, ExactOnRandomInstancesWithinHeightBound) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    auto o = oracle::random_instance(rng, 1, 6, 12);
    KnapsackInstance inst(o.sizes, o.demand);
    for (const Rational eps : {Rational(1), frac(1, 3)}) {
      auto proto = build_kc_protocol(inst, eps);
      for (auto a : oracle::infeasible_sets(o.sizes, o.demand)) {
        const int bound = proto.height_bound(ItemSet(a));
        for (auto b : oracle::feasible_sets(o.sizes, o.demand)) {
          auto r = analyze_pair(proto.tree(), ItemSet(a), ItemSet(b));
          ASSERT_EQ(r.expectation, oracle::weakened_slack(o.sizes, o.demand, a, b, eps));
          ASSERT_LE(r.max_path_length, bound);
        }
      }
    }
  }
}

TEST(KCProtocol, LargeEpsilonStillExact) {
  auto proto = build_kc_protocol(kCaseB, 4);
  for (auto a : oracle::infeasible_sets(kCaseB.sizes(), 4)) {
    for (auto b : oracle::feasible_sets(kCaseB.sizes(), 4)) {
      ASSERT_EQ(exact_expectation(proto.tree(), ItemSet(a), ItemSet(b)),
                oracle::weakened_slack(kCaseB.sizes(), 4, a, b, 4));
    }
  }
}

TEST(KCProtocol, RejectsBadEpsilon) {
  EXPECT_THROW(build_kc_protocol(kTrio, 0), DomainError);
  EXPECT_THROW(build_kc_protocol(kTrio, -1), DomainError);
}
