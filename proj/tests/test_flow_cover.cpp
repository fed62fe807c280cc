#include <gtest/gtest.h>

#include <set>

#include "kcef/flow_cover.hpp"
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

FlowSolution sol(ItemSet y, std::vector<Rational> x) { return FlowSolution{y, std::move(x)}; }

void expect_recombines(const FacilityInstance& inst, const FlowSolution& z) {
  auto parts = canonical_decompose(inst, z);
  Rational total = 0;
  std::vector<Rational> sum(z.x.size(), Rational(0));
  for (const auto& [w, c] : parts) {
    EXPECT_GE(w, 0);
    EXPECT_TRUE(is_canonical(inst, c));
    EXPECT_EQ(c.y, z.y);
    EXPECT_NO_THROW(check_solution(inst, c));
    total += w;
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += w * c.x[i];
  }
  EXPECT_EQ(total, 1);
  EXPECT_EQ(sum, z.x);
}

}  // namespace

TEST(FlowCover, InstanceValidation) {
  EXPECT_THROW(FacilityInstance({}, 1), InputError);
  EXPECT_THROW(FacilityInstance({1, 1}, 3), InputError);
  EXPECT_THROW(FacilityInstance({1, 0}, 1), InputError);
  EXPECT_THROW(FacilityInstance({2}, 1, std::vector<Rational>{1, 2}), InputError);
  FacilityInstance big({9, 2}, 4);  // capacities above D are allowed
  EXPECT_EQ(big.induced_knapsack().sizes(), (std::vector<std::int64_t>{4, 2}));
}

TEST(FlowCover, SlackExamples) {
  for (std::int64_t d : {1, 3, 7}) {
    FacilityInstance one({d}, d);
    EXPECT_EQ(fci_slack(one, {ItemSet{}, set({1}), ItemSet{}}, sol(set({1}), {1}), 1), Rational(d) / 3);
  }
  FacilityInstance two({3, 2}, 4);
  const FlowTuple t{set({1}), ItemSet{}, set({2})};
  EXPECT_EQ(fci_slack(two, t, sol(set({1, 2}), {frac(3, 4), frac(1, 4)}), 1), frac(1, 3));
  EXPECT_THROW(fci_slack(two, t, sol(set({1, 2}), {frac(1, 2), frac(1, 4)}), 1), DomainError);
  EXPECT_THROW(fci_slack(two, t, sol(set({1}), {frac(3, 4), frac(1, 4)}), 1), DomainError);
  EXPECT_THROW(fci_slack(two, {set({1, 2}), ItemSet{}, ItemSet{}}, sol(set({1, 2}), {frac(3, 4), frac(1, 4)}), 1),
               DomainError);
  EXPECT_THROW(fci_slack(two, {set({1}), set({2}), set({2})}, sol(set({1, 2}), {frac(3, 4), frac(1, 4)}), 1),
               DomainError);
}

TEST(FlowCover, NoF2MatchesKnapsackCover) {
  KnapsackInstance kinst({2, 3, 4}, 5);
  FacilityInstance inst({2, 3, 4}, 5);
  for (auto a : oracle::infeasible_sets(kinst.sizes(), 5)) {
    const FlowTuple t{ItemSet(a), ItemSet(a).complement(3), ItemSet{}};
    for (const auto& g : oracle::flow_grid(kinst.sizes(), 5, 5)) {
      const ItemSet y(g.y);
      EXPECT_EQ(fci_slack(inst, t, sol(y, g.x), 1), weakened_kc_slack(kinst, ItemSet(a), y, 1));
    }
  }
}

TEST(FlowCover, SupportPartition) {
  FacilityInstance a({3, 2}, 4);
  auto p = partition_support(a, sol(set({1, 2}), {frac(3, 4), frac(1, 4)}));
  EXPECT_EQ(p.f1_t, set({1}));
  EXPECT_EQ(p.f2_t, set({2}));
  EXPECT_EQ(p.f3_t, ItemSet{});
  EXPECT_TRUE(is_canonical(a, sol(set({1, 2}), {frac(3, 4), frac(1, 4)})));

  FacilityInstance b({4, 4}, 4);
  p = partition_support(b, sol(set({1, 2}), {frac(1, 2), frac(1, 2)}));
  EXPECT_EQ(p.f2_t, set({1, 2}));
  EXPECT_FALSE(is_canonical(b, sol(set({1, 2}), {frac(1, 2), frac(1, 2)})));
  p = partition_support(b, sol(set({1, 2}), {1, 0}));
  EXPECT_EQ(p.f1_t, set({1}));
  EXPECT_EQ(p.f3_t, set({2}));
  EXPECT_TRUE(is_canonical(b, sol(set({1, 2}), {1, 0})));
}

TEST(FlowCover, Gamma) {
  FacilityInstance inst({4, 3}, 5);
  // A = {2}: U = 2; interior facility 1 (x_1 D = 2 < 4) in F1.
  const FlowSolution z = sol(set({1, 2}), {frac(2, 5), frac(3, 5)});
  EXPECT_EQ(gamma(inst, {set({2}), set({1}), ItemSet{}}, z, 2), 2);
  // Interior facility 2 in F2 with x_2 D = 1.
  FacilityInstance i2({4, 2}, 5);
  const FlowSolution z2 = sol(set({1, 2}), {frac(4, 5), frac(1, 5)});
  EXPECT_EQ(gamma(i2, {set({1}), ItemSet{}, set({2})}, z2, 1), 1);
  EXPECT_EQ(gamma(i2, {set({2}), set({1}), ItemSet{}}, z2, 3), 0);
  FacilityInstance b({4, 4}, 4);
  EXPECT_THROW(gamma(b, {ItemSet{}, set({1, 2}), ItemSet{}}, sol(set({1, 2}), {frac(1, 2), frac(1, 2)}), 4),
               DomainError);
}

TEST(FlowCover, DecomposeExamples) {
  FacilityInstance b({4, 4}, 4);
  auto parts = canonical_decompose(b, sol(set({1, 2}), {frac(1, 2), frac(1, 2)}));
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].first, frac(1, 2));
  EXPECT_EQ(parts[1].first, frac(1, 2));
  EXPECT_EQ(parts[0].second.x, (std::vector<Rational>{1, 0}));
  EXPECT_EQ(parts[1].second.x, (std::vector<Rational>{0, 1}));

  FacilityInstance a({3, 2}, 4);
  auto single = canonical_decompose(a, sol(set({1, 2}), {frac(3, 4), frac(1, 4)}));
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].first, 1);
}

TEST(FlowCover, DecomposeRecombinesOnGrid) {
  for (const auto& caps : std::vector<std::vector<std::int64_t>>{{3, 3, 3}, {2, 5, 4, 3}, {6, 1, 2}}) {
    const std::int64_t d = 5;
    FacilityInstance inst(caps, d);
    for (const auto& g : oracle::flow_grid(caps, d, 6)) expect_recombines(inst, sol(ItemSet(g.y), g.x));
  }
}

TEST(FCIProtocol, CaseTwoExample) {
  FacilityInstance inst({3, 2}, 4);
  auto proto = build_fci_protocol(inst, 1);
  const FlowTuple t{set({1}), ItemSet{}, set({2})};
  EXPECT_EQ(exact_expectation(proto.tree(), t, sol(set({1, 2}), {frac(3, 4), frac(1, 4)})), frac(1, 3));
}

TEST(FCIProtocol, ClosedFacilitiesCount) {
  FacilityInstance inst({4, 4, 2}, 4);
  auto proto = build_fci_protocol(inst, 1);
  const FlowSolution z = sol(set({1, 2, 3}), {1, 0, 0});  // F~3 = {2,3}
  for (const auto& t : enumerate_tuples(inst)) {
    EXPECT_EQ(exact_expectation(proto.tree(), t, z), fci_slack(inst, t, z, 1));
  }
}

TEST(FCIProtocol, ExactOnGrid) {
  for (const auto& caps : std::vector<std::vector<std::int64_t>>{{3, 2}, {2, 2, 3}, {5, 1, 3}, {1, 4, 2}}) {
    const std::int64_t d = 4;
    FacilityInstance inst(caps, d);
    for (const Rational eps : {Rational(1), frac(1, 3)}) {
      auto proto = build_fci_protocol(inst, eps);
      for (const auto& t : enumerate_tuples(inst)) {
        for (const auto& g : oracle::flow_grid(caps, d, 4)) {
          const FlowSolution z = sol(ItemSet(g.y), g.x);
          const Rational want =
              oracle::fci_slack(caps, d, t.a.bits(), t.f1.bits(), t.f2.bits(), g.x, g.y, eps);
          ASSERT_EQ(exact_expectation(proto.tree(), t, z), want)
              << "A=" << t.a.to_string() << " F1=" << t.f1.to_string() << " y=" << ItemSet(g.y).to_string();
        }
      }
    }
  }
}

TEST(FCIProtocol, IntegralSolutionsMatchKnapsackProtocol) {
  const std::vector<std::int64_t> caps{2, 5, 3};
  const std::int64_t d = 5;
  FacilityInstance inst(caps, d);
  auto fci = build_fci_protocol(inst, 1);
  auto kc = build_kc_protocol(inst.induced_knapsack(), 1);
  for (auto a : oracle::infeasible_sets(caps, d)) {
    const FlowTuple t{ItemSet(a), ItemSet(a).complement(3), ItemSet{}};
    for (const auto& g : oracle::flow_grid(caps, d, 1)) {
      const ItemSet y(g.y);
      EXPECT_EQ(exact_expectation(fci.tree(), t, sol(y, g.x)), exact_expectation(kc.tree(), ItemSet(a), y));
    }
  }
}

TEST(FlowCover, SolutionGridMatchesOracle) {
  for (const auto& caps : std::vector<std::vector<std::int64_t>>{{3, 2}, {5, 1, 3}, {2, 2, 2, 2}}) {
    FacilityInstance inst(caps, 4);
    for (int g : {1, 3, 4}) {
      std::set<std::pair<std::uint64_t, std::vector<Rational>>> got, want;
      for (const auto& s : solution_grid(inst, g)) {
        EXPECT_NO_THROW(check_solution(inst, s));
        got.insert({s.y.bits(), s.x});
      }
      for (const auto& o : oracle::flow_grid(caps, 4, g)) want.insert({o.y, o.x});
      EXPECT_EQ(got, want);
    }
  }
  EXPECT_THROW(solution_grid(FacilityInstance({2}, 1), 0), InputError);
}
