#include <gtest/gtest.h>

#include <random>

#include "kcef/factorization.hpp"
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

Rational dot(const SparseLeafVector& f, const SparseLeafVector& v) {
  Rational s = 0;
  for (const auto& [id, x] : f) {
    auto it = v.find(id);
    if (it != v.end()) s += x * it->second;
  }
  return s;
}

}  // namespace

TEST(Factorization, RowTimesColumnIsExpectation) {
  auto proto = build_kc_protocol(kTrio, 1);
  auto f = row_vector(proto, set({3}));
  auto v = column_vector(proto, set({1, 2}));
  EXPECT_EQ(dot(f, v), frac(4, 3));
  EXPECT_THROW(row_vector(proto, set({1, 2})), DomainError);
  EXPECT_THROW(column_vector(proto, set({1})), DomainError);
  for (const auto& [id, x] : f) EXPECT_GE(x, 0);
  for (const auto& [id, x] : v) EXPECT_GE(x, 0);
}

TEST(Factorization, FullTrioMatchesOracleMatrix) {
  auto proto = build_kc_protocol(kTrio, 1);
  auto fz = factorize_full(proto);
  ASSERT_EQ(fz.rows.size(), 4u);
  ASSERT_EQ(fz.cols.size(), 4u);
  auto f = dense_f(fz);
  auto v = dense_v(fz);
  ASSERT_EQ(f.size(), 4u);
  ASSERT_EQ(v.size(), fz.rank());
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      Rational prod = 0;
      for (std::size_t l = 0; l < fz.rank(); ++l) prod += f[r][l] * v[l][c];
      EXPECT_EQ(prod, oracle::weakened_slack(kTrio.sizes(), 5, fz.rows[r].bits(), fz.cols[c].bits(), 1));
      EXPECT_EQ(prod, fz.entry(r, c));
    }
  }
}

TEST(Factorization, SingleItemProduct) {
  auto proto = build_kc_protocol(KnapsackInstance({5}, 5), 1);
  auto fz = factorize_full(proto);
  EXPECT_EQ(fz.entry(0, 0), frac(5, 3));
}

TEST(Factorization, RandomInstancesNonnegativeAndExact) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 25; ++trial) {
    auto o = oracle::random_instance(rng, 1, 6, 9);
    KnapsackInstance inst(o.sizes, o.demand);
    auto proto = build_kc_protocol(inst, frac(1, 2));
    auto fz = factorize_full(proto);
    for (std::size_t r = 0; r < fz.rows.size(); ++r) {
      for (const auto& [l, x] : fz.f[r]) ASSERT_GE(x, 0);
      for (std::size_t c = 0; c < fz.cols.size(); ++c) {
        ASSERT_EQ(fz.entry(r, c), oracle::weakened_slack(o.sizes, o.demand, fz.rows[r].bits(), fz.cols[c].bits(), frac(1, 2)));
      }
    }
    for (const auto& col : fz.v) {
      for (const auto& [l, x] : col) ASSERT_GE(x, 0);
    }
  }
}

TEST(EF, AllRowsTrioCanonicalLiftSatisfies) {
  auto proto = build_kc_protocol(kTrio, 1);
  auto rc = enumerate_rows_and_columns(kTrio);
  auto sys = emit_ef(proto, rc.infeasible);
  ASSERT_EQ(sys.rows.size(), 4u);
  for (ItemSet b : rc.feasible) {
    auto lift = canonical_lift(sys, proto, b);
    EXPECT_TRUE(satisfies(sys, lift.x, lift.y)) << b.to_string();
  }
}

TEST(EF, EmptyRowList) {
  auto proto = build_kc_protocol(kTrio, 1);
  auto sys = emit_ef(proto, {});
  EXPECT_TRUE(sys.rows.empty());
  EXPECT_EQ(sys.y_dim(), 3u);
  EXPECT_TRUE(satisfies(sys, std::vector<Rational>(3), std::vector<Rational>(3)));
  EXPECT_FALSE(satisfies(sys, {1, 0, 0}, std::vector<Rational>(3)));
}

TEST(EF, EmptySetRowTranscribesTheInequality) {
  auto proto = build_kc_protocol(kTrio, 1);
  auto sys = emit_ef(proto, {ItemSet{}});
  ASSERT_EQ(sys.rows.size(), 1u);
  const EFRow& row = sys.rows[0];
  EXPECT_EQ(row.x_coeffs, (std::vector<Rational>{2, 3, 4}));
  EXPECT_EQ(row.constant, frac(10, 3));
  auto f = row_vector(proto, ItemSet{});
  ASSERT_EQ(row.y_coeffs.size(), f.size());
  for (const auto& [id, val] : f) {
    auto idx = sys.leaves.find(id);
    ASSERT_TRUE(idx.has_value());
    EXPECT_EQ(row.y_coeffs.at(sys.leaf_y_index(*idx)), val);
  }
  EXPECT_THROW(emit_ef(proto, {set({1, 2})}), DomainError);
}

TEST(Factorization, UnfilteredColumnsAreNonnegative) {
  std::mt19937_64 rng(37);
  // Without a filter every Alice message is expanded, so keep the tree small.
  for (int trial = 0; trial < 10; ++trial) {
    auto o = oracle::random_instance(rng, 1, 4, 5);
    KnapsackInstance inst(o.sizes, o.demand);
    auto proto = build_kc_protocol(inst, 1);
    for (auto b : oracle::feasible_sets(o.sizes, o.demand)) {
      for (const auto& [id, x] : column_vector(proto, ItemSet(b))) ASSERT_GE(x, 0) << id;
    }
  }
}
