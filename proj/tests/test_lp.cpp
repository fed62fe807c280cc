#include <gtest/gtest.h>

#include <random>

#include "kcef/lp.hpp"
#include "oracles.hpp"

using namespace kcef;
using oracle::frac;

TEST(LP, NonnegativityOnlyGivesZero) {
  LinearProgram lp;
  lp.n_x = 3;
  lp.n_y = 3;
  lp.cost = {1, 2, 3};
  for (std::size_t i = 0; i < 3; ++i) lp.rows.push_back({{{i, Rational(1)}}, 0, {{i, Rational(1)}}});
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.x, (std::vector<Rational>{0, 0, 0}));
}

TEST(LP, ForcedEquality) {
  // min x1 s.t. x1 - 1 = y1, y1 >= 0.
  LinearProgram lp;
  lp.n_x = 1;
  lp.n_y = 1;
  lp.cost = {1};
  lp.rows.push_back({{{0, Rational(1)}}, 1, {{0, Rational(1)}}});
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_EQ(r.x, std::vector<Rational>{1});
  EXPECT_EQ(r.value, 1);
  EXPECT_EQ(r.y.size(), 0u);  // y1 = 0 is not stored
}

TEST(LP, DetectsUnboundedAndInfeasible) {
  LinearProgram unb;
  unb.n_x = 1;
  unb.n_y = 1;
  unb.cost = {-1};
  unb.rows.push_back({{{0, Rational(1)}}, 0, {{0, Rational(1)}}});
  EXPECT_EQ(solve_lp(unb).status, LPStatus::Unbounded);

  // x = y1 and x = -1 - y2 cannot both hold with y >= 0.
  LinearProgram inf;
  inf.n_x = 1;
  inf.n_y = 2;
  inf.cost = {0};
  inf.rows.push_back({{{0, Rational(1)}}, 0, {{0, Rational(1)}}});
  inf.rows.push_back({{{0, Rational(-1)}}, 1, {{1, Rational(1)}}});
  EXPECT_EQ(solve_lp(inf).status, LPStatus::Infeasible);
}

TEST(LP, StandardFormRandomMatchesVertexEnumeration) {
  // min c x s.t. G x >= h, x >= 0 written with surplus columns.
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + rng() % 2;
    const std::size_t m = 1 + rng() % 3;
    std::vector<std::vector<Rational>> g(m, std::vector<Rational>(n));
    std::vector<Rational> h(m), c(n);
    for (auto& row : g) {
      for (auto& v : row) v = static_cast<long>(rng() % 5);
    }
    for (auto& v : h) v = static_cast<long>(rng() % 7);
    for (auto& v : c) v = static_cast<long>(1 + rng() % 6);
    bool coverable = true;
    for (std::size_t r = 0; r < m; ++r) {
      bool any = false;
      for (auto& v : g[r]) any = any || v > 0;
      coverable = coverable && (any || h[r] == 0);
    }
    StandardForm sf;
    sf.rhs = h;
    sf.cost = c;
    sf.cost.resize(n + m, Rational(0));
    sf.m.assign(m, std::vector<Rational>(n + m));
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t i = 0; i < n; ++i) sf.m[r][i] = g[r][i];
      sf.m[r][n + r] = -1;
    }
    auto res = solve_standard(sf);
    if (!coverable) {
      EXPECT_EQ(res.status, LPStatus::Infeasible);
      continue;
    }
    ASSERT_EQ(res.status, LPStatus::Optimal);
    // Oracle: basic solutions of {G x >= h, x >= 0}.
    std::vector<std::vector<Rational>> all = g;
    std::vector<Rational> rhs = h;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Rational> e(n, Rational(0));
      e[i] = 1;
      all.push_back(e);
      rhs.push_back(0);
    }
    std::optional<Rational> best;
    const std::size_t total = all.size();
    for (std::uint64_t pick = 0; pick < (std::uint64_t{1} << total); ++pick) {
      if (static_cast<std::size_t>(std::popcount(pick)) != n) continue;
      std::vector<std::vector<Rational>> sm;
      std::vector<Rational> sr;
      for (std::size_t k = 0; k < total; ++k) {
        if ((pick >> k) & 1U) {
          sm.push_back(all[k]);
          sr.push_back(rhs[k]);
        }
      }
      auto z = oracle::solve_square(sm, sr);
      if (!z) continue;
      bool ok = true;
      for (std::size_t k = 0; k < total && ok; ++k) {
        Rational lhs = 0;
        for (std::size_t i = 0; i < n; ++i) lhs += all[k][i] * (*z)[i];
        ok = lhs >= rhs[k];
      }
      if (!ok) continue;
      Rational v = 0;
      for (std::size_t i = 0; i < n; ++i) v += c[i] * (*z)[i];
      if (!best || v < *best) best = v;
    }
    ASSERT_TRUE(best.has_value());
    EXPECT_EQ(res.value, *best);
  }
}

TEST(LP, ParallelAndPrivateColumnsPresolved) {
  // min x1 + x2 s.t. x1 + x2 - 2 = y1 + 2 y2 (parallel columns), x_i = y_{i+2}.
  LinearProgram lp;
  lp.n_x = 2;
  lp.n_y = 4;
  lp.cost = {1, 1};
  lp.rows.push_back({{{0, Rational(1)}, {1, Rational(1)}}, 2, {{0, Rational(1)}, {1, Rational(2)}}});
  lp.rows.push_back({{{0, Rational(1)}}, 0, {{2, Rational(1)}}});
  lp.rows.push_back({{{1, Rational(1)}}, 0, {{3, Rational(1)}}});
  auto r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_EQ(r.value, 2);
  EXPECT_EQ(r.x[0] + r.x[1], 2);
  EXPECT_GE(r.x[0], 0);
  EXPECT_GE(r.x[1], 0);
}

TEST(RowEchelon, TracksRank) {
  RowEchelon e;
  EXPECT_TRUE(e.insert({{0, Rational(1)}, {1, Rational(2)}}));
  EXPECT_TRUE(e.insert({{1, Rational(1)}}));
  EXPECT_FALSE(e.insert({{0, Rational(2)}, {1, Rational(5)}}));
  EXPECT_FALSE(e.insert({}));
  EXPECT_TRUE(e.insert({{7, frac(1, 3)}}));
  EXPECT_EQ(e.rank(), 3u);
}
