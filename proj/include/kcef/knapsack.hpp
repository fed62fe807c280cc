#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kcef/item_set.hpp"
#include "kcef/rational.hpp"

namespace kcef {

/// Min-knapsack instance: positive integer sizes and a demand satisfying
/// max_i s_i <= D <= sum_i s_i. Instances outside that range are rejected
/// rather than normalized.
class KnapsackInstance {
 public:
  KnapsackInstance(std::vector<std::int64_t> sizes, std::int64_t demand);

  int n() const { return static_cast<int>(sizes_.size()); }
  const std::vector<std::int64_t>& sizes() const { return sizes_; }
  std::int64_t size(int i) const { return sizes_[static_cast<std::size_t>(i)]; }
  std::int64_t demand() const { return demand_; }
  std::int64_t total() const { return total_; }

  std::int64_t weight(ItemSet s) const;
  bool is_feasible(ItemSet s) const { return weight(s) >= demand_; }
  /// Length-checked 0/1 vector form.
  bool is_feasible(const std::vector<int>& x) const;

 private:
  std::vector<std::int64_t> sizes_;
  std::int64_t demand_;
  std::int64_t total_ = 0;
};

/// alpha = 2/(2+eps), the weakening factor of the cover inequalities.
Rational weakening_factor(const Rational& eps);

/// Rejects eps <= 0. eps >= 1 is admitted (the CLI warns about it).
void check_epsilon(const Rational& eps);

struct ResidualData {
  std::int64_t residual;               // U = D - s(A)
  std::vector<std::int64_t> clipped;   // s'_i = min(s_i, U), for every i
};

/// Throws DomainError if A is feasible.
ResidualData residual_and_clipped(const KnapsackInstance& inst, ItemSet a);

/// One weakened cover inequality  sum_{i not in A} s'_i x_i >= alpha U.
struct WeakenedKCRow {
  ItemSet infeasible_set;
  Rational epsilon;
  std::int64_t residual;
  std::vector<std::int64_t> clipped_sizes;  // zero for i in A
  Rational rhs;

  static WeakenedKCRow make(const KnapsackInstance& inst, ItemSet a, const Rational& eps);

  /// lhs(x) - rhs for a fractional point x.
  Rational slack(const std::vector<Rational>& x) const;
};

/// S^eps_{A,b} = sum_{i notin A} s'_i b_i - alpha U. Throws DomainError when
/// A is feasible or b is infeasible. The result is nonnegative for valid input.
Rational weakened_kc_slack(const KnapsackInstance& inst, ItemSet a, ItemSet b, const Rational& eps);

/// Unweakened cover slack (eps = 0), oracle use only.
Rational kc_slack(const KnapsackInstance& inst, ItemSet a, ItemSet b);

inline constexpr int kDefaultEnumerationCap = 16;

struct RowsAndColumns {
  std::vector<ItemSet> infeasible;  // increasing bitmask order
  std::vector<ItemSet> feasible;
};

RowsAndColumns enumerate_rows_and_columns(const KnapsackInstance& inst,
                                          int cap = kDefaultEnumerationCap);

struct SlackMatrix {
  std::vector<ItemSet> rows;
  std::vector<ItemSet> cols;
  std::vector<std::vector<Rational>> entries;  // entries[row][col]
};

SlackMatrix exact_slack_matrix(const KnapsackInstance& inst, const Rational& eps,
                               int cap = kDefaultEnumerationCap);

struct KnapsackOptimum {
  Rational value;
  ItemSet witness;
};

/// Exact min-knapsack optimum; ties go to the lexicographically smallest
/// witness. Subset enumeration for n <= 20, demand-indexed DP above.
KnapsackOptimum dp_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs);

/// The two routes behind dp_optimum, exposed so they can be cross-checked.
KnapsackOptimum enumerate_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs);
KnapsackOptimum demand_dp_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs);

Rational cost_of(const std::vector<Rational>& costs, ItemSet s);

}  // namespace kcef
