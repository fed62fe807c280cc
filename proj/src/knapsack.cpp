#include "kcef/knapsack.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace kcef {

KnapsackInstance::KnapsackInstance(std::vector<std::int64_t> sizes, std::int64_t demand)
    : sizes_(std::move(sizes)), demand_(demand) {
  if (sizes_.empty()) throw InputError("instance needs at least one item");
  if (sizes_.size() > static_cast<std::size_t>(ItemSet::kMaxItems)) {
    throw InputError("at most 64 items are supported");
  }
  std::int64_t max_size = 0;
  for (std::int64_t s : sizes_) {
    if (s <= 0) throw InputError("item sizes must be positive integers");
    if (total_ > std::numeric_limits<std::int64_t>::max() - s) throw InputError("total size overflows");
    total_ += s;
    max_size = std::max(max_size, s);
  }
  if (demand_ <= 0) throw InputError("demand must be a positive integer");
  if (max_size > demand_) {
    throw InputError("instance not normalized: max size " + std::to_string(max_size) +
                     " exceeds demand " + std::to_string(demand_));
  }
  if (demand_ > total_) {
    throw InputError("instance not normalized: demand " + std::to_string(demand_) +
                     " exceeds total size " + std::to_string(total_));
  }
}

std::int64_t KnapsackInstance::weight(ItemSet s) const {
  std::int64_t w = 0;
  for (int i : s.indices()) {
    if (i >= n()) throw InputError("item index out of range");
    w += sizes_[static_cast<std::size_t>(i)];
  }
  return w;
}

bool KnapsackInstance::is_feasible(const std::vector<int>& x) const {
  if (x.size() != sizes_.size()) {
    throw InputError("bit vector has length " + std::to_string(x.size()) + ", expected " +
                     std::to_string(sizes_.size()));
  }
  return is_feasible(ItemSet::from_bits(x));
}

Rational weakening_factor(const Rational& eps) { return Rational(2) / (Rational(2) + eps); }

void check_epsilon(const Rational& eps) {
  if (eps <= 0) throw DomainError("epsilon must be positive, got " + to_string(eps));
}

ResidualData residual_and_clipped(const KnapsackInstance& inst, ItemSet a) {
  std::int64_t used = inst.weight(a);
  if (used >= inst.demand()) {
    throw DomainError("set " + a.to_string() + " is feasible; residual demand undefined");
  }
  ResidualData out;
  out.residual = inst.demand() - used;
  out.clipped.reserve(static_cast<std::size_t>(inst.n()));
  for (std::int64_t s : inst.sizes()) out.clipped.push_back(std::min(s, out.residual));
  return out;
}

WeakenedKCRow WeakenedKCRow::make(const KnapsackInstance& inst, ItemSet a, const Rational& eps) {
  check_epsilon(eps);
  ResidualData r = residual_and_clipped(inst, a);
  WeakenedKCRow row;
  row.infeasible_set = a;
  row.epsilon = eps;
  row.residual = r.residual;
  row.clipped_sizes = r.clipped;
  for (int i : a.indices()) row.clipped_sizes[static_cast<std::size_t>(i)] = 0;
  row.rhs = weakening_factor(eps) * Rational(r.residual);
  return row;
}

Rational WeakenedKCRow::slack(const std::vector<Rational>& x) const {
  if (x.size() != clipped_sizes.size()) throw InputError("point has wrong dimension");
  Rational lhs = 0;
  for (std::size_t i = 0; i < x.size(); ++i) lhs += Rational(clipped_sizes[i]) * x[i];
  return lhs - rhs;
}

Rational weakened_kc_slack(const KnapsackInstance& inst, ItemSet a, ItemSet b, const Rational& eps) {
  check_epsilon(eps);
  if (!inst.is_feasible(b)) throw DomainError("column " + b.to_string() + " is infeasible");
  ResidualData r = residual_and_clipped(inst, a);
  Integer covered = 0;
  for (int i : b.minus(a).indices()) covered += r.clipped[static_cast<std::size_t>(i)];
  return Rational(covered) - weakening_factor(eps) * Rational(r.residual);
}

Rational kc_slack(const KnapsackInstance& inst, ItemSet a, ItemSet b) {
  if (!inst.is_feasible(b)) throw DomainError("column " + b.to_string() + " is infeasible");
  ResidualData r = residual_and_clipped(inst, a);
  std::int64_t covered = 0;
  for (int i : b.minus(a).indices()) covered += r.clipped[static_cast<std::size_t>(i)];
  return Rational(covered - r.residual);
}

RowsAndColumns enumerate_rows_and_columns(const KnapsackInstance& inst, int cap) {
  if (inst.n() > cap) {
    throw CapacityError("enumeration over 2^" + std::to_string(inst.n()) +
                        " subsets exceeds the cap of n <= " + std::to_string(cap));
  }
  RowsAndColumns out;
  const std::uint64_t limit = std::uint64_t{1} << inst.n();
  for (std::uint64_t m = 0; m < limit; ++m) {
    ItemSet s(m);
    (inst.is_feasible(s) ? out.feasible : out.infeasible).push_back(s);
  }
  return out;
}

SlackMatrix exact_slack_matrix(const KnapsackInstance& inst, const Rational& eps, int cap) {
  RowsAndColumns rc = enumerate_rows_and_columns(inst, cap);
  SlackMatrix m;
  m.rows = rc.infeasible;
  m.cols = rc.feasible;
  m.entries.reserve(m.rows.size());
  for (ItemSet a : m.rows) {
    std::vector<Rational> row;
    row.reserve(m.cols.size());
    for (ItemSet b : m.cols) row.push_back(weakened_kc_slack(inst, a, b, eps));
    m.entries.push_back(std::move(row));
  }
  return m;
}

Rational cost_of(const std::vector<Rational>& costs, ItemSet s) {
  Rational c = 0;
  for (int i : s.indices()) c += costs[static_cast<std::size_t>(i)];
  return c;
}

namespace {

void check_costs(const KnapsackInstance& inst, const std::vector<Rational>& costs) {
  if (costs.size() != static_cast<std::size_t>(inst.n())) {
    throw InputError("expected " + std::to_string(inst.n()) + " costs, got " +
                     std::to_string(costs.size()));
  }
  for (const Rational& c : costs) {
    if (c < 0) throw InputError("costs must be nonnegative");
  }
}

}  // namespace

KnapsackOptimum enumerate_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs) {
  check_costs(inst, costs);
  if (inst.n() > 24) throw CapacityError("subset enumeration limited to n <= 24");
  std::optional<KnapsackOptimum> best;
  const std::uint64_t limit = std::uint64_t{1} << inst.n();
  for (std::uint64_t m = 0; m < limit; ++m) {
    ItemSet s(m);
    if (!inst.is_feasible(s)) continue;
    Rational c = cost_of(costs, s);
    if (!best || c < best->value || (c == best->value && lex_less(s, best->witness))) {
      best = KnapsackOptimum{c, s};
    }
  }
  return *best;  // the full set is always feasible
}

KnapsackOptimum demand_dp_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs) {
  check_costs(inst, costs);
  const int n = inst.n();
  const std::int64_t demand = inst.demand();
  if (demand > 5'000'000) throw CapacityError("demand too large for the DP oracle");
  const auto width = static_cast<std::size_t>(demand + 1);

  // best[i][d]: cheapest way to cover residual demand d with items i..n-1.
  std::vector<std::vector<std::optional<Rational>>> best(
      static_cast<std::size_t>(n + 1), std::vector<std::optional<Rational>>(width));
  best[static_cast<std::size_t>(n)][0] = Rational(0);
  for (int i = n - 1; i >= 0; --i) {
    const auto& next = best[static_cast<std::size_t>(i + 1)];
    auto& cur = best[static_cast<std::size_t>(i)];
    for (std::int64_t d = 0; d <= demand; ++d) {
      std::optional<Rational> v = next[static_cast<std::size_t>(d)];
      std::int64_t rest = std::max<std::int64_t>(0, d - inst.size(i));
      if (const auto& take = next[static_cast<std::size_t>(rest)]; take) {
        Rational t = *take + costs[static_cast<std::size_t>(i)];
        if (!v || t < *v) v = t;
      }
      cur[static_cast<std::size_t>(d)] = v;
    }
  }

  // Walk forward preferring to take the lowest index, which yields the
  // lexicographically smallest optimal witness.
  KnapsackOptimum out{*best[0][static_cast<std::size_t>(demand)], ItemSet{}};
  std::int64_t d = demand;
  for (int i = 0; i < n && d > 0; ++i) {
    std::int64_t rest = std::max<std::int64_t>(0, d - inst.size(i));
    const auto& take = best[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(rest)];
    if (take && *take + costs[static_cast<std::size_t>(i)] == *best[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]) {
      out.witness = out.witness.with(i);
      d = rest;
    }
  }
  return out;
}

KnapsackOptimum dp_optimum(const KnapsackInstance& inst, const std::vector<Rational>& costs) {
  return inst.n() <= 20 ? enumerate_optimum(inst, costs) : demand_dp_optimum(inst, costs);
}

}  // namespace kcef
