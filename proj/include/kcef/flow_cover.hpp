#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "kcef/item_set.hpp"
#include "kcef/knapsack.hpp"
#include "kcef/protocol_tree.hpp"
#include "kcef/rational.hpp"

namespace kcef {

/// Single-demand facility location: capacities s_i > 0 and demand D with
/// sum s_i >= D. Costs are carried along but not used by the protocol.
class FacilityInstance {
 public:
  FacilityInstance(std::vector<std::int64_t> capacities, std::int64_t demand,
                   std::optional<std::vector<Rational>> open_costs = std::nullopt,
                   std::optional<std::vector<Rational>> unit_costs = std::nullopt);

  int n() const { return static_cast<int>(capacities_.size()); }
  const std::vector<std::int64_t>& capacities() const { return capacities_; }
  std::int64_t capacity(int i) const { return capacities_[static_cast<std::size_t>(i)]; }
  std::int64_t demand() const { return demand_; }
  std::int64_t weight(ItemSet s) const;
  const std::optional<std::vector<Rational>>& open_costs() const { return open_costs_; }
  const std::optional<std::vector<Rational>>& unit_costs() const { return unit_costs_; }

  /// Knapsack instance with sizes min(s_i, D). Clipping leaves every
  /// min(s_i, U) and every threshold test against values <= D unchanged.
  KnapsackInstance induced_knapsack() const;

 private:
  std::vector<std::int64_t> capacities_;
  std::int64_t demand_;
  std::optional<std::vector<Rational>> open_costs_;
  std::optional<std::vector<Rational>> unit_costs_;
};

struct FlowSolution {
  ItemSet y;               // open facilities
  std::vector<Rational> x; // fraction of the demand served by each facility

  bool operator==(const FlowSolution&) const = default;
};

/// Throws DomainError unless sum x = 1 and 0 <= x_i D <= y_i s_i.
void check_solution(const FacilityInstance& inst, const FlowSolution& sol);

struct FlowTuple {
  ItemSet a;
  ItemSet f1;
  ItemSet f2;
};

/// Throws DomainError unless (A, F1, F2) partitions [n] and s(A) < D.
void check_tuple(const FacilityInstance& inst, const FlowTuple& t);

/// Every tuple with infeasible A, in (A, F1) bitmask order.
std::vector<FlowTuple> enumerate_tuples(const FacilityInstance& inst);

/// Feasible solutions with every x_i a multiple of 1/steps; each flow
/// support is paired with all of its supersets as y.
std::vector<FlowSolution> solution_grid(const FacilityInstance& inst, int steps);

/// s'(F1 & B) + x(F2 & B) - alpha U, with x(J) = sum_{i in J} x_i D.
Rational fci_slack(const FacilityInstance& inst, const FlowTuple& t, const FlowSolution& sol, const Rational& eps);

struct SupportPartition {
  ItemSet f1_t;  // x_i D = s_i
  ItemSet f2_t;  // 0 < x_i D < s_i
  ItemSet f3_t;  // x_i = 0
};

SupportPartition partition_support(const FacilityInstance& inst, const FlowSolution& sol);
bool is_canonical(const FacilityInstance& inst, const FlowSolution& sol);

/// s'_j y_j if the interior facility j is in F1, x_j D if it is in F2, else 0.
/// residual is U = D - s(A).
Rational gamma(const FacilityInstance& inst, const FlowTuple& t, const FlowSolution& sol, std::int64_t residual);

/// One transfer step between the two lowest-indexed interior coordinates p, q:
/// sol = weight * plus + (1 - weight) * minus, each side with one coordinate
/// pushed to a bound. Empty when sol is canonical.
struct TransferStep {
  Rational weight;
  FlowSolution plus;
  FlowSolution minus;
};

std::optional<TransferStep> transfer_step(const FacilityInstance& inst, const FlowSolution& sol);

/// Convex combination of canonical solutions with the same y reproducing sol.
std::vector<std::pair<Rational, FlowSolution>> canonical_decompose(const FacilityInstance& inst,
                                                                   const FlowSolution& sol);

using FCITree = ProtocolTree<FlowTuple, FlowSolution>;

/// Protocol whose expected output on (tuple, feasible solution) is
/// fci_slack. Bob first samples a canonical solution by n - 1 transfer
/// steps; a fair coin from Alice then chooses between the s'(F1 & F~3) part
/// and the main part on the solution with F~3 closed, both doubled.
class FCIProtocol {
 public:
  FCIProtocol(const FacilityInstance& inst, const Rational& eps);

  const FCITree& tree() const { return root_; }
  const FacilityInstance& instance() const;
  const Rational& epsilon() const;

  struct Context;

 private:
  std::shared_ptr<Context> ctx_;
  FCITree root_;
};

FCIProtocol build_fci_protocol(const FacilityInstance& inst, const Rational& eps);

}  // namespace kcef
