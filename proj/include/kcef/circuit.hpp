#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kcef/item_set.hpp"
#include "kcef/knapsack.hpp"

namespace kcef {

enum class GateKind : std::uint8_t { Input, ConstTrue, ConstFalse, And, Or };

struct Gate {
  GateKind kind;
  int a = -1;  // input index for Input, left operand for And/Or
  int b = -1;  // right operand for And/Or
};

/// Monotone fan-in-2 circuit. Gates are stored in topological order: every
/// operand index is smaller than the index of the gate using it, which makes
/// acyclicity a structural property.
class MonotoneCircuit {
 public:
  MonotoneCircuit(int n_inputs, std::vector<Gate> gates, int output);

  static MonotoneCircuit constant(int n_inputs, bool value);

  int n_inputs() const { return n_inputs_; }
  int output() const { return output_; }
  const std::vector<Gate>& gates() const { return gates_; }
  const Gate& gate(int g) const { return gates_[static_cast<std::size_t>(g)]; }
  bool is_constant() const;

  /// Length-checked evaluation on a 0/1 vector.
  bool evaluate(const std::vector<int>& x) const;
  bool evaluate(ItemSet x) const;
  /// Value of every gate on x (index = gate id).
  std::vector<std::uint8_t> evaluate_all(ItemSet x) const;

  std::string to_dot() const;

 private:
  int n_inputs_;
  std::vector<Gate> gates_;
  int output_;
};

struct CircuitStats {
  int depth;       // AND/OR gates on the longest input-to-output path
  int gate_count;  // AND/OR gates reachable from the output
};

CircuitStats circuit_stats(const MonotoneCircuit& c);

/// [sum_i w_i x_i >= T]. T = 0 is the constant-true function.
struct ThresholdSpec {
  std::vector<std::int64_t> weights;
  std::int64_t threshold = 0;

  void validate() const;
  bool holds(ItemSet x) const;
};

/// Extension point for alternative threshold-circuit constructions.
class ThresholdCircuitBuilder {
 public:
  virtual ~ThresholdCircuitBuilder() = default;
  virtual MonotoneCircuit build(const ThresholdSpec& spec) const = 0;
};

/// Divide-and-conquer counting circuit:
///   TH_t(L u R) = OR_j ( TH_j(L) AND TH_{t-j}(R) ),
/// balanced OR trees, memoized TH_j(block). Each item contributes its weight
/// in unary wires; blocks never split an item's wires, and thresholds are
/// normalized to sums actually attainable on a block, which keeps the
/// function unchanged while pruning dead terms.
///
/// Depth guarantee with m = sum_i min(w_i, T):
///   depth <= ceil(log2 m) * (1 + ceil(log2(m + 1))) <= (ceil(log2 m) + 1)^2,
/// i.e. the documented constant is kDepthConstant = 1.
class DivideAndConquerBuilder final : public ThresholdCircuitBuilder {
 public:
  static constexpr int kDepthConstant = 1;
  MonotoneCircuit build(const ThresholdSpec& spec) const override;
};

MonotoneCircuit build_threshold_circuit(const ThresholdSpec& spec);

/// Truncation g of the knapsack threshold function: weights s_i for items
/// with s_i >= cutoff, zero otherwise, threshold T. Throws DomainError for
/// T > D or non-positive cutoff/T.
ThresholdSpec truncation_spec(const KnapsackInstance& inst, std::int64_t cutoff, std::int64_t threshold);
MonotoneCircuit build_truncation_circuit(const KnapsackInstance& inst, std::int64_t cutoff,
                                         std::int64_t threshold,
                                         const ThresholdCircuitBuilder& builder = DivideAndConquerBuilder{});

}  // namespace kcef
