#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "kcef/circuit.hpp"
#include "kcef/item_set.hpp"
#include "kcef/knapsack.hpp"
#include "kcef/protocol_tree.hpp"
#include "kcef/rational.hpp"

namespace kcef {

struct LargeSmallSplit {
  ItemSet i_large;  // s_i >= U
  ItemSet i_small;
};

LargeSmallSplit split_items(const KnapsackInstance& inst, std::int64_t residual);

/// Scale quantities Alice derives from her row A.
struct Discretization {
  Rational epsilon;
  Rational alpha;               // 2/(2+eps)
  Rational delta;               // eps/(6+2eps), so (1-2delta)/(1+delta) = alpha
  std::int64_t residual = 0;    // U
  LargeSmallSplit split;
  std::int64_t large_count = 0; // |I_large|, the prefix length in size order
  std::int64_t large_in_a = 0;  // s(I_large & A)
  std::int64_t small_in_a = 0;  // s(I_small & A)
  std::int64_t k = 0;           // (1+delta)^k <= U < (1+delta)^(k+1)
  Rational u_tilde;             // (1+delta)^k
  std::int64_t ell = 0;         // >= -1
  Rational delta_tilde;         // (1 + ell delta) u_tilde
  std::int64_t sigma_steps = 0; // sigma_tilde / (delta u_tilde)
  Rational sigma_tilde;
};

Discretization discretize(const KnapsackInstance& inst, ItemSet a, const Rational& eps);

enum class SlackCase { CaseA, CaseB };

/// CaseA iff s(I_large & B) >= D - delta_tilde.
SlackCase case_of(const KnapsackInstance& inst, ItemSet b, const Discretization& disc);

/// ceil(D - delta_tilde), the integer threshold of the Case A truncation.
std::int64_t case_a_threshold(const KnapsackInstance& inst, const Discretization& disc);

/// Memoized discretization for one (instance, eps), plus the message ranges
/// derived from it. Thread-safe.
class Discretizer {
 public:
  Discretizer(const KnapsackInstance& inst, const Rational& eps);

  const Discretization& operator()(ItemSet a) const;

  const KnapsackInstance& instance() const { return inst_; }
  const Rational& epsilon() const { return eps_; }
  const Rational& alpha() const { return alpha_; }
  const Rational& delta() const { return delta_; }
  const Rational& power(std::int64_t k) const { return powers_[static_cast<std::size_t>(k)]; }

  /// Number of values of each message: |I_large| in [0, n], k, ell + 1 and
  /// sigma_tilde / (delta u_tilde) given k.
  std::int64_t large_count_values() const { return inst_.n() + 1; }
  std::int64_t k_values() const { return static_cast<std::int64_t>(powers_.size()); }
  std::int64_t ell_values(std::int64_t k) const;
  /// Every infeasible A has sigma_steps <= ell + 1.
  std::int64_t sigma_values(std::int64_t ell) const;

  /// The c largest items in (size, index) descending order.
  ItemSet large_prefix(std::int64_t c) const { return prefix_[static_cast<std::size_t>(c)]; }
  /// Size of the smallest item in large_prefix(c), c >= 1.
  std::int64_t prefix_cutoff(std::int64_t c) const;

 private:
  KnapsackInstance inst_;
  Rational eps_;
  Rational alpha_;
  Rational delta_;
  std::vector<int> order_;
  std::vector<ItemSet> prefix_;
  std::vector<Rational> powers_;
  mutable std::mutex mu_;
  mutable std::map<std::uint64_t, Discretization> memo_;
};

/// Cache of Case A truncation circuits keyed by (|I_large|, threshold).
class TruncationCircuits {
 public:
  explicit TruncationCircuits(const Discretizer& disc) : disc_(disc) {}

  struct Entry {
    std::shared_ptr<const MonotoneCircuit> circuit;
    int depth;
  };

  /// nullptr when the truncation is constant (no KW game to play).
  const Entry* get(std::int64_t large_count, std::int64_t threshold) const;

 private:
  const Discretizer& disc_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::int64_t, std::int64_t>, Entry> cache_;
};

using KCTree = ProtocolTree<ItemSet, ItemSet>;

/// Protocol computing the weakened cover slack matrix in expectation.
/// Alice holds an infeasible set A, Bob a feasible set B.
///
/// Alice announces |I_large| (items sorted by (size, index) descending, so
/// I_large is a prefix), k, and ell + 1. Bob answers one case bit.
///   Case A: KW game on the truncation to I_large with threshold
///     ceil(D - delta_tilde) yields i* with i* not in A, i* in B; then Alice
///     samples i in [n] and outputs n(U - alpha U) at i*, otherwise
///     n s'_i b_i for i not in A (b_i sent by Bob).
///   Case B: Alice sends sigma_tilde, samples i in [n+2]; the two extra
///     exits output the Alice and Bob halves of the split slack.
class KCProtocol {
 public:
  KCProtocol(const KnapsackInstance& inst, const Rational& eps);

  const KCTree& tree() const { return root_; }
  const KnapsackInstance& instance() const;
  const Rational& epsilon() const;

  /// Memoized, thread-safe.
  const Discretization& discretization(ItemSet a) const;

  /// Upper bound on the bits exchanged on any path that Alice with input A
  /// can reach: message bits + 1 + max(Case A, Case B tail).
  int height_bound(ItemSet a) const;

  /// Truncation circuit Bob and Alice play KW on (cached).
  std::shared_ptr<const MonotoneCircuit> case_a_circuit(std::int64_t large_count, std::int64_t threshold) const;

  struct Context;

 private:
  std::shared_ptr<Context> ctx_;
  KCTree root_;
};

KCProtocol build_kc_protocol(const KnapsackInstance& inst, const Rational& eps);

}  // namespace kcef
