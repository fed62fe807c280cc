#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <unordered_map>
#include <vector>

#include "kcef/circuit.hpp"
#include "kcef/protocol_tree.hpp"

namespace kcef {

namespace detail {

struct KWContext {
  std::shared_ptr<const MonotoneCircuit> circuit;
  std::uint64_t id;

  explicit KWContext(std::shared_ptr<const MonotoneCircuit> c) : circuit(std::move(c)), id(next_id()) {}

  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{0};
    return ++counter;
  }

  /// Gate values on x, cached per thread since every node on a KW path
  /// evaluates the same circuit on the same input.
  const std::vector<std::uint8_t>& values(ItemSet x) const {
    struct Key {
      std::uint64_t id, bits;
      bool operator==(const Key&) const = default;
    };
    struct Hash {
      std::size_t operator()(const Key& k) const { return std::hash<std::uint64_t>{}(k.id * 0x9e3779b97f4a7c15ULL ^ k.bits); }
    };
    thread_local std::unordered_map<Key, std::vector<std::uint8_t>, Hash> cache;
    Key key{id, x.bits()};
    if (auto it = cache.find(key); it != cache.end()) return it->second;
    if (cache.size() > 4096) cache.clear();
    return cache.emplace(key, circuit->evaluate_all(x)).first->second;
  }
};

template <class A, class B>
typename Protocol<A, B>::Ptr kw_node(const std::shared_ptr<const KWContext>& ctx, int g,
                                     const std::function<ItemSet(const A&)>& alice_bits,
                                     const std::function<ItemSet(const B&)>& bob_bits,
                                     const std::function<typename Protocol<A, B>::Ptr(int)>& cont) {
  using P = Protocol<A, B>;
  const Gate& gate = ctx->circuit->gate(g);
  switch (gate.kind) {
    case GateKind::Input:
      return cont(gate.a);
    case GateKind::ConstTrue:
    case GateKind::ConstFalse:
      return P::zero_leaf(Owner::Alice);
    case GateKind::And: {
      // Alice keeps the invariant "current gate is 0 on a".
      const int left = gate.a;
      return P::alice_branch(
          [ctx, left, alice_bits](const A& a) { return Rational(ctx->values(alice_bits(a))[left] == 0 ? 1 : 0); },
          [=] { return kw_node<A, B>(ctx, gate.a, alice_bits, bob_bits, cont); },
          [=] { return kw_node<A, B>(ctx, gate.b, alice_bits, bob_bits, cont); });
    }
    case GateKind::Or: {
      // Bob keeps "current gate is 1 on b".
      const int left = gate.a;
      return P::bob_branch(
          [ctx, left, bob_bits](const B& b) { return Rational(ctx->values(bob_bits(b))[left] == 1 ? 1 : 0); },
          [=] { return kw_node<A, B>(ctx, gate.a, alice_bits, bob_bits, cont); },
          [=] { return kw_node<A, B>(ctx, gate.b, alice_bits, bob_bits, cont); });
    }
  }
  throw InvariantViolation("unknown gate kind");
}

}  // namespace detail

/// Karchmer-Wigderson game tree of a monotone circuit g. For g(a) = 0 and
/// g(b) = 1, where a = alice_bits(Alice input) and b = bob_bits(Bob input),
/// play reaches cont(i) for an index with a_i = 0 and b_i = 1. The path
/// length is at most the circuit depth. Constant circuits are rejected.
template <class A, class B>
typename Protocol<A, B>::Ptr kw_subtree(std::shared_ptr<const MonotoneCircuit> circuit,
                                        std::function<ItemSet(const A&)> alice_bits,
                                        std::function<ItemSet(const B&)> bob_bits,
                                        std::function<typename Protocol<A, B>::Ptr(int)> cont) {
  if (circuit->is_constant()) throw DomainError("KW game on a constant circuit has no separating index");
  auto ctx = std::make_shared<const detail::KWContext>(std::move(circuit));
  return detail::kw_node<A, B>(ctx, ctx->circuit->output(), alice_bits, bob_bits, cont);
}

}  // namespace kcef
