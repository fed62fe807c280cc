#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <utility>

#include <gmpxx.h>

#include "kcef/rational.hpp"

namespace kcef {

enum class Owner : std::uint8_t { Alice, Bob };

inline const char* owner_name(Owner o) { return o == Owner::Alice ? "Alice" : "Bob"; }

enum class NodeKind : std::uint8_t { Branch, Leaf, Relabel };

/// Root-to-leaf path over branch nodes, '0' = left, '1' = right.
using LeafId = std::string;

/// One node of a two-party protocol tree over Alice input A and Bob input B.
///
/// Branch: the owner takes the left child with probability fn(own input).
/// Leaf: the owner outputs fn(own input) >= 0.
/// Relabel: the owner privately replaces its input by map(own input) and
/// continues in the single child. Relabels exchange no bits, so they neither
/// extend leaf paths nor count toward height.
///
/// Children are materialized on first access; expansion is thread-safe and
/// happens at most once per node.
template <class A, class B>
class ProtocolNode {
 public:
  using Ptr = std::shared_ptr<const ProtocolNode>;
  using Thunk = std::function<Ptr()>;

  NodeKind kind = NodeKind::Leaf;
  Owner owner = Owner::Alice;
  std::function<Rational(const A&)> alice_fn;
  std::function<Rational(const B&)> bob_fn;
  std::function<A(const A&)> alice_map;
  std::function<B(const B&)> bob_map;

  const Ptr& left() const {
    std::call_once(left_once_, [this] { left_ = make_left_(); });
    return left_;
  }
  const Ptr& right() const {
    std::call_once(right_once_, [this] { right_ = make_right_(); });
    return right_;
  }
  const Ptr& child() const { return left(); }

  /// Branch probability or leaf output of the owner on the given inputs.
  Rational owner_value(const A& a, const B& b) const {
    return owner == Owner::Alice ? alice_fn(a) : bob_fn(b);
  }

  Thunk make_left_;
  Thunk make_right_;

 private:
  mutable std::once_flag left_once_;
  mutable std::once_flag right_once_;
  mutable Ptr left_;
  mutable Ptr right_;
};

template <class A, class B>
using ProtocolTree = typename ProtocolNode<A, B>::Ptr;

/// Node factories for a fixed pair of input types.
template <class A, class B>
struct Protocol {
  using Node = ProtocolNode<A, B>;
  using Ptr = typename Node::Ptr;
  using Thunk = typename Node::Thunk;
  using AliceFn = std::function<Rational(const A&)>;
  using BobFn = std::function<Rational(const B&)>;

  static Ptr alice_leaf(AliceFn out) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Leaf;
    n->owner = Owner::Alice;
    n->alice_fn = std::move(out);
    return n;
  }

  static Ptr bob_leaf(BobFn out) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Leaf;
    n->owner = Owner::Bob;
    n->bob_fn = std::move(out);
    return n;
  }

  static Ptr zero_leaf(Owner owner = Owner::Alice) {
    return owner == Owner::Alice ? alice_leaf([](const A&) { return Rational(0); })
                                 : bob_leaf([](const B&) { return Rational(0); });
  }

  static Ptr alice_branch(AliceFn p_left, Thunk left, Thunk right) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Branch;
    n->owner = Owner::Alice;
    n->alice_fn = std::move(p_left);
    n->make_left_ = std::move(left);
    n->make_right_ = std::move(right);
    return n;
  }

  static Ptr bob_branch(BobFn p_left, Thunk left, Thunk right) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Branch;
    n->owner = Owner::Bob;
    n->bob_fn = std::move(p_left);
    n->make_left_ = std::move(left);
    n->make_right_ = std::move(right);
    return n;
  }

  static Ptr constant_branch(Owner owner, Rational p_left, Thunk left, Thunk right) {
    if (p_left < 0 || p_left > 1) throw InvariantViolation("branch probability outside [0,1]");
    if (owner == Owner::Alice) {
      return alice_branch([p_left](const A&) { return p_left; }, std::move(left), std::move(right));
    }
    return bob_branch([p_left](const B&) { return p_left; }, std::move(left), std::move(right));
  }

  static Ptr alice_relabel(std::function<A(const A&)> map, Thunk next) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Relabel;
    n->owner = Owner::Alice;
    n->alice_map = std::move(map);
    n->make_left_ = std::move(next);
    return n;
  }

  static Ptr bob_relabel(std::function<B(const B&)> map, Thunk next) {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::Relabel;
    n->owner = Owner::Bob;
    n->bob_map = std::move(map);
    n->make_left_ = std::move(next);
    return n;
  }

  /// Balanced sampling subtree with m exits, each reached with probability
  /// exactly 1/m; height ceil(log2 m). exit(i) builds the subtree for i.
  static Ptr uniform_gadget(Owner owner, std::int64_t m, std::function<Ptr(std::int64_t)> exit) {
    if (m < 1) throw DomainError("uniform gadget needs m >= 1");
    return gadget_range(owner, 0, m, std::make_shared<std::function<Ptr(std::int64_t)>>(std::move(exit)));
  }

  /// Deterministic message: the sender's value in [0, count) sent in
  /// ceil(log2 count) bits, most significant first. Unused codes end in a
  /// zero leaf of the sender.
  static Ptr alice_message(std::int64_t count, std::function<std::int64_t(const A&)> value,
                           std::function<Ptr(std::int64_t)> next) {
    return message<Owner::Alice>(count, std::move(value), std::move(next));
  }

  static Ptr bob_message(std::int64_t count, std::function<std::int64_t(const B&)> value,
                         std::function<Ptr(std::int64_t)> next) {
    return message<Owner::Bob>(count, std::move(value), std::move(next));
  }

  /// Single bit sent by Alice; left iff bit(a) is false.
  static Ptr alice_bit(std::function<bool(const A&)> bit, Thunk if_zero, Thunk if_one) {
    return alice_branch([bit = std::move(bit)](const A& a) { return Rational(bit(a) ? 0 : 1); },
                        std::move(if_zero), std::move(if_one));
  }

  static Ptr bob_bit(std::function<bool(const B&)> bit, Thunk if_zero, Thunk if_one) {
    return bob_branch([bit = std::move(bit)](const B& b) { return Rational(bit(b) ? 0 : 1); },
                      std::move(if_zero), std::move(if_one));
  }

 private:
  using ExitFn = std::shared_ptr<std::function<Ptr(std::int64_t)>>;

  static Ptr gadget_range(Owner owner, std::int64_t lo, std::int64_t hi, ExitFn exit) {
    const std::int64_t size = hi - lo;
    if (size == 1) return (*exit)(lo);
    const std::int64_t half = (size + 1) / 2;
    return constant_branch(
        owner, ratio(half, size),
        [=] { return gadget_range(owner, lo, lo + half, exit); },
        [=] { return gadget_range(owner, lo + half, hi, exit); });
  }

  template <Owner O, class In>
  static Ptr message_node(std::int64_t count, int bits, int level, std::int64_t prefix,
                          std::shared_ptr<std::function<std::int64_t(const In&)>> value,
                          std::shared_ptr<std::function<Ptr(std::int64_t)>> next) {
    if (level == bits) return (*next)(prefix);
    const int shift = bits - 1 - level;
    auto child = [=](std::int64_t bit) -> Thunk {
      const std::int64_t p = (prefix << 1) | bit;
      if ((p << shift) >= count) return [] { return zero_leaf(O); };
      return [=] { return message_node<O, In>(count, bits, level + 1, p, value, next); };
    };
    auto p_left = [=](const In& in) {
      const std::int64_t v = (*value)(in);
      if (v < 0 || v >= count) {
        throw InvariantViolation(std::string(owner_name(O)) + " message value " + std::to_string(v) +
                                 " outside [0," + std::to_string(count) + ")");
      }
      return Rational(((v >> shift) & 1) ? 0 : 1);
    };
    if constexpr (O == Owner::Alice) {
      return alice_branch(p_left, child(0), child(1));
    } else {
      return bob_branch(p_left, child(0), child(1));
    }
  }

  template <Owner O, class In>
  static Ptr message(std::int64_t count, std::function<std::int64_t(const In&)> value,
                     std::function<Ptr(std::int64_t)> next) {
    if (count < 1) throw DomainError("message needs at least one value");
    if (count == 1) return next(0);
    return message_node<O, In>(count, ceil_log2(count), 0, 0,
                               std::make_shared<std::function<std::int64_t(const In&)>>(std::move(value)),
                               std::make_shared<std::function<Ptr(std::int64_t)>>(std::move(next)));
  }
};

/// A leaf reached with positive probability on a concrete input pair.
struct LeafVisit {
  const LeafId& path;
  Owner owner;
  const Rational& alice_reach;  // product of Alice branch probabilities
  const Rational& bob_reach;    // product of Bob branch probabilities
  const Rational& output;
};

namespace detail {

[[noreturn]] inline void negative_leaf(const LeafId& path, Owner owner, const Rational& out) {
  throw InvariantViolation("negative leaf output " + to_string(out) + " at path '" + path + "' owned by " +
                           owner_name(owner));
}

template <class A, class B, class Fn>
void walk_pair(const typename ProtocolNode<A, B>::Ptr& node, const A& a, const B& b, LeafId& path,
               const Rational& pa, const Rational& pb, Fn& fn) {
  switch (node->kind) {
    case NodeKind::Leaf: {
      Rational out = node->owner_value(a, b);
      if (out < 0) negative_leaf(path, node->owner, out);
      fn(LeafVisit{path, node->owner, pa, pb, out});
      return;
    }
    case NodeKind::Relabel:
      if (node->owner == Owner::Alice) {
        walk_pair<A, B>(node->child(), node->alice_map(a), b, path, pa, pb, fn);
      } else {
        walk_pair<A, B>(node->child(), a, node->bob_map(b), path, pa, pb, fn);
      }
      return;
    case NodeKind::Branch: {
      const Rational p = node->owner_value(a, b);
      if (p < 0 || p > 1) {
        throw InvariantViolation("branch probability " + to_string(p) + " at path '" + path + "'");
      }
      const bool alice = node->owner == Owner::Alice;
      if (p > 0) {
        path.push_back('0');
        if (alice) {
          walk_pair<A, B>(node->left(), a, b, path, p == 1 ? pa : Rational(pa * p), pb, fn);
        } else {
          walk_pair<A, B>(node->left(), a, b, path, pa, p == 1 ? pb : Rational(pb * p), fn);
        }
        path.pop_back();
      }
      if (p < 1) {
        const Rational q = 1 - p;
        path.push_back('1');
        if (alice) {
          walk_pair<A, B>(node->right(), a, b, path, p == 0 ? pa : Rational(pa * q), pb, fn);
        } else {
          walk_pair<A, B>(node->right(), a, b, path, pa, p == 0 ? pb : Rational(pb * q), fn);
        }
        path.pop_back();
      }
      return;
    }
  }
}

}  // namespace detail

/// Calls fn(const LeafVisit&) for every leaf with positive reach probability.
/// Throws InvariantViolation on a negative output or an invalid probability.
template <class A, class B, class Fn>
void for_each_reached_leaf(const ProtocolTree<A, B>& root, const A& a, const B& b, Fn fn) {
  LeafId path;
  const Rational one(1);
  detail::walk_pair<A, B>(root, a, b, path, one, one, fn);
}

template <class A, class B>
Rational exact_expectation(const ProtocolTree<A, B>& root, const A& a, const B& b) {
  Rational total = 0;
  for_each_reached_leaf<A, B>(root, a, b, [&](const LeafVisit& v) {
    if (v.output != 0) total += v.alice_reach * v.bob_reach * v.output;
  });
  return total;
}

template <class A, class B>
std::map<LeafId, Rational> reach_distribution(const ProtocolTree<A, B>& root, const A& a, const B& b) {
  std::map<LeafId, Rational> out;
  for_each_reached_leaf<A, B>(root, a, b,
                              [&](const LeafVisit& v) { out.emplace(v.path, v.alice_reach * v.bob_reach); });
  return out;
}

/// Expectation together with shape statistics of the reached part.
struct PairReport {
  Rational expectation = 0;
  int max_path_length = 0;  // longest reached path, i.e. bits exchanged
  std::size_t reached_leaves = 0;
};

template <class A, class B>
PairReport analyze_pair(const ProtocolTree<A, B>& root, const A& a, const B& b) {
  PairReport r;
  for_each_reached_leaf<A, B>(root, a, b, [&](const LeafVisit& v) {
    if (v.output != 0) r.expectation += v.alice_reach * v.bob_reach * v.output;
    r.max_path_length = std::max(r.max_path_length, static_cast<int>(v.path.size()));
    ++r.reached_leaves;
  });
  return r;
}

namespace detail {

template <class A, class B>
void walk_alice(const typename ProtocolNode<A, B>::Ptr& node, const A& a, LeafId& path, const Rational& mass,
                std::map<LeafId, Rational>& out) {
  switch (node->kind) {
    case NodeKind::Leaf:
      if (node->owner == Owner::Alice) {
        Rational v = node->alice_fn(a);
        if (v < 0) negative_leaf(path, Owner::Alice, v);
        if (v != 0) out.emplace(path, mass * v);
      } else {
        out.emplace(path, mass);
      }
      return;
    case NodeKind::Relabel:
      walk_alice<A, B>(node->child(), node->owner == Owner::Alice ? node->alice_map(a) : a, path, mass, out);
      return;
    case NodeKind::Branch: {
      Rational pl = 1;
      Rational pr = 1;
      if (node->owner == Owner::Alice) {
        pl = node->alice_fn(a);
        if (pl < 0 || pl > 1) throw InvariantViolation("branch probability outside [0,1] at '" + path + "'");
        pr = 1 - pl;
      }
      if (pl > 0) {
        path.push_back('0');
        walk_alice<A, B>(node->left(), a, path, pl == 1 ? mass : Rational(mass * pl), out);
        path.pop_back();
      }
      if (pr > 0) {
        path.push_back('1');
        walk_alice<A, B>(node->right(), a, path, pr == 1 ? mass : Rational(mass * pr), out);
        path.pop_back();
      }
      return;
    }
  }
}

inline bool has_prefix_in(const std::set<LeafId>& filter, const LeafId& prefix) {
  auto it = filter.lower_bound(prefix);
  return it != filter.end() && it->compare(0, prefix.size(), prefix) == 0;
}

template <class A, class B>
void walk_bob(const typename ProtocolNode<A, B>::Ptr& node, const B& b, LeafId& path, const Rational& mass,
              const std::set<LeafId>* filter, std::map<LeafId, Rational>& out) {
  if (filter != nullptr && !has_prefix_in(*filter, path)) return;
  switch (node->kind) {
    case NodeKind::Leaf:
      if (node->owner == Owner::Bob) {
        Rational v = node->bob_fn(b);
        if (v < 0) negative_leaf(path, Owner::Bob, v);
        if (v != 0) out.emplace(path, mass * v);
      } else {
        out.emplace(path, mass);
      }
      return;
    case NodeKind::Relabel:
      walk_bob<A, B>(node->child(), node->owner == Owner::Bob ? node->bob_map(b) : b, path, mass, filter, out);
      return;
    case NodeKind::Branch: {
      Rational pl = 1;
      Rational pr = 1;
      if (node->owner == Owner::Bob) {
        pl = node->bob_fn(b);
        if (pl < 0 || pl > 1) throw InvariantViolation("branch probability outside [0,1] at '" + path + "'");
        pr = 1 - pl;
      }
      if (pl > 0) {
        path.push_back('0');
        walk_bob<A, B>(node->left(), b, path, pl == 1 ? mass : Rational(mass * pl), filter, out);
        path.pop_back();
      }
      if (pr > 0) {
        path.push_back('1');
        walk_bob<A, B>(node->right(), b, path, pr == 1 ? mass : Rational(mass * pr), filter, out);
        path.pop_back();
      }
      return;
    }
  }
}

}  // namespace detail

/// Alice's factor F[a, leaf]: product of Alice branch probabilities along the
/// path, times the leaf output when Alice owns the leaf. Bob nodes are
/// explored on both sides. Zero entries are omitted.
template <class A, class B>
std::map<LeafId, Rational> alice_factor(const ProtocolTree<A, B>& root, const A& a) {
  std::map<LeafId, Rational> out;
  LeafId path;
  detail::walk_alice<A, B>(root, a, path, Rational(1), out);
  return out;
}

/// Bob's factor V[leaf, b], the mirror image of alice_factor. With a filter,
/// only leaves in the filter are produced and only subtrees containing one
/// of them are explored.
template <class A, class B>
std::map<LeafId, Rational> bob_factor(const ProtocolTree<A, B>& root, const B& b,
                                      const std::set<LeafId>* filter = nullptr) {
  std::map<LeafId, Rational> out;
  LeafId path;
  detail::walk_bob<A, B>(root, b, path, Rational(1), filter, out);
  if (filter != nullptr) {
    for (auto it = out.begin(); it != out.end();) {
      it = filter->count(it->first) ? std::next(it) : out.erase(it);
    }
  }
  return out;
}

/// One run of the protocol with private coins drawn from rng. A branch with
/// probability num/den goes left iff a uniform integer below den is < num.
template <class A, class B>
Rational simulate(const ProtocolTree<A, B>& root, const A& a, const B& b, gmp_randclass& rng) {
  typename ProtocolNode<A, B>::Ptr node = root;
  A ca = a;
  B cb = b;
  LeafId path;
  for (;;) {
    switch (node->kind) {
      case NodeKind::Leaf: {
        Rational out = node->owner_value(ca, cb);
        if (out < 0) detail::negative_leaf(path, node->owner, out);
        return out;
      }
      case NodeKind::Relabel:
        if (node->owner == Owner::Alice) {
          ca = node->alice_map(ca);
        } else {
          cb = node->bob_map(cb);
        }
        node = node->child();
        break;
      case NodeKind::Branch: {
        const Rational p = node->owner_value(ca, cb);
        bool go_left;
        if (p == 1) {
          go_left = true;
        } else if (p == 0) {
          go_left = false;
        } else {
          mpz_class u = rng.get_z_range(p.get_den());
          go_left = u < p.get_num();
        }
        path.push_back(go_left ? '0' : '1');
        node = go_left ? node->left() : node->right();
        break;
      }
    }
  }
}

template <class A, class B>
Rational simulate(const ProtocolTree<A, B>& root, const A& a, const B& b, std::uint64_t seed) {
  gmp_randclass rng(gmp_randinit_mt);
  rng.seed(mpz_class(std::to_string(seed)));
  return simulate<A, B>(root, a, b, rng);
}

}  // namespace kcef
