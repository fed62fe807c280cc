#include "kcef/kc_protocol.hpp"

#include <algorithm>
#include <numeric>

#include "kcef/kw.hpp"

namespace kcef {

namespace {

using P = Protocol<ItemSet, ItemSet>;

std::int64_t to_i64(const Integer& z) {
  if (!z.fits_slong_p()) throw InvariantViolation("integer does not fit in 64 bits: " + z.get_str());
  return z.get_si();
}

// (1+delta)^k for k = 0, 1, ... while the power stays <= limit.
std::vector<Rational> power_table(const Rational& delta, std::int64_t limit) {
  std::vector<Rational> powers{Rational(1)};
  const Rational base = 1 + delta;
  for (;;) {
    Rational next = powers.back() * base;
    if (next > limit) break;
    powers.push_back(std::move(next));
  }
  return powers;
}

// Items sorted by (size, index) descending.
std::vector<int> size_order(const KnapsackInstance& inst) {
  std::vector<int> order(static_cast<std::size_t>(inst.n()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (inst.size(x) != inst.size(y)) return inst.size(x) > inst.size(y);
    return x > y;
  });
  return order;
}

Discretization discretize_with(const KnapsackInstance& inst, ItemSet a, const Rational& eps,
                               const std::vector<Rational>& powers) {
  Discretization d;
  d.epsilon = eps;
  d.alpha = weakening_factor(eps);
  d.delta = eps / (6 + 2 * eps);
  d.residual = residual_and_clipped(inst, a).residual;
  d.split = split_items(inst, d.residual);
  d.large_count = d.split.i_large.size();
  d.large_in_a = inst.weight(a & d.split.i_large);
  d.small_in_a = inst.weight(a & d.split.i_small);

  auto above = std::upper_bound(powers.begin(), powers.end(), Rational(d.residual));
  d.k = (above - powers.begin()) - 1;
  d.u_tilde = powers[static_cast<std::size_t>(d.k)];

  const Rational x(inst.demand() - d.large_in_a);
  d.ell = to_i64(ceil((x / d.u_tilde - 1) / d.delta)) - 1;
  d.delta_tilde = (1 + d.ell * d.delta) * d.u_tilde;

  const Rational step = d.delta * d.u_tilde;
  d.sigma_steps = to_i64(floor(Rational(d.small_in_a) / step));
  d.sigma_tilde = d.sigma_steps * step;

  const bool ok = d.ell >= -1 && d.u_tilde <= d.residual && d.residual < d.u_tilde * (1 + d.delta) &&
                  d.delta_tilde < x && x <= d.delta_tilde + step && d.sigma_tilde <= d.small_in_a &&
                  d.small_in_a < d.sigma_tilde + step && d.sigma_steps <= d.ell + 1 &&
                  (1 - 2 * d.delta) * d.u_tilde - d.alpha * d.residual > 0;
  if (!ok) throw InvariantViolation("discretization invariants fail for A = " + a.to_string());
  return d;
}

}  // namespace

LargeSmallSplit split_items(const KnapsackInstance& inst, std::int64_t residual) {
  LargeSmallSplit s;
  for (int i = 0; i < inst.n(); ++i) {
    s = inst.size(i) >= residual ? LargeSmallSplit{s.i_large.with(i), s.i_small}
                                 : LargeSmallSplit{s.i_large, s.i_small.with(i)};
  }
  return s;
}

Discretization discretize(const KnapsackInstance& inst, ItemSet a, const Rational& eps) {
  check_epsilon(eps);
  return discretize_with(inst, a, eps, power_table(eps / (6 + 2 * eps), inst.demand()));
}

SlackCase case_of(const KnapsackInstance& inst, ItemSet b, const Discretization& disc) {
  return Rational(inst.weight(b & disc.split.i_large)) >= inst.demand() - disc.delta_tilde ? SlackCase::CaseA
                                                                                            : SlackCase::CaseB;
}

std::int64_t case_a_threshold(const KnapsackInstance& inst, const Discretization& disc) {
  return to_i64(ceil(inst.demand() - disc.delta_tilde));
}

Discretizer::Discretizer(const KnapsackInstance& inst, const Rational& eps)
    : inst_(inst), eps_(eps), alpha_(weakening_factor(eps)), delta_(eps / (6 + 2 * eps)) {
  check_epsilon(eps);
  order_ = size_order(inst_);
  prefix_.push_back(ItemSet{});
  for (int item : order_) prefix_.push_back(prefix_.back().with(item));
  powers_ = power_table(delta_, inst_.demand());
}

const Discretization& Discretizer::operator()(ItemSet a) const {
  std::lock_guard lock(mu_);
  auto it = memo_.find(a.bits());
  if (it == memo_.end()) it = memo_.emplace(a.bits(), discretize_with(inst_, a, eps_, powers_)).first;
  return it->second;
}

std::int64_t Discretizer::ell_values(std::int64_t k) const {
  return to_i64(ceil((inst_.demand() / power(k) - 1) / delta_)) + 1;
}

// sigma~ <= s(A & small) = x - U <= delta~ + delta U~ - U~ = (ell + 1) delta U~.
std::int64_t Discretizer::sigma_values(std::int64_t ell) const { return ell + 2; }

std::int64_t Discretizer::prefix_cutoff(std::int64_t c) const {
  return inst_.size(order_[static_cast<std::size_t>(c - 1)]);
}

const TruncationCircuits::Entry* TruncationCircuits::get(std::int64_t large_count, std::int64_t threshold) const {
  if (large_count == 0) return nullptr;
  std::lock_guard lock(mu_);
  auto key = std::make_pair(large_count, threshold);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    auto c = std::make_shared<const MonotoneCircuit>(
        build_truncation_circuit(disc_.instance(), disc_.prefix_cutoff(large_count), threshold));
    it = cache_.emplace(key, Entry{c, circuit_stats(*c).depth}).first;
  }
  return it->second.circuit->is_constant() ? nullptr : &it->second;
}

struct KCProtocol::Context : std::enable_shared_from_this<KCProtocol::Context> {
  KnapsackInstance inst;
  Rational eps;
  Rational alpha;
  Rational delta;
  std::int64_t n;
  Discretizer discretizer;
  TruncationCircuits circuits;
  using CachedCircuit = TruncationCircuits::Entry;

  Context(const KnapsackInstance& i, const Rational& e)
      : inst(i), eps(e), alpha(weakening_factor(e)), delta(e / (6 + 2 * e)), n(i.n()), discretizer(i, e),
        circuits(discretizer) {}

  const Discretization& disc(ItemSet a) const { return discretizer(a); }
  std::int64_t k_count() const { return discretizer.k_values(); }
  std::int64_t ell_count(std::int64_t k) const { return discretizer.ell_values(k); }
  std::int64_t sigma_count(std::int64_t ell) const { return discretizer.sigma_values(ell); }
  const CachedCircuit* circuit(std::int64_t c, std::int64_t t) const { return circuits.get(c, t); }
  const Rational& power(std::int64_t k) const { return discretizer.power(k); }
  ItemSet prefix(std::int64_t c) const { return discretizer.large_prefix(c); }

  std::shared_ptr<const Context> self() const { return shared_from_this(); }

  P::Ptr root() const {
    auto me = self();
    return P::alice_message(
        n + 1, [me](const ItemSet& a) { return me->disc(a).large_count; },
        [me](std::int64_t c) { return me->after_large(c); });
  }

  P::Ptr after_large(std::int64_t c) const {
    auto me = self();
    return P::alice_message(
        k_count(), [me](const ItemSet& a) { return me->disc(a).k; },
        [me, c](std::int64_t k) { return me->after_k(c, k); });
  }

  P::Ptr after_k(std::int64_t c, std::int64_t k) const {
    auto me = self();
    return P::alice_message(
        ell_count(k), [me](const ItemSet& a) { return me->disc(a).ell + 1; },
        [me, c, k](std::int64_t e) { return me->after_ell(c, k, e - 1); });
  }

  P::Ptr after_ell(std::int64_t c, std::int64_t k, std::int64_t ell) const {
    auto me = self();
    const Rational ut = power(k);
    const Rational delta_tilde = (1 + ell * delta) * ut;
    const Rational bar = inst.demand() - delta_tilde;
    const ItemSet large = prefix(c);
    return P::bob_bit([me, large, bar](const ItemSet& b) { return Rational(me->inst.weight(b & large)) < bar; },
                      [me, c, delta_tilde] { return me->case_a(c, delta_tilde); },
                      [me, c, k, ell] { return me->case_b(c, k, ell); });
  }

  P::Ptr case_a(std::int64_t c, const Rational& delta_tilde) const {
    const CachedCircuit* cc = circuit(c, to_i64(ceil(inst.demand() - delta_tilde)));
    if (cc == nullptr) return P::zero_leaf(Owner::Bob);  // no feasible B selects Case A here
    auto me = self();
    auto id = [](const ItemSet& s) { return s; };
    return kw_subtree<ItemSet, ItemSet>(cc->circuit, id, id, [me](int istar) { return me->case_a_tail(istar); });
  }

  P::Ptr case_a_tail(int istar) const {
    auto me = self();
    return P::uniform_gadget(Owner::Alice, n, [me, istar](std::int64_t e64) -> P::Ptr {
      const int e = static_cast<int>(e64);
      const Rational scale(me->n);
      if (e == istar) {
        return P::alice_leaf([me, scale](const ItemSet& a) -> Rational {
          const Discretization& d = me->disc(a);
          return scale * (d.residual - d.alpha * d.residual);
        });
      }
      return P::alice_bit(
          [e](const ItemSet& a) { return a.contains(e); },
          [me, e, scale] {
            return P::bob_bit([e](const ItemSet& b) { return b.contains(e); },
                              [] { return P::zero_leaf(Owner::Alice); },
                              [me, e, scale] {
                                return P::alice_leaf([me, e, scale](const ItemSet& a) -> Rational {
                                  return scale * std::min(me->inst.size(e), me->disc(a).residual);
                                });
                              });
          },
          [] { return P::zero_leaf(Owner::Alice); });
    });
  }

  P::Ptr case_b(std::int64_t c, std::int64_t k, std::int64_t ell) const {
    auto me = self();
    return P::alice_message(
        sigma_count(ell), [me](const ItemSet& a) { return me->disc(a).sigma_steps; },
        [me, c, k](std::int64_t m) { return me->case_b_tail(c, k, m); });
  }

  P::Ptr case_b_tail(std::int64_t c, std::int64_t k, std::int64_t steps) const {
    auto me = self();
    const Rational ut = power(k);
    const Rational sigma = steps * delta * ut;
    const Rational slack_unit = (1 - delta) * ut;
    const ItemSet small = prefix(c).complement(static_cast<int>(n));
    const Rational scale(n + 2);
    return P::uniform_gadget(Owner::Alice, n + 2, [=](std::int64_t e64) -> P::Ptr {
      if (e64 == me->n + 1) {
        return P::alice_leaf([=](const ItemSet& a) -> Rational {
          const Discretization& d = me->disc(a);
          return scale * (sigma - d.small_in_a + slack_unit - d.alpha * d.residual);
        });
      }
      if (e64 == me->n) {
        return P::bob_leaf([=](const ItemSet& b) -> Rational {
          return scale * (me->inst.weight(b & small) - sigma - slack_unit);
        });
      }
      const int e = static_cast<int>(e64);
      return P::bob_bit(
          [e](const ItemSet& b) { return b.contains(e); },
          [=] {
            return P::alice_leaf([=](const ItemSet& a) -> Rational {
              const Discretization& d = me->disc(a);
              return a.contains(e) && d.split.i_small.contains(e) ? Rational(scale * me->inst.size(e))
                                                                  : Rational(0);
            });
          },
          [=] {
            return P::alice_leaf([=](const ItemSet& a) -> Rational {
              const Discretization& d = me->disc(a);
              return !a.contains(e) && d.split.i_large.contains(e)
                         ? Rational(scale * std::min(me->inst.size(e), d.residual))
                         : Rational(0);
            });
          });
    });
  }

  int height_bound(ItemSet a) const {
    const Discretization& d = disc(a);
    int prefix_bits = ceil_log2(n + 1) + ceil_log2(k_count()) + ceil_log2(ell_count(d.k)) + 1;
    int tail_b = ceil_log2(sigma_count(d.ell)) + ceil_log2(n + 2) + 1;
    int tail_a = 0;
    if (const CachedCircuit* cc = circuit(d.large_count, case_a_threshold(inst, d)); cc != nullptr) {
      tail_a = cc->depth + ceil_log2(n) + 2;
    }
    return prefix_bits + std::max(tail_a, tail_b);
  }
};

KCProtocol::KCProtocol(const KnapsackInstance& inst, const Rational& eps) {
  check_epsilon(eps);
  ctx_ = std::make_shared<Context>(inst, eps);
  root_ = ctx_->root();
}

const KnapsackInstance& KCProtocol::instance() const { return ctx_->inst; }
const Rational& KCProtocol::epsilon() const { return ctx_->eps; }
const Discretization& KCProtocol::discretization(ItemSet a) const { return ctx_->disc(a); }
int KCProtocol::height_bound(ItemSet a) const { return ctx_->height_bound(a); }

std::shared_ptr<const MonotoneCircuit> KCProtocol::case_a_circuit(std::int64_t large_count,
                                                                  std::int64_t threshold) const {
  const auto* cc = ctx_->circuit(large_count, threshold);
  return cc == nullptr ? nullptr : cc->circuit;
}

KCProtocol build_kc_protocol(const KnapsackInstance& inst, const Rational& eps) { return KCProtocol(inst, eps); }

}  // namespace kcef
