#include "kcef/flow_cover.hpp"

#include <algorithm>
#include <numeric>

#include "kcef/kc_protocol.hpp"
#include "kcef/kw.hpp"

namespace kcef {

namespace {

using P = Protocol<FlowTuple, FlowSolution>;

std::int64_t to_i64(const Integer& z) {
  if (!z.fits_slong_p()) throw InvariantViolation("integer does not fit in 64 bits: " + z.get_str());
  return z.get_si();
}

void check_costs(const std::optional<std::vector<Rational>>& costs, std::size_t n, const char* what) {
  if (!costs) return;
  if (costs->size() != n) throw InputError(std::string(what) + " must have one entry per facility");
  for (const Rational& c : *costs) {
    if (c < 0) throw InputError(std::string(what) + " must be nonnegative");
  }
}

}  // namespace

FacilityInstance::FacilityInstance(std::vector<std::int64_t> capacities, std::int64_t demand,
                                   std::optional<std::vector<Rational>> open_costs,
                                   std::optional<std::vector<Rational>> unit_costs)
    : capacities_(std::move(capacities)),
      demand_(demand),
      open_costs_(std::move(open_costs)),
      unit_costs_(std::move(unit_costs)) {
  if (capacities_.empty()) throw InputError("facility instance needs at least one facility");
  if (capacities_.size() > static_cast<std::size_t>(ItemSet::kMaxItems)) {
    throw CapacityError("at most " + std::to_string(ItemSet::kMaxItems) + " facilities are supported");
  }
  if (demand_ <= 0) throw InputError("demand must be positive");
  std::int64_t total = 0;
  for (std::int64_t s : capacities_) {
    if (s <= 0) throw InputError("capacities must be positive");
    total += s;
  }
  if (total < demand_) throw InputError("total capacity is below the demand");
  check_costs(open_costs_, capacities_.size(), "open_costs");
  check_costs(unit_costs_, capacities_.size(), "unit_costs");
}

std::int64_t FacilityInstance::weight(ItemSet s) const {
  std::int64_t w = 0;
  for (int i : s.indices()) w += capacity(i);
  return w;
}

KnapsackInstance FacilityInstance::induced_knapsack() const {
  std::vector<std::int64_t> sizes;
  for (std::int64_t s : capacities_) sizes.push_back(std::min(s, demand_));
  return KnapsackInstance(std::move(sizes), demand_);
}

void check_solution(const FacilityInstance& inst, const FlowSolution& sol) {
  const auto n = static_cast<std::size_t>(inst.n());
  if (sol.x.size() != n) throw DomainError("solution has " + std::to_string(sol.x.size()) + " flow values");
  if (!sol.y.subset_of(ItemSet::full(inst.n()))) throw DomainError("solution opens a facility out of range");
  Rational sum = 0;
  for (int i = 0; i < inst.n(); ++i) {
    const Rational& xi = sol.x[static_cast<std::size_t>(i)];
    if (xi < 0) throw DomainError("negative flow at facility " + std::to_string(i + 1));
    const std::int64_t cap = sol.y.contains(i) ? inst.capacity(i) : 0;
    if (xi * inst.demand() > cap) throw DomainError("facility " + std::to_string(i + 1) + " exceeds its capacity");
    sum += xi;
  }
  if (sum != 1) throw DomainError("flows sum to " + to_string(sum) + ", not 1");
}

void check_tuple(const FacilityInstance& inst, const FlowTuple& t) {
  const ItemSet all = ItemSet::full(inst.n());
  if (!(t.a & t.f1).empty() || !(t.a & t.f2).empty() || !(t.f1 & t.f2).empty()) {
    throw DomainError("tuple parts overlap");
  }
  if ((t.a | t.f1 | t.f2) != all) throw DomainError("tuple parts do not cover every facility");
  if (inst.weight(t.a) >= inst.demand()) throw DomainError("tuple set A " + t.a.to_string() + " is feasible");
}

std::vector<FlowTuple> enumerate_tuples(const FacilityInstance& inst) {
  if (inst.n() > kDefaultEnumerationCap) throw CapacityError("tuple enumeration is capped at n = 16");
  std::vector<FlowTuple> out;
  const ItemSet all = ItemSet::full(inst.n());
  const std::uint64_t limit = std::uint64_t{1} << inst.n();
  for (std::uint64_t am = 0; am < limit; ++am) {
    const ItemSet a(am);
    if (inst.weight(a) >= inst.demand()) continue;
    const std::uint64_t rest = all.minus(a).bits();
    // All submasks of rest, ascending.
    for (std::uint64_t f1 = 0;; f1 = (f1 - rest) & rest) {
      out.push_back(FlowTuple{a, ItemSet(f1), ItemSet(rest & ~f1)});
      if (((f1 - rest) & rest) == 0) break;
    }
  }
  return out;
}

std::vector<FlowSolution> solution_grid(const FacilityInstance& inst, int steps) {
  if (steps < 1) throw InputError("grid needs at least one step");
  if (inst.n() > kDefaultEnumerationCap) throw CapacityError("solution grid is capped at n = 16");
  const auto n = static_cast<std::size_t>(inst.n());
  std::vector<FlowSolution> out;
  std::vector<int> units(n, 0);
  // Distributes the remaining units over facilities i.. in lexicographic order.
  auto place = [&](auto&& self, std::size_t i, int left) -> void {
    if (i == n) {
      if (left != 0) return;
      FlowSolution sol;
      ItemSet support;
      for (std::size_t k = 0; k < n; ++k) {
        sol.x.push_back(ratio(units[k], steps));
        if (units[k] > 0) support = support.with(static_cast<int>(k));
      }
      const ItemSet rest = support.complement(inst.n());
      for (std::uint64_t extra = rest.bits();; extra = (extra - 1) & rest.bits()) {
        sol.y = support | ItemSet(extra);
        out.push_back(sol);
        if (extra == 0) break;
      }
      return;
    }
    for (int u = 0; u <= left; ++u) {
      if (ratio(u, steps) * inst.demand() > inst.capacity(static_cast<int>(i))) break;
      units[i] = u;
      self(self, i + 1, left - u);
    }
    units[i] = 0;
  };
  place(place, 0, steps);
  return out;
}

Rational fci_slack(const FacilityInstance& inst, const FlowTuple& t, const FlowSolution& sol, const Rational& eps) {
  check_epsilon(eps);
  check_tuple(inst, t);
  check_solution(inst, sol);
  const std::int64_t u = inst.demand() - inst.weight(t.a);
  Rational lhs = 0;
  for (int i : (t.f1 & sol.y).indices()) lhs += std::min(inst.capacity(i), u);
  for (int i : (t.f2 & sol.y).indices()) lhs += sol.x[static_cast<std::size_t>(i)] * inst.demand();
  return lhs - weakening_factor(eps) * u;
}

SupportPartition partition_support(const FacilityInstance& inst, const FlowSolution& sol) {
  SupportPartition p;
  for (int i : sol.y.indices()) {
    const Rational xd = sol.x[static_cast<std::size_t>(i)] * inst.demand();
    if (xd == 0) {
      p.f3_t = p.f3_t.with(i);
    } else if (xd == inst.capacity(i)) {
      p.f1_t = p.f1_t.with(i);
    } else {
      p.f2_t = p.f2_t.with(i);
    }
  }
  return p;
}

bool is_canonical(const FacilityInstance& inst, const FlowSolution& sol) {
  return partition_support(inst, sol).f2_t.size() <= 1;
}

Rational gamma(const FacilityInstance& inst, const FlowTuple& t, const FlowSolution& sol, std::int64_t residual) {
  const ItemSet f2t = partition_support(inst, sol).f2_t;
  if (f2t.size() > 1) throw DomainError("gamma needs a canonical solution");
  if (f2t.empty()) return 0;
  const int j = f2t.indices().front();
  if (t.f1.contains(j)) return Rational(std::min(inst.capacity(j), residual));
  if (t.f2.contains(j)) return sol.x[static_cast<std::size_t>(j)] * inst.demand();
  return 0;
}

std::optional<TransferStep> transfer_step(const FacilityInstance& inst, const FlowSolution& sol) {
  const std::vector<int> interior = partition_support(inst, sol).f2_t.indices();
  if (interior.size() < 2) return std::nullopt;
  const auto p = static_cast<std::size_t>(interior[0]);
  const auto q = static_cast<std::size_t>(interior[1]);
  const Rational cap_p = ratio(inst.capacity(interior[0]), inst.demand());
  const Rational cap_q = ratio(inst.capacity(interior[1]), inst.demand());
  const Rational up = std::min(Rational(cap_p - sol.x[p]), sol.x[q]);
  const Rational down = std::min(sol.x[p], Rational(cap_q - sol.x[q]));
  TransferStep step{Rational(down / (up + down)), sol, sol};
  step.plus.x[p] += up;
  step.plus.x[q] -= up;
  step.minus.x[p] -= down;
  step.minus.x[q] += down;
  return step;
}

std::vector<std::pair<Rational, FlowSolution>> canonical_decompose(const FacilityInstance& inst,
                                                                   const FlowSolution& sol) {
  check_solution(inst, sol);
  std::vector<std::pair<Rational, FlowSolution>> out;
  std::vector<std::pair<Rational, FlowSolution>> stack{{Rational(1), sol}};
  while (!stack.empty()) {
    auto [w, z] = std::move(stack.back());
    stack.pop_back();
    auto step = transfer_step(inst, z);
    if (!step) {
      out.emplace_back(std::move(w), std::move(z));
      continue;
    }
    stack.emplace_back(w * (1 - step->weight), std::move(step->minus));
    stack.emplace_back(w * step->weight, std::move(step->plus));
  }
  return out;
}

struct FCIProtocol::Context : std::enable_shared_from_this<FCIProtocol::Context> {
  FacilityInstance inst;
  KnapsackInstance kinst;
  Rational eps;
  Rational alpha;
  Rational delta;
  std::int64_t n;
  Discretizer disc;
  TruncationCircuits circuits;

  Context(const FacilityInstance& i, const Rational& e)
      : inst(i),
        kinst(i.induced_knapsack()),
        eps(e),
        alpha(weakening_factor(e)),
        delta(e / (6 + 2 * e)),
        n(i.n()),
        disc(kinst, e),
        circuits(disc) {}

  std::shared_ptr<const Context> self() const { return shared_from_this(); }

  const Discretization& d(const FlowTuple& t) const { return disc(t.a); }
  std::int64_t size(int i) const { return kinst.size(i); }
  Rational served(const FlowSolution& sol, int i) const { return sol.x[static_cast<std::size_t>(i)] * kinst.demand(); }

  // Alice's coefficient of facility i: s'_i on F1, s_i on F2, 0 on A.
  Rational coeff(const FlowTuple& t, int i) const {
    if (t.f1.contains(i)) return Rational(std::min(size(i), d(t).residual));
    if (t.f2.contains(i)) return Rational(size(i));
    return 0;
  }

  static int class_of(const FlowTuple& t, int j) { return t.a.contains(j) ? 0 : t.f1.contains(j) ? 1 : 2; }

  // Alice's view of gamma once j and its class are known (Case 1 only).
  Rational alice_gamma(const FlowTuple& t, int j) const {
    return j >= 0 && t.f1.contains(j) ? Rational(std::min(size(j), d(t).residual)) : Rational(0);
  }

  SupportPartition part(const FlowSolution& sol) const { return partition_support(inst, sol); }

  P::Ptr root() const { return decomposition(0); }

  P::Ptr decomposition(std::int64_t level) const {
    if (level >= std::max<std::int64_t>(n - 1, 0)) return wrapper();
    auto me = self();
    P::Ptr next = decomposition(level + 1);
    return P::bob_branch(
        [me](const FlowSolution& sol) -> Rational {
          auto step = transfer_step(me->inst, sol);
          return step ? step->weight : Rational(1);
        },
        [me, next] {
          return P::bob_relabel(
              [me](const FlowSolution& sol) {
                auto step = transfer_step(me->inst, sol);
                return step ? step->plus : sol;
              },
              [next] { return next; });
        },
        [me, next] {
          return P::bob_relabel(
              [me](const FlowSolution& sol) {
                auto step = transfer_step(me->inst, sol);
                return step ? step->minus : sol;
              },
              [next] { return next; });
        });
  }

  P::Ptr wrapper() const {
    auto me = self();
    return P::constant_branch(
        Owner::Alice, ratio(1, 2), [me] { return me->closed_part(); },
        [me] {
          return P::bob_relabel(
              [me](const FlowSolution& sol) {
                FlowSolution out = sol;
                out.y = sol.y.minus(me->part(sol).f3_t);
                return out;
              },
              [me] { return me->main(2); });
        });
  }

  // s'(F1 & F~3), doubled.
  P::Ptr closed_part() const {
    auto me = self();
    return P::uniform_gadget(Owner::Bob, n, [me](std::int64_t e64) {
      const int e = static_cast<int>(e64);
      return P::bob_bit(
          [me, e](const FlowSolution& sol) { return me->part(sol).f3_t.contains(e); },
          [] { return P::zero_leaf(Owner::Bob); },
          [me, e] {
            return P::alice_leaf([me, e](const FlowTuple& t) -> Rational {
              return t.f1.contains(e) ? Rational(2 * me->n * std::min(me->size(e), me->d(t).residual)) : Rational(0);
            });
          });
    });
  }

  // Everything below runs on a canonical solution with F~3 = {}, so y is
  // the support F~1 + F~2.
  P::Ptr main(std::int64_t scale) const {
    auto me = self();
    return P::alice_message(
        disc.large_count_values(), [me](const FlowTuple& t) { return me->d(t).large_count; },
        [me, scale](std::int64_t c) {
          return P::alice_message(
              me->disc.k_values(), [me](const FlowTuple& t) { return me->d(t).k; },
              [me, scale, c](std::int64_t k) {
                return P::alice_message(
                    me->disc.ell_values(k), [me](const FlowTuple& t) { return me->d(t).ell + 1; },
                    [me, scale, c, k](std::int64_t e) { return me->announce(scale, c, k, e - 1); });
              });
        });
  }

  P::Ptr announce(std::int64_t scale, std::int64_t c, std::int64_t k, std::int64_t ell) const {
    auto me = self();
    return P::bob_bit(
        [me](const FlowSolution& sol) { return !me->part(sol).f2_t.empty(); },
        [me, scale, c, k, ell] { return me->case1(scale, c, k, ell, -1); },
        [me, scale, c, k, ell] {
          return P::bob_message(
              me->n,
              [me](const FlowSolution& sol) -> std::int64_t {
                const auto interior = me->part(sol).f2_t.indices();
                if (interior.size() != 1) throw InvariantViolation("flow solution is not canonical");
                return interior.front();
              },
              [me, scale, c, k, ell](std::int64_t j64) {
                const int j = static_cast<int>(j64);
                return P::alice_message(
                    3, [j](const FlowTuple& t) -> std::int64_t { return class_of(t, j); },
                    [me, scale, c, k, ell, j](std::int64_t cls) {
                      return cls == 2 ? me->case2(scale, c, k, ell, j) : me->case1(scale, c, k, ell, j);
                    });
              });
        });
  }

  Rational delta_tilde(std::int64_t k, std::int64_t ell) const { return (1 + ell * delta) * disc.power(k); }

  // Case 1: F~2 is empty or its element j lies in A + F1.
  P::Ptr case1(std::int64_t scale, std::int64_t c, std::int64_t k, std::int64_t ell, int j) const {
    auto me = self();
    const Rational dt = delta_tilde(k, ell);
    const Rational bar = kinst.demand() - dt;
    const ItemSet large = disc.large_prefix(c);
    return P::bob_bit(
        [me, large, bar](const FlowSolution& sol) { return Rational(me->kinst.weight(sol.y & large)) < bar; },
        [me, scale, c, dt, j] {
          return me->kw(c, dt, [](const FlowSolution& sol) { return sol.y; },
                        [me, scale, j](int istar) { return me->case1_hit(scale, istar, j); });
        },
        [me, scale, c, k, ell, j] {
          return me->send_sigma(ell, [me, scale, c, k, j](std::int64_t m) { return me->case1_split(scale, c, k, m, j); });
        });
  }

  P::Ptr kw(std::int64_t c, const Rational& dt, std::function<ItemSet(const FlowSolution&)> bob_bits,
            std::function<P::Ptr(int)> cont) const {
    const TruncationCircuits::Entry* entry = circuits.get(c, to_i64(ceil(kinst.demand() - dt)));
    if (entry == nullptr) return P::zero_leaf(Owner::Bob);
    return kw_subtree<FlowTuple, FlowSolution>(entry->circuit, [](const FlowTuple& t) { return t.a; },
                                               std::move(bob_bits), std::move(cont));
  }

  P::Ptr send_sigma(std::int64_t ell, std::function<P::Ptr(std::int64_t)> next) const {
    auto me = self();
    return P::alice_message(
        disc.sigma_values(ell), [me](const FlowTuple& t) { return me->d(t).sigma_steps; }, std::move(next));
  }

  // Exit e < n: Bob reports membership in F~1 (large e) or absence from the
  // support (small e); Alice pays her coefficient on a 1.
  P::Ptr item_exit(const Rational& mult, ItemSet large, int e) const {
    auto me = self();
    auto pay = [me, mult, large, e] {
      return P::alice_leaf([me, mult, large, e](const FlowTuple& t) -> Rational {
        if (large.contains(e)) return mult * me->coeff(t, e);
        return t.a.contains(e) ? Rational(mult * me->size(e)) : Rational(0);
      });
    };
    if (large.contains(e)) {
      return P::bob_bit([me, e](const FlowSolution& sol) { return me->part(sol).f1_t.contains(e); },
                        [] { return P::zero_leaf(Owner::Bob); }, pay);
    }
    return P::bob_bit([e](const FlowSolution& sol) { return !sol.y.contains(e); },
                      [] { return P::zero_leaf(Owner::Bob); }, pay);
  }

  // Exit e != i*: Bob reports e in F~1, Alice pays her coefficient.
  P::Ptr support_exit(const Rational& mult, int e) const {
    auto me = self();
    return P::bob_bit(
        [me, e](const FlowSolution& sol) { return me->part(sol).f1_t.contains(e); },
        [] { return P::zero_leaf(Owner::Bob); },
        [me, mult, e] {
          return P::alice_leaf([me, mult, e](const FlowTuple& t) -> Rational { return mult * me->coeff(t, e); });
        });
  }

  P::Ptr case1_hit(std::int64_t scale, int istar, int j) const {
    auto me = self();
    const Rational mult(scale * (n + 1));
    return P::uniform_gadget(Owner::Alice, n + 1, [me, mult, istar, j](std::int64_t e64) -> P::Ptr {
      const int e = static_cast<int>(e64);
      if (e64 == me->n) {
        return P::alice_leaf([me, mult, istar, j](const FlowTuple& t) -> Rational {
          const Rational own = istar == j ? Rational(0) : me->coeff(t, istar);
          return mult * (me->alice_gamma(t, j) + own - me->alpha * me->d(t).residual);
        });
      }
      if (e == istar) return P::zero_leaf(Owner::Alice);
      return me->support_exit(mult, e);
    });
  }

  // Shared tail of both split branches: exits n and n+1 carry the Bob and
  // Alice halves around sigma_tilde; Bob's half adds bob_extra.
  P::Ptr split_exit(const Rational& mult, std::int64_t k, std::int64_t steps, ItemSet small, std::int64_t which,
                    std::function<Rational(const FlowSolution&)> bob_extra) const {
    auto me = self();
    const Rational ut = disc.power(k);
    const Rational sigma = steps * delta * ut;
    const Rational unit = (1 - delta) * ut;
    if (which == 0) {
      return P::bob_leaf([me, mult, small, sigma, unit, bob_extra](const FlowSolution& sol) -> Rational {
        const Rational full(me->kinst.weight(me->part(sol).f1_t & small));
        return mult * (full - sigma - unit + bob_extra(sol));
      });
    }
    return P::alice_leaf([me, mult, sigma, unit](const FlowTuple& t) -> Rational {
      const Discretization& dd = me->d(t);
      return mult * (sigma + unit - me->alpha * dd.residual - dd.small_in_a);
    });
  }

  P::Ptr case1_split(std::int64_t scale, std::int64_t c, std::int64_t k, std::int64_t steps, int j) const {
    auto me = self();
    const Rational mult(scale * (n + 3));
    const ItemSet large = disc.large_prefix(c);
    const ItemSet small = large.complement(static_cast<int>(n));
    return P::uniform_gadget(Owner::Alice, n + 3, [=](std::int64_t e64) -> P::Ptr {
      if (e64 < me->n) return me->item_exit(mult, large, static_cast<int>(e64));
      if (e64 == me->n) {
        return me->split_exit(mult, k, steps, small, 0, [me, small](const FlowSolution& sol) -> Rational {
          Rational x = 0;
          for (int i : (me->part(sol).f2_t & small).indices()) x += me->served(sol, i);
          return x;
        });
      }
      if (e64 == me->n + 1) return me->split_exit(mult, k, steps, small, 1, nullptr);
      if (j >= 0 && small.contains(j)) {
        return P::bob_leaf([me, mult, j](const FlowSolution& sol) -> Rational {
          return mult * (me->size(j) - me->served(sol, j));
        });
      }
      return P::alice_leaf([me, mult, j](const FlowTuple& t) -> Rational { return mult * me->alice_gamma(t, j); });
    });
  }

  // Case 2: F~2 = {j} with j in F2.
  P::Ptr case2(std::int64_t scale, std::int64_t c, std::int64_t k, std::int64_t ell, int j) const {
    auto me = self();
    const Rational dt = delta_tilde(k, ell);
    const Rational bar = kinst.demand() - dt;
    const ItemSet large = disc.large_prefix(c);
    return P::bob_bit(
        [me, large, bar](const FlowSolution& sol) {
          return Rational(me->kinst.weight(me->part(sol).f1_t & large)) < bar;
        },
        [me, scale, c, dt, j] {
          return me->kw(c, dt, [me](const FlowSolution& sol) { return me->part(sol).f1_t; },
                        [me, scale, j](int istar) { return me->case2_hit(scale, istar, j); });
        },
        [me, scale, c, k, ell, j] {
          return me->send_sigma(ell, [me, scale, c, k, j](std::int64_t m) { return me->case2_split(scale, c, k, m, j); });
        });
  }

  P::Ptr case2_hit(std::int64_t scale, int istar, int j) const {
    auto me = self();
    const Rational mult(scale * (n + 2));
    return P::uniform_gadget(Owner::Alice, n + 2, [me, mult, istar, j](std::int64_t e64) -> P::Ptr {
      const int e = static_cast<int>(e64);
      if (e64 == me->n) {
        return P::alice_leaf([me, mult, istar](const FlowTuple& t) -> Rational {
          return mult * (me->coeff(t, istar) - me->alpha * me->d(t).residual);
        });
      }
      if (e64 == me->n + 1) {
        return P::bob_leaf([me, mult, j](const FlowSolution& sol) -> Rational { return mult * me->served(sol, j); });
      }
      if (e == istar) return P::zero_leaf(Owner::Alice);
      return me->support_exit(mult, e);
    });
  }

  P::Ptr case2_split(std::int64_t scale, std::int64_t c, std::int64_t k, std::int64_t steps, int j) const {
    auto me = self();
    const Rational mult(scale * (n + 2));
    const ItemSet large = disc.large_prefix(c);
    const ItemSet small = large.complement(static_cast<int>(n));
    return P::uniform_gadget(Owner::Alice, n + 2, [=](std::int64_t e64) -> P::Ptr {
      if (e64 < me->n) return me->item_exit(mult, large, static_cast<int>(e64));
      if (e64 == me->n) {
        return me->split_exit(mult, k, steps, small, 0,
                              [me, j](const FlowSolution& sol) -> Rational { return me->served(sol, j); });
      }
      return me->split_exit(mult, k, steps, small, 1, nullptr);
    });
  }
};

FCIProtocol::FCIProtocol(const FacilityInstance& inst, const Rational& eps) {
  check_epsilon(eps);
  ctx_ = std::make_shared<Context>(inst, eps);
  root_ = ctx_->root();
}

const FacilityInstance& FCIProtocol::instance() const { return ctx_->inst; }
const Rational& FCIProtocol::epsilon() const { return ctx_->eps; }

FCIProtocol build_fci_protocol(const FacilityInstance& inst, const Rational& eps) { return FCIProtocol(inst, eps); }

}  // namespace kcef
