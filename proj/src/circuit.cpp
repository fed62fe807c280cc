#include "kcef/circuit.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace kcef {

MonotoneCircuit::MonotoneCircuit(int n_inputs, std::vector<Gate> gates, int output)
    : n_inputs_(n_inputs), gates_(std::move(gates)), output_(output) {
  if (n_inputs_ < 0 || n_inputs_ > ItemSet::kMaxItems) throw InputError("bad circuit input count");
  if (output_ < 0 || output_ >= static_cast<int>(gates_.size())) {
    throw InputError("circuit output does not reference a gate");
  }
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    const int id = static_cast<int>(g);
    switch (gate.kind) {
      case GateKind::Input:
        if (gate.a < 0 || gate.a >= n_inputs_) throw InputError("input gate index out of range");
        break;
      case GateKind::ConstTrue:
      case GateKind::ConstFalse:
        break;
      case GateKind::And:
      case GateKind::Or:
        if (gate.a < 0 || gate.b < 0 || gate.a >= id || gate.b >= id) {
          throw InputError("gate " + std::to_string(id) + " operands must precede it");
        }
        break;
    }
  }
}

MonotoneCircuit MonotoneCircuit::constant(int n_inputs, bool value) {
  return MonotoneCircuit(n_inputs, {Gate{value ? GateKind::ConstTrue : GateKind::ConstFalse}}, 0);
}

bool MonotoneCircuit::is_constant() const {
  GateKind k = gate(output_).kind;
  return k == GateKind::ConstTrue || k == GateKind::ConstFalse;
}

std::vector<std::uint8_t> MonotoneCircuit::evaluate_all(ItemSet x) const {
  std::vector<std::uint8_t> v(gates_.size());
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    switch (gate.kind) {
      case GateKind::Input: v[g] = x.contains(gate.a); break;
      case GateKind::ConstTrue: v[g] = 1; break;
      case GateKind::ConstFalse: v[g] = 0; break;
      case GateKind::And: v[g] = v[static_cast<std::size_t>(gate.a)] & v[static_cast<std::size_t>(gate.b)]; break;
      case GateKind::Or: v[g] = v[static_cast<std::size_t>(gate.a)] | v[static_cast<std::size_t>(gate.b)]; break;
    }
  }
  return v;
}

bool MonotoneCircuit::evaluate(ItemSet x) const {
  return evaluate_all(x)[static_cast<std::size_t>(output_)] != 0;
}

bool MonotoneCircuit::evaluate(const std::vector<int>& x) const {
  if (x.size() != static_cast<std::size_t>(n_inputs_)) {
    throw InputError("circuit expects " + std::to_string(n_inputs_) + " inputs, got " +
                     std::to_string(x.size()));
  }
  return evaluate(ItemSet::from_bits(x));
}

std::string MonotoneCircuit::to_dot() const {
  std::ostringstream out;
  out << "digraph circuit {\n  rankdir=BT;\n";
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    const Gate& gate = gates_[g];
    out << "  g" << g << " [label=\"";
    switch (gate.kind) {
      case GateKind::Input: out << "x" << gate.a + 1; break;
      case GateKind::ConstTrue: out << "1"; break;
      case GateKind::ConstFalse: out << "0"; break;
      case GateKind::And: out << "AND"; break;
      case GateKind::Or: out << "OR"; break;
    }
    out << "\"" << (static_cast<int>(g) == output_ ? ", peripheries=2" : "") << "];\n";
    if (gate.kind == GateKind::And || gate.kind == GateKind::Or) {
      out << "  g" << gate.a << " -> g" << g << ";\n  g" << gate.b << " -> g" << g << ";\n";
    }
  }
  out << "}\n";
  return out.str();
}

CircuitStats circuit_stats(const MonotoneCircuit& c) {
  const auto& gates = c.gates();
  std::vector<int> depth(gates.size(), 0);
  for (std::size_t g = 0; g < gates.size(); ++g) {
    if (gates[g].kind == GateKind::And || gates[g].kind == GateKind::Or) {
      depth[g] = 1 + std::max(depth[static_cast<std::size_t>(gates[g].a)],
                              depth[static_cast<std::size_t>(gates[g].b)]);
    }
  }
  std::vector<std::uint8_t> live(gates.size(), 0);
  live[static_cast<std::size_t>(c.output())] = 1;
  int count = 0;
  for (std::size_t g = gates.size(); g-- > 0;) {
    if (!live[g]) continue;
    if (gates[g].kind == GateKind::And || gates[g].kind == GateKind::Or) {
      ++count;
      live[static_cast<std::size_t>(gates[g].a)] = 1;
      live[static_cast<std::size_t>(gates[g].b)] = 1;
    }
  }
  return CircuitStats{depth[static_cast<std::size_t>(c.output())], count};
}

void ThresholdSpec::validate() const {
  if (weights.size() > static_cast<std::size_t>(ItemSet::kMaxItems)) throw InputError("too many weights");
  for (std::int64_t w : weights) {
    if (w < 0) throw InputError("threshold weights must be nonnegative");
  }
  if (threshold < 0) throw InputError("threshold must be nonnegative");
}

bool ThresholdSpec::holds(ItemSet x) const {
  std::int64_t sum = 0;
  for (int i : x.indices()) sum += weights[static_cast<std::size_t>(i)];
  return sum >= threshold;
}

namespace {

// Hash-consing gate factory with constant folding and idempotence.
class GateFactory {
 public:
  int constant(bool value) {
    int& slot = value ? true_id_ : false_id_;
    if (slot < 0) slot = push(Gate{value ? GateKind::ConstTrue : GateKind::ConstFalse});
    return slot;
  }

  int input(int i) {
    auto [it, fresh] = inputs_.try_emplace(i, -1);
    if (fresh) it->second = push(Gate{GateKind::Input, i});
    return it->second;
  }

  int conj(int x, int y) { return binary(GateKind::And, x, y); }
  int disj(int x, int y) { return binary(GateKind::Or, x, y); }

  int disj_all(const std::vector<int>& terms, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return terms[lo];
    std::size_t mid = lo + (hi - lo + 1) / 2;
    return disj(disj_all(terms, lo, mid), disj_all(terms, mid, hi));
  }

  std::vector<Gate> take() { return std::move(gates_); }

 private:
  bool is(int g, GateKind k) const { return gates_[static_cast<std::size_t>(g)].kind == k; }

  int binary(GateKind kind, int x, int y) {
    const GateKind absorbing = kind == GateKind::And ? GateKind::ConstFalse : GateKind::ConstTrue;
    const GateKind neutral = kind == GateKind::And ? GateKind::ConstTrue : GateKind::ConstFalse;
    if (is(x, absorbing)) return x;
    if (is(y, absorbing)) return y;
    if (is(x, neutral)) return y;
    if (is(y, neutral)) return x;
    if (x == y) return x;
    if (x > y) std::swap(x, y);
    auto [it, fresh] = binaries_.try_emplace({kind, x, y}, -1);
    if (fresh) it->second = push(Gate{kind, x, y});
    return it->second;
  }

  int push(Gate g) {
    gates_.push_back(g);
    return static_cast<int>(gates_.size()) - 1;
  }

  std::vector<Gate> gates_;
  int true_id_ = -1;
  int false_id_ = -1;
  std::map<int, int> inputs_;
  std::map<std::tuple<GateKind, int, int>, int> binaries_;
};

class CountingSynthesis {
 public:
  CountingSynthesis(std::vector<int> items, std::vector<std::int64_t> weights)
      : items_(std::move(items)), weights_(std::move(weights)) {}

  int threshold(std::size_t lo, std::size_t hi, std::int64_t t) {
    if (t <= 0) return factory_.constant(true);
    const Block& blk = block(lo, hi);
    if (t > blk.total) return factory_.constant(false);
    t = blk.normalize(t);
    auto key = std::make_tuple(lo, hi, t);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    int result;
    if (hi - lo == 1) {
      result = factory_.input(items_[lo]);
    } else {
      const std::size_t mid = lo + (hi - lo + 1) / 2;
      const Block& left = block(lo, mid);
      const Block& right = block(mid, hi);
      std::vector<int> terms;
      std::int64_t last_right = -1;
      for (std::int64_t sigma = 0; sigma < t && sigma <= left.total; ++sigma) {
        if (!left.attainable[static_cast<std::size_t>(sigma)]) continue;
        const std::int64_t rest = t - sigma;
        if (rest > right.total) continue;
        const std::int64_t normalized = right.normalize(rest);
        // A smaller sigma with the same right-hand requirement dominates.
        if (normalized == last_right) continue;
        last_right = normalized;
        terms.push_back(factory_.conj(threshold(lo, mid, sigma), threshold(mid, hi, normalized)));
      }
      if (left.total >= t) terms.push_back(threshold(lo, mid, t));
      result = factory_.disj_all(terms, 0, terms.size());
    }
    memo_.emplace(key, result);
    return result;
  }

  std::vector<Gate> take_gates() { return factory_.take(); }
  GateFactory& factory() { return factory_; }

 private:
  struct Block {
    std::int64_t total = 0;
    std::vector<std::uint8_t> attainable;  // subset sums of the block
    std::vector<std::int64_t> next_up;     // smallest attainable sum >= t

    std::int64_t normalize(std::int64_t t) const { return next_up[static_cast<std::size_t>(t)]; }
  };

  const Block& block(std::size_t lo, std::size_t hi) {
    auto key = std::make_pair(lo, hi);
    if (auto it = blocks_.find(key); it != blocks_.end()) return it->second;
    Block b;
    for (std::size_t k = lo; k < hi; ++k) b.total += weights_[k];
    b.attainable.assign(static_cast<std::size_t>(b.total + 1), 0);
    b.attainable[0] = 1;
    std::int64_t reach = 0;
    for (std::size_t k = lo; k < hi; ++k) {
      const std::int64_t w = weights_[k];
      for (std::int64_t s = reach; s >= 0; --s) {
        if (b.attainable[static_cast<std::size_t>(s)]) b.attainable[static_cast<std::size_t>(s + w)] = 1;
      }
      reach += w;
    }
    b.next_up.assign(static_cast<std::size_t>(b.total + 1), b.total);
    std::int64_t up = b.total;
    for (std::int64_t s = b.total; s >= 0; --s) {
      if (b.attainable[static_cast<std::size_t>(s)]) up = s;
      b.next_up[static_cast<std::size_t>(s)] = up;
    }
    return blocks_.emplace(key, std::move(b)).first->second;
  }

  std::vector<int> items_;
  std::vector<std::int64_t> weights_;
  GateFactory factory_;
  std::map<std::pair<std::size_t, std::size_t>, Block> blocks_;
  std::map<std::tuple<std::size_t, std::size_t, std::int64_t>, int> memo_;
};

}  // namespace

MonotoneCircuit DivideAndConquerBuilder::build(const ThresholdSpec& spec) const {
  spec.validate();
  const int n = static_cast<int>(spec.weights.size());
  if (spec.threshold == 0) return MonotoneCircuit::constant(n, true);

  // Weights above T behave exactly like T.
  std::vector<int> items;
  std::vector<std::int64_t> clipped;
  std::int64_t total = 0;
  for (int i = 0; i < n; ++i) {
    const std::int64_t w = std::min(spec.weights[static_cast<std::size_t>(i)], spec.threshold);
    if (w == 0) continue;
    items.push_back(i);
    clipped.push_back(w);
    total += w;
  }
  if (total < spec.threshold) return MonotoneCircuit::constant(n, false);

  CountingSynthesis synth(items, clipped);
  const int out = synth.threshold(0, items.size(), spec.threshold);
  return MonotoneCircuit(n, synth.take_gates(), out);
}

MonotoneCircuit build_threshold_circuit(const ThresholdSpec& spec) {
  return DivideAndConquerBuilder{}.build(spec);
}

ThresholdSpec truncation_spec(const KnapsackInstance& inst, std::int64_t cutoff, std::int64_t threshold) {
  if (cutoff <= 0) throw DomainError("truncation cutoff must be positive");
  if (threshold <= 0) throw DomainError("truncation threshold must be positive");
  if (threshold > inst.demand()) {
    throw DomainError("truncation threshold " + std::to_string(threshold) + " exceeds demand " +
                      std::to_string(inst.demand()));
  }
  ThresholdSpec spec;
  spec.threshold = threshold;
  for (std::int64_t s : inst.sizes()) spec.weights.push_back(s >= cutoff ? s : 0);
  return spec;
}

MonotoneCircuit build_truncation_circuit(const KnapsackInstance& inst, std::int64_t cutoff,
                                         std::int64_t threshold, const ThresholdCircuitBuilder& builder) {
  return builder.build(truncation_spec(inst, cutoff, threshold));
}

}  // namespace kcef
