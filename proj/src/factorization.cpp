#include "kcef/factorization.hpp"

namespace kcef {

SparseLeafVector row_vector(const KCProtocol& proto, ItemSet a) {
  if (proto.instance().is_feasible(a)) throw DomainError("row " + a.to_string() + " is feasible");
  return alice_factor<ItemSet, ItemSet>(proto.tree(), a);
}

SparseLeafVector column_vector(const KCProtocol& proto, ItemSet b, const std::set<LeafId>* filter) {
  if (!proto.instance().is_feasible(b)) throw DomainError("column " + b.to_string() + " is infeasible");
  return bob_factor<ItemSet, ItemSet>(proto.tree(), b, filter);
}

Rational Factorization::entry(std::size_t row, std::size_t col) const {
  Rational sum = 0;
  const auto& fr = f[row];
  const auto& vc = v[col];
  // Walk the sparser side.
  if (fr.size() <= vc.size()) {
    for (const auto& [leaf, val] : fr) {
      if (auto it = vc.find(leaf); it != vc.end()) sum += val * it->second;
    }
  } else {
    for (const auto& [leaf, val] : vc) {
      if (auto it = fr.find(leaf); it != fr.end()) sum += val * it->second;
    }
  }
  return sum;
}

std::size_t Factorization::max_row_support() const {
  std::size_t m = 0;
  for (const auto& row : f) m = std::max(m, row.size());
  return m;
}

Factorization factorize_full(const KCProtocol& proto, int cap) {
  RowsAndColumns rc = enumerate_rows_and_columns(proto.instance(), cap);
  Factorization fz;
  fz.rows = rc.infeasible;
  fz.cols = rc.feasible;
  LeafRegistry reg;
  for (ItemSet a : fz.rows) {
    std::map<std::size_t, Rational> row;
    for (auto& [leaf, val] : row_vector(proto, a)) row.emplace(reg.intern(leaf), val);
    fz.f.push_back(std::move(row));
  }
  for (ItemSet b : fz.cols) {
    std::map<std::size_t, Rational> col;
    for (auto& [leaf, val] : column_vector(proto, b, &reg.as_set())) col.emplace(*reg.find(leaf), val);
    fz.v.push_back(std::move(col));
  }
  fz.leaves = reg.ids();
  return fz;
}

std::vector<std::vector<Rational>> dense_f(const Factorization& fz) {
  std::vector<std::vector<Rational>> out(fz.rows.size(), std::vector<Rational>(fz.rank()));
  for (std::size_t i = 0; i < fz.f.size(); ++i) {
    for (const auto& [leaf, val] : fz.f[i]) out[i][leaf] = val;
  }
  return out;
}

std::vector<std::vector<Rational>> dense_v(const Factorization& fz) {
  std::vector<std::vector<Rational>> out(fz.rank(), std::vector<Rational>(fz.cols.size()));
  for (std::size_t j = 0; j < fz.v.size(); ++j) {
    for (const auto& [leaf, val] : fz.v[j]) out[leaf][j] = val;
  }
  return out;
}

std::size_t LeafRegistry::intern(const LeafId& id) {
  auto [it, fresh] = index_.try_emplace(id, ids_.size());
  if (fresh) {
    ids_.push_back(id);
    set_.insert(id);
  }
  return it->second;
}

std::optional<std::size_t> LeafRegistry::find(const LeafId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

EFSystem empty_ef(const KCProtocol& proto) {
  EFSystem sys;
  sys.n = proto.instance().n();
  sys.epsilon = proto.epsilon();
  return sys;
}

std::size_t append_ef_row(EFSystem& sys, const KCProtocol& proto, ItemSet a) {
  const KnapsackInstance& inst = proto.instance();
  WeakenedKCRow kc = WeakenedKCRow::make(inst, a, proto.epsilon());
  EFRow row;
  row.set = a;
  row.constant = kc.rhs;
  for (std::int64_t s : kc.clipped_sizes) row.x_coeffs.emplace_back(s);
  for (auto& [leaf, val] : row_vector(proto, a)) {
    row.y_coeffs.emplace(sys.leaf_y_index(sys.leaves.intern(leaf)), val);
  }
  sys.rows.push_back(std::move(row));
  return sys.rows.size() - 1;
}

EFSystem emit_ef(const KCProtocol& proto, const std::vector<ItemSet>& rows) {
  EFSystem sys = empty_ef(proto);
  for (ItemSet a : rows) append_ef_row(sys, proto, a);
  return sys;
}

LiftedPoint canonical_lift(const EFSystem& sys, const KCProtocol& proto, ItemSet b) {
  LiftedPoint p;
  p.x.assign(static_cast<std::size_t>(sys.n), Rational(0));
  p.y.assign(sys.y_dim(), Rational(0));
  for (int i : b.indices()) {
    p.x[static_cast<std::size_t>(i)] = 1;
    p.y[static_cast<std::size_t>(i)] = 1;
  }
  for (auto& [leaf, val] : column_vector(proto, b, &sys.leaves.as_set())) {
    p.y[sys.leaf_y_index(*sys.leaves.find(leaf))] = val;
  }
  return p;
}

Rational row_residual(const EFRow& row, const std::vector<Rational>& x, const std::vector<Rational>& y) {
  Rational r = -row.constant;
  for (std::size_t i = 0; i < row.x_coeffs.size(); ++i) {
    if (row.x_coeffs[i] != 0) r += row.x_coeffs[i] * x[i];
  }
  for (const auto& [j, c] : row.y_coeffs) r -= c * y[j];
  return r;
}

bool satisfies(const EFSystem& sys, const std::vector<Rational>& x, const std::vector<Rational>& y) {
  if (x.size() != static_cast<std::size_t>(sys.n) || y.size() != sys.y_dim()) {
    throw InputError("point has wrong dimension");
  }
  for (const Rational& v : y) {
    if (v < 0) return false;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) return false;
  }
  for (const EFRow& row : sys.rows) {
    if (row_residual(row, x, y) != 0) return false;
  }
  return true;
}

}  // namespace kcef
