#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "kcef/kc_protocol.hpp"
#include "kcef/knapsack.hpp"

namespace kcef {

using SparseLeafVector = std::map<LeafId, Rational>;

/// F[A, .]: Alice-side reach times Alice leaf outputs.
SparseLeafVector row_vector(const KCProtocol& proto, ItemSet a);

/// V[., b]: Bob-side reach times Bob leaf outputs. With a filter only those
/// leaves are computed.
SparseLeafVector column_vector(const KCProtocol& proto, ItemSet b, const std::set<LeafId>* filter = nullptr);

/// Exact factorization of the full slack matrix over the leaves that carry
/// nonzero row mass.
struct Factorization {
  std::vector<ItemSet> rows;
  std::vector<ItemSet> cols;
  std::vector<LeafId> leaves;                           // r materialized leaves
  std::vector<std::map<std::size_t, Rational>> f;       // per row, leaf -> value
  std::vector<std::map<std::size_t, Rational>> v;       // per column, leaf -> value

  std::size_t rank() const { return leaves.size(); }
  Rational entry(std::size_t row, std::size_t col) const;
  std::size_t max_row_support() const;
};

Factorization factorize_full(const KCProtocol& proto, int cap = kDefaultEnumerationCap);

/// Dense F (rows x r) and V (r x cols).
std::vector<std::vector<Rational>> dense_f(const Factorization& fz);
std::vector<std::vector<Rational>> dense_v(const Factorization& fz);

/// Leaf ids in first-seen order; y indices 0..n-1 are the reserved
/// nonnegativity variables y_{e_i}, leaf j has y index n + j.
class LeafRegistry {
 public:
  std::size_t intern(const LeafId& id);
  std::size_t size() const { return ids_.size(); }
  const std::vector<LeafId>& ids() const { return ids_; }
  const std::set<LeafId>& as_set() const { return set_; }
  std::optional<std::size_t> find(const LeafId& id) const;

 private:
  std::vector<LeafId> ids_;
  std::map<LeafId, std::size_t> index_;
  std::set<LeafId> set_;
};

/// sum_i x_coeffs[i] x_i - constant = sum_j y_coeffs[j] y_j.
struct EFRow {
  ItemSet set;
  Rational constant;                      // alpha U
  std::vector<Rational> x_coeffs;         // s'_i for i not in A, else 0
  std::map<std::size_t, Rational> y_coeffs;  // keyed by y index
};

/// Extended formulation rows. The n nonnegativity rows x_i = y_{e_i} are
/// implicit and always present.
struct EFSystem {
  int n = 0;
  Rational epsilon;
  LeafRegistry leaves;
  std::vector<EFRow> rows;

  std::size_t y_dim() const { return static_cast<std::size_t>(n) + leaves.size(); }
  std::size_t leaf_y_index(std::size_t leaf) const { return static_cast<std::size_t>(n) + leaf; }
};

EFSystem empty_ef(const KCProtocol& proto);

/// Appends the row for A (DomainError if A is feasible); returns its position.
std::size_t append_ef_row(EFSystem& sys, const KCProtocol& proto, ItemSet a);

EFSystem emit_ef(const KCProtocol& proto, const std::vector<ItemSet>& rows);

/// Canonical lift of a feasible b: x = b, y_{e_i} = b_i, y_leaf = V[leaf, b].
struct LiftedPoint {
  std::vector<Rational> x;
  std::vector<Rational> y;  // dense, size y_dim()
};

LiftedPoint canonical_lift(const EFSystem& sys, const KCProtocol& proto, ItemSet b);

/// lhs - rhs of one row at (x, y); zero means satisfied.
Rational row_residual(const EFRow& row, const std::vector<Rational>& x, const std::vector<Rational>& y);

/// True if (x, y) satisfies every row including the nonnegativity rows and
/// y >= 0.
bool satisfies(const EFSystem& sys, const std::vector<Rational>& x, const std::vector<Rational>& y);

}  // namespace kcef
