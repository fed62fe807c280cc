#include "kcef/lp.hpp"

#include <optional>
#include <set>

namespace kcef {

const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::Optimal: return "optimal";
    case LPStatus::Infeasible: return "infeasible";
    case LPStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  // Rows [M | I | rhs]; artificial columns follow the structural ones.
  explicit Tableau(const StandardForm& lp)
      : rows_(lp.rhs.size()), cols_(lp.cost.size()), n_art_(rows_) {
    t_.assign(rows_, std::vector<Rational>(cols_ + rows_ + 1));
    for (std::size_t r = 0; r < rows_; ++r) {
      const bool flip = lp.rhs[r] < 0;
      for (std::size_t c = 0; c < cols_; ++c) t_[r][c] = flip ? Rational(-lp.m[r][c]) : lp.m[r][c];
      t_[r][cols_ + r] = 1;
      t_[r][rhs_col()] = flip ? Rational(-lp.rhs[r]) : lp.rhs[r];
    }
    basis_.resize(rows_);
    for (std::size_t r = 0; r < rows_; ++r) basis_[r] = cols_ + r;
    active_.assign(cols_ + rows_, 1);
  }

  std::size_t rhs_col() const { return cols_ + n_art_; }

  // Minimizes cost over the active columns from the current basis.
  // Returns false when unbounded.
  bool optimize(const std::vector<Rational>& cost) {
    for (;;) {
      std::vector<Rational> reduced = reduced_costs(cost);
      std::optional<std::size_t> enter;
      for (std::size_t c = 0; c < cols_ + n_art_; ++c) {
        if (active_[c] && !is_basic(c) && reduced[c] < 0) {
          enter = c;
          break;
        }
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      Rational best;
      for (std::size_t r = 0; r < rows_; ++r) {
        const Rational& a = t_[r][*enter];
        if (a <= 0) continue;
        Rational ratio = t_[r][rhs_col()] / a;
        if (!leave || ratio < best || (ratio == best && basis_[r] < basis_[*leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  }

  std::vector<Rational> reduced_costs(const std::vector<Rational>& cost) const {
    std::vector<Rational> reduced(cost);
    reduced.resize(cols_ + n_art_ + 1);
    for (std::size_t r = 0; r < rows_; ++r) {
      const Rational& cb = cost[basis_[r]];
      if (cb == 0) continue;
      for (std::size_t c = 0; c <= rhs_col(); ++c) {
        if (t_[r][c] != 0) reduced[c] -= cb * t_[r][c];
      }
    }
    return reduced;  // reduced[rhs_col()] = -objective
  }

  // Removes artificial variables from the basis after phase 1; rows whose
  // structural part vanished are redundant and dropped.
  void expel_artificials() {
    for (std::size_t r = 0; r < rows_;) {
      if (basis_[r] < cols_) {
        ++r;
        continue;
      }
      std::optional<std::size_t> col;
      for (std::size_t c = 0; c < cols_; ++c) {
        if (t_[r][c] != 0) {
          col = c;
          break;
        }
      }
      if (col) {
        pivot(r, *col);
        ++r;
      } else {
        t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r));
        basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
        --rows_;
      }
    }
    for (std::size_t c = cols_; c < active_.size(); ++c) active_[c] = 0;
  }

  bool is_basic(std::size_t c) const {
    for (std::size_t b : basis_) {
      if (b == c) return true;
    }
    return false;
  }

  std::vector<Rational> solution() const {
    std::vector<Rational> z(cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] < cols_) z[basis_[r]] = t_[r][rhs_col()];
    }
    return z;
  }

  std::size_t structural() const { return cols_; }
  int pivots() const { return pivots_; }

 private:
  void pivot(std::size_t pr, std::size_t pc) {
    ++pivots_;
    std::vector<Rational>& prow = t_[pr];
    const Rational inv = 1 / prow[pc];
    std::vector<std::size_t> nz;
    for (std::size_t c = 0; c < prow.size(); ++c) {
      if (prow[c] != 0) {
        prow[c] *= inv;
        nz.push_back(c);
      }
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr || t_[r][pc] == 0) continue;
      const Rational f = t_[r][pc];
      for (std::size_t c : nz) t_[r][c] -= f * prow[c];
    }
    basis_[pr] = pc;
  }

  std::size_t rows_;
  std::size_t cols_;
  std::size_t n_art_;  // artificial columns keep their slots when rows drop
  std::vector<std::vector<Rational>> t_;
  std::vector<std::size_t> basis_;
  std::vector<std::uint8_t> active_;
  int pivots_ = 0;
};

}  // namespace

StandardResult solve_standard(const StandardForm& lp) {
  const std::size_t m = lp.rhs.size();
  const std::size_t n = lp.cost.size();
  for (const auto& row : lp.m) {
    if (row.size() != n) throw InputError("standard-form row has wrong width");
  }
  if (lp.m.size() != m) throw InputError("standard-form row count mismatch");

  StandardResult res;
  Tableau tab(lp);

  std::vector<Rational> phase1(n + m, Rational(0));
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = 1;
  tab.optimize(phase1);
  if (tab.reduced_costs(phase1).back() != 0) {
    res.status = LPStatus::Infeasible;
    res.pivots = tab.pivots();
    return res;
  }
  tab.expel_artificials();

  std::vector<Rational> phase2(lp.cost);
  phase2.resize(n + m, Rational(0));
  if (!tab.optimize(phase2)) {
    res.status = LPStatus::Unbounded;
    res.pivots = tab.pivots();
    return res;
  }
  res.status = LPStatus::Optimal;
  res.z = tab.solution();
  res.value = 0;
  for (std::size_t c = 0; c < n; ++c) res.value += lp.cost[c] * res.z[c];
  std::vector<Rational> reduced = tab.reduced_costs(phase2);
  res.reduced_costs.assign(reduced.begin(), reduced.begin() + static_cast<std::ptrdiff_t>(n));
  res.pivots = tab.pivots();
  return res;
}

namespace {

struct Presolved {
  std::vector<std::uint8_t> x_nonneg;
  std::vector<std::uint8_t> row_dropped;
  // Substituted x_i = ratio * y_j.
  std::map<std::size_t, std::pair<std::size_t, Rational>> x_from_y;
};

Presolved presolve(const LinearProgram& lp) {
  Presolved p;
  p.x_nonneg.assign(lp.n_x, 0);
  p.row_dropped.assign(lp.rows.size(), 0);
  std::vector<int> y_uses(lp.n_y, 0);
  for (const auto& row : lp.rows) {
    for (const auto& [j, f] : row.y) {
      if (f != 0) ++y_uses[j];
    }
  }
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    const auto& row = lp.rows[r];
    if (row.x.size() != 1 || row.y.size() != 1 || row.b != 0) continue;
    const auto& [i, a] = *row.x.begin();
    const auto& [j, f] = *row.y.begin();
    if (a <= 0 || f <= 0 || y_uses[j] != 1 || p.x_nonneg[i]) continue;
    p.x_nonneg[i] = 1;
    p.row_dropped[r] = 1;
    p.x_from_y.emplace(i, std::make_pair(j, Rational(a / f)));
  }
  return p;
}

}  // namespace

LPResult solve_lp(const LinearProgram& lp) {
  if (lp.cost.size() != lp.n_x) throw InputError("cost vector has wrong length");
  for (const auto& row : lp.rows) {
    for (const auto& [i, a] : row.x) {
      if (i >= lp.n_x) throw InputError("row references unknown x variable");
    }
    for (const auto& [j, f] : row.y) {
      if (j >= lp.n_y) throw InputError("row references unknown y variable");
    }
  }
  Presolved pre = presolve(lp);

  std::vector<std::size_t> kept_rows;
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    if (!pre.row_dropped[r]) kept_rows.push_back(r);
  }
  const std::size_t m = kept_rows.size();

  // Structural columns: x (one or two per variable), then merged y columns.
  struct Column {
    enum Kind { XPos, XNeg, Y } kind;
    std::size_t index;
  };
  std::vector<Column> columns;
  std::vector<std::vector<Rational>> dense_cols;
  std::vector<Rational> cost;

  auto x_column = [&](std::size_t i, bool negate) {
    std::vector<Rational> col(m);
    for (std::size_t k = 0; k < m; ++k) {
      const auto& row = lp.rows[kept_rows[k]];
      if (auto it = row.x.find(i); it != row.x.end()) col[k] = negate ? Rational(-it->second) : it->second;
    }
    return col;
  };
  for (std::size_t i = 0; i < lp.n_x; ++i) {
    columns.push_back({Column::XPos, i});
    dense_cols.push_back(x_column(i, false));
    cost.push_back(lp.cost[i]);
    if (!pre.x_nonneg[i]) {
      columns.push_back({Column::XNeg, i});
      dense_cols.push_back(x_column(i, true));
      cost.push_back(-lp.cost[i]);
    }
  }

  std::vector<std::map<std::size_t, Rational>> y_cols(lp.n_y);
  for (std::size_t k = 0; k < m; ++k) {
    for (const auto& [j, f] : lp.rows[kept_rows[k]].y) {
      if (f != 0) y_cols[j].emplace(k, -f);
    }
  }
  std::map<std::vector<std::pair<std::size_t, Rational>>, std::size_t> seen;
  for (std::size_t j = 0; j < lp.n_y; ++j) {
    if (y_cols[j].empty()) continue;
    const Rational scale = abs(y_cols[j].begin()->second);
    std::vector<std::pair<std::size_t, Rational>> key;
    for (const auto& [k, v] : y_cols[j]) key.emplace_back(k, v / scale);
    if (!seen.emplace(std::move(key), j).second) continue;
    columns.push_back({Column::Y, j});
    std::vector<Rational> col(m);
    for (const auto& [k, v] : y_cols[j]) col[k] = v;
    dense_cols.push_back(std::move(col));
    cost.emplace_back(0);
  }

  StandardForm sf;
  sf.cost = cost;
  sf.rhs.resize(m);
  sf.m.assign(m, std::vector<Rational>(columns.size()));
  for (std::size_t k = 0; k < m; ++k) {
    sf.rhs[k] = lp.rows[kept_rows[k]].b;
    for (std::size_t c = 0; c < columns.size(); ++c) sf.m[k][c] = dense_cols[c][k];
  }

  StandardResult sr = solve_standard(sf);
  LPResult res;
  res.status = sr.status;
  res.pivots = sr.pivots;
  if (sr.status != LPStatus::Optimal) return res;

  res.x.assign(lp.n_x, Rational(0));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (sr.z[c] == 0) continue;
    switch (columns[c].kind) {
      case Column::XPos: res.x[columns[c].index] += sr.z[c]; break;
      case Column::XNeg: res.x[columns[c].index] -= sr.z[c]; break;
      case Column::Y: res.y[columns[c].index] = sr.z[c]; break;
    }
  }
  for (const auto& [i, src] : pre.x_from_y) {
    if (res.x[i] != 0) res.y[src.first] = res.x[i] * src.second;
  }
  res.value = 0;
  for (std::size_t i = 0; i < lp.n_x; ++i) res.value += lp.cost[i] * res.x[i];

  for (const auto& row : lp.rows) {
    Rational lhs = -row.b;
    for (const auto& [i, a] : row.x) lhs += a * res.x[i];
    for (const auto& [j, f] : row.y) {
      if (auto it = res.y.find(j); it != res.y.end()) lhs -= f * it->second;
    }
    if (lhs != 0) throw InvariantViolation("simplex returned a point violating an equality row");
  }
  return res;
}

bool RowEchelon::insert(SparseRow row) {
  for (auto it = row.begin(); it != row.end();) {
    if (it->second == 0) {
      it = row.erase(it);
    } else {
      ++it;
    }
  }
  while (!row.empty()) {
    const std::size_t lead = row.begin()->first;
    auto pivot = basis_.find(lead);
    if (pivot == basis_.end()) {
      const Rational inv = 1 / row.begin()->second;
      for (auto& [c, v] : row) v *= inv;
      basis_.emplace(lead, std::move(row));
      return true;
    }
    const Rational f = row.begin()->second;
    for (const auto& [c, v] : pivot->second) {
      Rational& slot = row[c];
      slot -= f * v;
      if (slot == 0) row.erase(c);
    }
  }
  return false;
}

}  // namespace kcef
