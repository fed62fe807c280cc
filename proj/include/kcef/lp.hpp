#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "kcef/rational.hpp"

namespace kcef {

enum class LPStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LPStatus s);

/// min c^T x  s.t.  sum_i a_ri x_i - b_r = sum_j f_rj y_j  for every row r,
/// x free, y >= 0.
struct LinearProgram {
  struct Row {
    std::map<std::size_t, Rational> x;  // a_r
    Rational b;
    std::map<std::size_t, Rational> y;  // f_r
  };
  std::size_t n_x = 0;
  std::size_t n_y = 0;
  std::vector<Rational> cost;  // over x
  std::vector<Row> rows;
};

struct LPResult {
  LPStatus status = LPStatus::Infeasible;
  std::vector<Rational> x;
  std::map<std::size_t, Rational> y;  // nonzero entries only
  Rational value;
  int pivots = 0;
};

/// Exact two-phase simplex with Bland's rule. Before pivoting, rows of the
/// form a x_i = f y_j (a, f > 0, y_j private to the row) turn x_i into a
/// nonnegative variable, zero y columns are dropped and positively parallel
/// y columns are merged.
LPResult solve_lp(const LinearProgram& lp);

/// min c^T z  s.t.  M z = rhs, z >= 0.
struct StandardForm {
  std::vector<std::vector<Rational>> m;
  std::vector<Rational> rhs;
  std::vector<Rational> cost;
};

struct StandardResult {
  LPStatus status = LPStatus::Infeasible;
  std::vector<Rational> z;
  Rational value;
  std::vector<Rational> reduced_costs;  // at the optimal basis
  int pivots = 0;
};

StandardResult solve_standard(const StandardForm& lp);

/// Exact incremental row echelon form for rank tracking over sparse rows.
class RowEchelon {
 public:
  using SparseRow = std::map<std::size_t, Rational>;

  /// Adds a row; returns true iff the rank grew.
  bool insert(SparseRow row);
  std::size_t rank() const { return basis_.size(); }

 private:
  std::map<std::size_t, SparseRow> basis_;  // pivot column -> row with leading 1 there
};

}  // namespace kcef
