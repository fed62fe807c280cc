#include "kcef/cutting_plane.hpp"

#include <limits>

namespace kcef {

namespace {

void check_point(const KnapsackInstance& inst, const std::vector<Rational>& x) {
  if (x.size() != static_cast<std::size_t>(inst.n())) {
    throw InputError("point has " + std::to_string(x.size()) + " coordinates, expected " +
                     std::to_string(inst.n()));
  }
}

void check_costs(const KnapsackInstance& inst, const std::vector<Rational>& costs) {
  if (costs.size() != static_cast<std::size_t>(inst.n())) {
    throw InputError("expected " + std::to_string(inst.n()) + " costs, got " + std::to_string(costs.size()));
  }
  for (const Rational& c : costs) {
    if (c < 0) throw InputError("costs must be nonnegative");
  }
}

constexpr std::size_t kConstantColumn = std::numeric_limits<std::size_t>::max();

RowEchelon::SparseRow echelon_row(const LinearProgram::Row& row, std::size_t n) {
  RowEchelon::SparseRow out;
  for (const auto& [i, a] : row.x) out[i] = a;
  for (const auto& [j, f] : row.y) out[n + j] = -f;
  if (row.b != 0) out[kConstantColumn] = -row.b;
  return out;
}

}  // namespace

SeparationResult separate_halfround(const KnapsackInstance& inst, const std::vector<Rational>& x,
                                    const Rational& eps) {
  check_point(inst, x);
  const Rational half = ratio(1, 2);
  ItemSet a;
  for (int i = 0; i < inst.n(); ++i) {
    if (x[static_cast<std::size_t>(i)] >= half) a = a.with(i);
  }
  SeparationResult res;
  if (inst.is_feasible(a)) {
    res.rounded = a;
    return res;
  }
  if (WeakenedKCRow::make(inst, a, eps).slack(x) < 0) {
    res.accept = false;
    res.row = a;
  }
  return res;
}

SeparationResult separate_exact(const KnapsackInstance& inst, const std::vector<Rational>& x, const Rational& eps,
                                int cap) {
  check_point(inst, x);
  check_epsilon(eps);
  if (inst.n() > cap) {
    throw CapacityError("exact separation over 2^" + std::to_string(inst.n()) + " sets exceeds the cap");
  }
  const Rational alpha = weakening_factor(eps);
  SeparationResult res;
  Rational worst = 0;
  const std::uint64_t limit = std::uint64_t{1} << inst.n();
  for (std::uint64_t m = 0; m < limit; ++m) {
    ItemSet a(m);
    const std::int64_t used = inst.weight(a);
    if (used >= inst.demand()) continue;
    const std::int64_t u = inst.demand() - used;
    Rational lhs = 0;
    for (int i = 0; i < inst.n(); ++i) {
      if (!a.contains(i)) lhs += std::min(inst.size(i), u) * x[static_cast<std::size_t>(i)];
    }
    Rational violation = alpha * u - lhs;
    if (violation > worst) {
      worst = violation;
      res.accept = false;
      res.row = a;
    }
  }
  return res;
}

const char* to_string(SeparatorKind k) { return k == SeparatorKind::HalfRound ? "halfround" : "exact"; }

SeparatorKind parse_separator(const std::string& name) {
  if (name == "halfround") return SeparatorKind::HalfRound;
  if (name == "exact") return SeparatorKind::Exact;
  throw InputError("unknown separator '" + name + "' (expected halfround or exact)");
}

LinearProgram ef_linear_program(const EFSystem& sys, const std::vector<Rational>& costs) {
  LinearProgram lp;
  lp.n_x = static_cast<std::size_t>(sys.n);
  lp.n_y = sys.y_dim();
  lp.cost = costs;
  for (std::size_t i = 0; i < lp.n_x; ++i) {
    LinearProgram::Row row;
    row.x.emplace(i, Rational(1));
    row.b = 0;
    row.y.emplace(i, Rational(1));
    lp.rows.push_back(std::move(row));
  }
  for (const EFRow& ef : sys.rows) {
    LinearProgram::Row row;
    for (std::size_t i = 0; i < ef.x_coeffs.size(); ++i) {
      if (ef.x_coeffs[i] != 0) row.x.emplace(i, ef.x_coeffs[i]);
    }
    row.b = ef.constant;
    row.y = ef.y_coeffs;
    lp.rows.push_back(std::move(row));
  }
  return lp;
}

CuttingPlaneResult cutting_plane_solve(const KCProtocol& proto, const std::vector<Rational>& costs,
                                       SeparatorKind separator) {
  const KnapsackInstance& inst = proto.instance();
  check_costs(inst, costs);
  const auto n = static_cast<std::size_t>(inst.n());

  CuttingPlaneResult res;
  res.system = empty_ef(proto);
  RowEchelon echelon;
  {
    LinearProgram lp0 = ef_linear_program(res.system, costs);
    for (const auto& row : lp0.rows) echelon.insert(echelon_row(row, n));
  }

  for (;;) {
    LinearProgram lp = ef_linear_program(res.system, costs);
    LPResult sol = solve_lp(lp);
    ++res.iterations;
    if (sol.status != LPStatus::Optimal) {
      throw InvariantViolation(std::string("LP(I) is ") + to_string(sol.status));
    }
    res.x = sol.x;
    res.value = sol.value;
    res.ranks.push_back(echelon.rank());

    SeparationResult sep = separator == SeparatorKind::Exact ? separate_exact(inst, sol.x, proto.epsilon())
                                                             : separate_halfround(inst, sol.x, proto.epsilon());
    if (sep.accept) {
      res.rounded = sep.rounded;
      break;
    }
    for (ItemSet used : res.rows_used) {
      if (used == sep.row) throw InvariantViolation("separator returned a row already in I: " + used.to_string());
    }
    const std::size_t pos = append_ef_row(res.system, proto, sep.row);
    res.rows_used.push_back(sep.row);
    LinearProgram grown = ef_linear_program(res.system, costs);
    if (!echelon.insert(echelon_row(grown.rows[n + pos], n))) {
      throw InvariantViolation("added row " + sep.row.to_string() + " did not increase the rank");
    }
  }

  res.variables = res.system.y_dim();
  if (static_cast<std::size_t>(res.iterations) > res.variables + 1) {
    throw InvariantViolation("cutting-plane loop ran " + std::to_string(res.iterations) +
                             " iterations with only " + std::to_string(res.variables) + " variables");
  }
  return res;
}

CuttingPlaneResult cutting_plane_solve(const KnapsackInstance& inst, const std::vector<Rational>& costs,
                                       const Rational& eps, SeparatorKind separator) {
  return cutting_plane_solve(build_kc_protocol(inst, eps), costs, separator);
}

DirectLPResult solve_direct_kc_lp(const KnapsackInstance& inst, const std::vector<Rational>& costs,
                                  const Rational& eps, int cap) {
  check_costs(inst, costs);
  RowsAndColumns rc = enumerate_rows_and_columns(inst, cap);
  const std::size_t n = static_cast<std::size_t>(inst.n());
  const std::size_t rows = rc.infeasible.size();

  // Dual: max sum_A alpha U_A l_A  s.t.  sum_A s'_{A,i} l_A + t_i = c_i,  l, t >= 0.
  std::vector<WeakenedKCRow> kc;
  for (ItemSet a : rc.infeasible) kc.push_back(WeakenedKCRow::make(inst, a, eps));
  StandardForm sf;
  sf.rhs = costs;
  sf.m.assign(n, std::vector<Rational>(rows + n));
  sf.cost.assign(rows + n, Rational(0));
  for (std::size_t r = 0; r < rows; ++r) {
    sf.cost[r] = -kc[r].rhs;
    for (std::size_t i = 0; i < n; ++i) sf.m[i][r] = kc[r].clipped_sizes[i];
  }
  for (std::size_t i = 0; i < n; ++i) sf.m[i][rows + i] = 1;

  StandardResult sr = solve_standard(sf);
  if (sr.status != LPStatus::Optimal) throw InvariantViolation("dual of the cover LP is not optimal");

  DirectLPResult out;
  out.value = -sr.value;
  // Primal values are the reduced costs of the dual slack columns.
  for (std::size_t i = 0; i < n; ++i) out.x.push_back(sr.reduced_costs[rows + i]);

  Rational primal = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out.x[i] < 0) throw InvariantViolation("recovered primal point has a negative coordinate");
    primal += costs[i] * out.x[i];
  }
  for (const WeakenedKCRow& row : kc) {
    if (row.slack(out.x) < 0) throw InvariantViolation("recovered primal point violates " + row.infeasible_set.to_string());
  }
  if (primal != out.value) throw InvariantViolation("primal and dual cover LP values differ");
  return out;
}

}  // namespace kcef
