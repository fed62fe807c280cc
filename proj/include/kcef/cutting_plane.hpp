#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kcef/factorization.hpp"
#include "kcef/kc_protocol.hpp"
#include "kcef/knapsack.hpp"
#include "kcef/lp.hpp"

namespace kcef {

struct SeparationResult {
  bool accept = true;
  ItemSet row;                   // the violated set when !accept
  std::optional<ItemSet> rounded;  // feasible rounding certificate, if any
};

/// A = {i : x_i >= 1/2}. Accepts with a certificate when A is feasible,
/// returns Row(A) when its weakened cover inequality is violated, and
/// accepts otherwise.
SeparationResult separate_halfround(const KnapsackInstance& inst, const std::vector<Rational>& x,
                                    const Rational& eps);

/// Most violated weakened cover inequality over all infeasible A (ties to
/// the smallest bitmask), or Accept.
SeparationResult separate_exact(const KnapsackInstance& inst, const std::vector<Rational>& x, const Rational& eps,
                                int cap = kDefaultEnumerationCap);

enum class SeparatorKind { HalfRound, Exact };

const char* to_string(SeparatorKind k);
SeparatorKind parse_separator(const std::string& name);

/// LP(I): the EF rows plus the implicit nonnegativity rows x_i = y_{e_i}.
LinearProgram ef_linear_program(const EFSystem& sys, const std::vector<Rational>& costs);

struct CuttingPlaneResult {
  std::vector<Rational> x;
  Rational value;
  int iterations = 0;
  std::vector<ItemSet> rows_used;   // insertion order
  std::size_t variables = 0;        // r: materialized EF variables (leaves + n)
  std::vector<std::size_t> ranks;   // equality-system rank after each solve
  std::optional<ItemSet> rounded;   // certificate from half-rounding
  EFSystem system;
};

CuttingPlaneResult cutting_plane_solve(const KCProtocol& proto, const std::vector<Rational>& costs,
                                       SeparatorKind separator);
CuttingPlaneResult cutting_plane_solve(const KnapsackInstance& inst, const std::vector<Rational>& costs,
                                       const Rational& eps, SeparatorKind separator);

/// The full weakened cover LP over all infeasible A, solved directly in
/// inequality form (through its dual) without any extended formulation.
struct DirectLPResult {
  Rational value;
  std::vector<Rational> x;
};

DirectLPResult solve_direct_kc_lp(const KnapsackInstance& inst, const std::vector<Rational>& costs,
                                  const Rational& eps, int cap = kDefaultEnumerationCap);

}  // namespace kcef
