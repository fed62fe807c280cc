#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "kcef/cutting_plane.hpp"
#include "kcef/factorization.hpp"
#include "kcef/flow_cover.hpp"
#include "kcef/knapsack.hpp"

namespace kcef::io {

using Json = nlohmann::ordered_json;

/// Whole file or InputError.
std::string read_file(const std::string& path);
Json read_json_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// Integer or "p/q" string.
Rational rational_from_json(const Json& j);
Json rational_to_json(const Rational& q);
std::vector<Rational> rationals_from_json(const Json& j);
Json rationals_to_json(const std::vector<Rational>& v);

/// JSON index lists are 1-based.
ItemSet set_from_json(const Json& j, int n);
Json set_to_json(ItemSet s);

struct InstanceFile {
  KnapsackInstance instance;
  std::optional<std::vector<Rational>> costs;
};

InstanceFile instance_from_json(const Json& j);
Json instance_to_json(const KnapsackInstance& inst, const std::optional<std::vector<Rational>>& costs = std::nullopt);

FacilityInstance facility_from_json(const Json& j);
Json facility_to_json(const FacilityInstance& inst);

FlowSolution solution_from_json(const Json& j, int n);
Json solution_to_json(const FlowSolution& sol, int n);

Json ef_to_json(const EFSystem& sys);
EFSystem ef_from_json(const Json& j);

Json solve_to_json(const CuttingPlaneResult& res, SeparatorKind separator);

/// Comma-separated list of integers or "p/q" values.
std::vector<Rational> parse_rational_list(const std::string& text);

}  // namespace kcef::io
