#include "kcef/io.hpp"

#include <fstream>
#include <sstream>

namespace kcef::io {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) throw InputError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field \"") + key + "\"");
  return *it;
}

std::int64_t integer_from_json(const Json& j, const char* what) {
  if (!j.is_number_integer()) throw InputError(std::string(what) + " must be an integer");
  return j.get<std::int64_t>();
}

std::vector<std::int64_t> integers_from_json(const Json& j, const char* what) {
  if (!j.is_array()) throw InputError(std::string(what) + " must be an array");
  std::vector<std::int64_t> out;
  for (const Json& e : j) out.push_back(integer_from_json(e, what));
  return out;
}

void check_count(const Json& j, std::size_t actual, const char* what) {
  const std::int64_t n = integer_from_json(field(j, "n"), "n");
  if (n < 0 || static_cast<std::size_t>(n) != actual) {
    throw InputError(std::string("\"n\" is ") + std::to_string(n) + " but " + what + " has " +
                     std::to_string(actual) + " entries");
  }
}

std::optional<std::vector<Rational>> optional_rationals(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return rationals_from_json(*it);
}

template <class Fn>
auto guarded(Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
  if (!out) throw InputError("write to " + path + " failed");
}

Rational rational_from_json(const Json& j) {
  if (j.is_number_integer()) return Rational(Integer(std::to_string(j.get<std::int64_t>())));
  if (j.is_string()) return parse_rational(j.get<std::string>());
  throw InputError("expected an integer or a \"p/q\" string, got " + j.dump());
}

Json rational_to_json(const Rational& q) { return to_string(q); }

std::vector<Rational> rationals_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected an array of rationals");
  std::vector<Rational> out;
  for (const Json& e : j) out.push_back(rational_from_json(e));
  return out;
}

Json rationals_to_json(const std::vector<Rational>& v) {
  Json out = Json::array();
  for (const Rational& q : v) out.push_back(rational_to_json(q));
  return out;
}

ItemSet set_from_json(const Json& j, int n) {
  if (!j.is_array()) throw InputError("expected an array of indices");
  std::vector<int> idx;
  for (const Json& e : j) {
    const std::int64_t i = integer_from_json(e, "set index");
    if (i < 1 || i > n) throw InputError("index " + std::to_string(i) + " outside 1.." + std::to_string(n));
    idx.push_back(static_cast<int>(i - 1));
  }
  return ItemSet::from_indices(idx);
}

Json set_to_json(ItemSet s) {
  Json out = Json::array();
  for (int i : s.indices()) out.push_back(i + 1);
  return out;
}

InstanceFile instance_from_json(const Json& j) {
  return guarded([&] {
    std::vector<std::int64_t> sizes = integers_from_json(field(j, "sizes"), "sizes");
    check_count(j, sizes.size(), "sizes");
    InstanceFile f{KnapsackInstance(std::move(sizes), integer_from_json(field(j, "demand"), "demand")),
                   optional_rationals(j, "costs")};
    if (f.costs) {
      if (f.costs->size() != static_cast<std::size_t>(f.instance.n())) {
        throw InputError("\"costs\" must have one entry per item");
      }
      for (const Rational& c : *f.costs) {
        if (c < 0) throw InputError("costs must be nonnegative");
      }
    }
    return f;
  });
}

Json instance_to_json(const KnapsackInstance& inst, const std::optional<std::vector<Rational>>& costs) {
  Json j;
  j["n"] = inst.n();
  j["sizes"] = inst.sizes();
  j["demand"] = inst.demand();
  if (costs) j["costs"] = rationals_to_json(*costs);
  return j;
}

FacilityInstance facility_from_json(const Json& j) {
  return guarded([&] {
    std::vector<std::int64_t> caps = integers_from_json(field(j, "capacities"), "capacities");
    check_count(j, caps.size(), "capacities");
    return FacilityInstance(std::move(caps), integer_from_json(field(j, "demand"), "demand"),
                            optional_rationals(j, "open_costs"), optional_rationals(j, "unit_costs"));
  });
}

Json facility_to_json(const FacilityInstance& inst) {
  Json j;
  j["n"] = inst.n();
  j["capacities"] = inst.capacities();
  j["demand"] = inst.demand();
  if (inst.open_costs()) j["open_costs"] = rationals_to_json(*inst.open_costs());
  if (inst.unit_costs()) j["unit_costs"] = rationals_to_json(*inst.unit_costs());
  return j;
}

FlowSolution solution_from_json(const Json& j, int n) {
  return guarded([&] {
    std::vector<std::int64_t> bits = integers_from_json(field(j, "y"), "y");
    if (bits.size() != static_cast<std::size_t>(n)) throw InputError("\"y\" must have one bit per facility");
    std::vector<int> small(bits.begin(), bits.end());
    FlowSolution sol{ItemSet::from_bits(small), rationals_from_json(field(j, "x"))};
    if (sol.x.size() != static_cast<std::size_t>(n)) throw InputError("\"x\" must have one value per facility");
    return sol;
  });
}

Json solution_to_json(const FlowSolution& sol, int n) {
  Json j;
  j["y"] = sol.y.to_bits(n);
  j["x"] = rationals_to_json(sol.x);
  return j;
}

Json ef_to_json(const EFSystem& sys) {
  Json j;
  j["n"] = sys.n;
  j["epsilon"] = rational_to_json(sys.epsilon);
  j["leaves"] = sys.leaves.ids();
  Json rows = Json::array();
  for (const EFRow& row : sys.rows) {
    Json r;
    r["set"] = set_to_json(row.set);
    r["constant"] = rational_to_json(row.constant);
    r["x_coeffs"] = rationals_to_json(row.x_coeffs);
    Json y = Json::object();
    for (const auto& [idx, c] : row.y_coeffs) {
      if (idx < static_cast<std::size_t>(sys.n)) {
        throw InvariantViolation("EF row carries a coefficient on a reserved nonnegativity variable");
      }
      y[sys.leaves.ids()[idx - static_cast<std::size_t>(sys.n)]] = rational_to_json(c);
    }
    r["y_coeffs"] = std::move(y);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  return j;
}

EFSystem ef_from_json(const Json& j) {
  return guarded([&] {
    EFSystem sys;
    const std::int64_t n = integer_from_json(field(j, "n"), "n");
    if (n < 1 || n > ItemSet::kMaxItems) throw InputError("\"n\" out of range");
    sys.n = static_cast<int>(n);
    sys.epsilon = rational_from_json(field(j, "epsilon"));
    check_epsilon(sys.epsilon);
    const Json& leaves = field(j, "leaves");
    if (!leaves.is_array()) throw InputError("\"leaves\" must be an array of path strings");
    for (const Json& leaf : leaves) {
      if (!leaf.is_string()) throw InputError("leaf ids must be strings");
      const std::string id = leaf.get<std::string>();
      if (id.find_first_not_of("01") != std::string::npos) throw InputError("leaf id '" + id + "' is not a 0/1 path");
      if (sys.leaves.find(id)) throw InputError("duplicate leaf id '" + id + "'");
      sys.leaves.intern(id);
    }
    const Json& rows = field(j, "rows");
    if (!rows.is_array()) throw InputError("\"rows\" must be an array");
    for (const Json& r : rows) {
      EFRow row;
      row.set = set_from_json(field(r, "set"), sys.n);
      row.constant = rational_from_json(field(r, "constant"));
      row.x_coeffs = rationals_from_json(field(r, "x_coeffs"));
      if (row.x_coeffs.size() != static_cast<std::size_t>(sys.n)) {
        throw InputError("\"x_coeffs\" must have n entries");
      }
      const Json& y = field(r, "y_coeffs");
      if (!y.is_object()) throw InputError("\"y_coeffs\" must be an object keyed by leaf path");
      for (auto it = y.begin(); it != y.end(); ++it) {
        auto leaf = sys.leaves.find(it.key());
        if (!leaf) throw InputError("y_coeffs names unknown leaf '" + it.key() + "'");
        row.y_coeffs.emplace(sys.leaf_y_index(*leaf), rational_from_json(it.value()));
      }
      sys.rows.push_back(std::move(row));
    }
    return sys;
  });
}

Json solve_to_json(const CuttingPlaneResult& res, SeparatorKind separator) {
  Json j;
  j["value"] = rational_to_json(res.value);
  j["x"] = rationals_to_json(res.x);
  j["iterations"] = res.iterations;
  Json rows = Json::array();
  for (ItemSet a : res.rows_used) rows.push_back(set_to_json(a));
  j["rows"] = std::move(rows);
  j["separator"] = to_string(separator);
  return j;
}

std::vector<Rational> parse_rational_list(const std::string& text) {
  std::vector<Rational> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(parse_rational(part));
  if (out.empty()) throw InputError("empty list");
  return out;
}

}  // namespace kcef::io
