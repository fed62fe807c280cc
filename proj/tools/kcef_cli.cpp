// kcef: command-line front end for the knapsack-cover formulation library.
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error,
// 3 internal invariant violation.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kcef/circuit.hpp"
#include "kcef/cutting_plane.hpp"
#include "kcef/factorization.hpp"
#include "kcef/flow_cover.hpp"
#include "kcef/io.hpp"
#include "kcef/kc_protocol.hpp"
#include "kcef/knapsack.hpp"

namespace {

using namespace kcef;
using io::Json;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInvariant = 3;

void emit(const Json& j) { std::cout << j.dump(2) << '\n'; }

Rational epsilon_flag(const std::string& text) {
  const Rational eps = parse_rational(text);
  check_epsilon(eps);
  if (eps >= 1) std::cerr << "warning: eps = " << to_string(eps) << " is outside the usual range (0, 1)\n";
  return eps;
}

std::vector<Rational> costs_for(const io::InstanceFile& file, const std::string& flag) {
  if (!flag.empty()) return io::parse_rational_list(flag);
  if (file.costs) return *file.costs;
  throw InputError("no costs given: pass --costs or add \"costs\" to the instance file");
}

// Runs body(i) for i in [0, count) on a few threads; the first exception wins.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

unsigned default_threads() { return std::max(1U, std::thread::hardware_concurrency()); }

// Portable draws: the standard distributions differ between library vendors.
std::int64_t draw(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

// ---------------------------------------------------------------- gen

struct GenArgs {
  int n = 0;
  std::int64_t max_size = 0;
  std::uint64_t seed = 0;
  std::int64_t max_cost = 0;
};

int run_gen(const GenArgs& g) {
  if (g.n < 1 || g.n > ItemSet::kMaxItems) throw InputError("--n must be in 1.." + std::to_string(ItemSet::kMaxItems));
  if (g.max_size < 1) throw InputError("--max-size must be positive");
  std::mt19937_64 rng(g.seed);
  std::vector<std::int64_t> sizes;
  for (int i = 0; i < g.n; ++i) sizes.push_back(draw(rng, 1, g.max_size));
  std::int64_t total = 0;
  for (auto s : sizes) total += s;
  // max s_i <= D keeps every item within the demand.
  const std::int64_t demand = draw(rng, *std::max_element(sizes.begin(), sizes.end()), total);
  std::optional<std::vector<Rational>> costs;
  if (g.max_cost > 0) {
    costs.emplace();
    for (int i = 0; i < g.n; ++i) costs->push_back(Rational(static_cast<long>(draw(rng, 1, g.max_cost))));
  }
  emit(io::instance_to_json(KnapsackInstance(sizes, demand), costs));
  return 0;
}

// ---------------------------------------------------------------- opt

int run_opt(const std::string& path, const std::string& costs_flag) {
  const auto file = io::instance_from_json(io::read_json_file(path));
  const auto costs = costs_for(file, costs_flag);
  const auto opt = dp_optimum(file.instance, costs);
  emit(Json{{"value", io::rational_to_json(opt.value)}, {"witness", io::set_to_json(opt.witness)}});
  return 0;
}

// ---------------------------------------------------------------- circuit

struct CircuitArgs {
  std::string path;
  std::string weights;
  std::int64_t threshold = 0;
  std::int64_t cutoff = 1;
  std::string dot;
};

int run_circuit(const CircuitArgs& c) {
  ThresholdSpec spec;
  if (!c.weights.empty()) {
    if (!c.path.empty()) throw InputError("give either an instance file or --weights, not both");
    for (const auto& w : io::parse_rational_list(c.weights)) {
      if (w.get_den() != 1 || !w.get_num().fits_slong_p()) throw InputError("weights must be integers");
      spec.weights.push_back(w.get_num().get_si());
    }
    spec.threshold = c.threshold;
    spec.validate();
  } else {
    if (c.path.empty()) throw InputError("circuit needs an instance file or --weights");
    const auto file = io::instance_from_json(io::read_json_file(c.path));
    const std::int64_t t = c.threshold > 0 ? c.threshold : file.instance.demand();
    spec = truncation_spec(file.instance, c.cutoff, t);
  }
  const MonotoneCircuit circuit = build_threshold_circuit(spec);
  const CircuitStats stats = circuit_stats(circuit);

  std::int64_t m = 0;
  for (auto w : spec.weights) m += std::min(w, spec.threshold);
  const int lm = ceil_log2(std::max<std::int64_t>(m, 1)) + 1;
  const int bound = DivideAndConquerBuilder::kDepthConstant * lm * lm;

  const int n = static_cast<int>(spec.weights.size());
  std::optional<bool> agrees;
  if (n <= 20) {
    agrees = true;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      if (circuit.evaluate(ItemSet(x)) != spec.holds(ItemSet(x))) {
        agrees = false;
        break;
      }
    }
  }
  if (!c.dot.empty()) io::write_file(c.dot, circuit.to_dot());

  const bool ok = agrees.value_or(true) && stats.depth <= bound;
  emit(Json{{"inputs", n},
            {"threshold", spec.threshold},
            {"gates", stats.gate_count},
            {"depth", stats.depth},
            {"depth_bound", bound},
            {"exhaustive_check", agrees ? Json(*agrees) : Json(nullptr)},
            {"result", ok ? "PASS" : "FAIL"}});
  return ok ? 0 : kExitFail;
}

// ---------------------------------------------------------------- verify-protocol

struct VerifyArgs {
  std::string path;
  std::string eps = "1/2";
  std::string mode = "all";
  std::size_t samples = 1000;
  std::uint64_t seed = 1;
  unsigned threads = default_threads();
};

struct PairOutcome {
  ItemSet a;
  ItemSet b;
  Rational got;
  Rational want;
  int height = 0;
  int bound = 0;
  std::string error;
};

std::vector<std::pair<ItemSet, ItemSet>> sample_pairs(const KnapsackInstance& inst, std::size_t count,
                                                      std::uint64_t seed) {
  const ItemSet all = ItemSet::full(inst.n());
  if (inst.weight(all) < inst.demand()) throw DomainError("no feasible cover exists");
  std::mt19937_64 rng(seed);
  auto pick = [&](bool feasible) {
    for (int tries = 0; tries < 1'000'000; ++tries) {
      const ItemSet s(rng() & all.bits());
      if (inst.is_feasible(s) == feasible) return s;
    }
    throw CapacityError("rejection sampling found no suitable set");
  };
  std::vector<std::pair<ItemSet, ItemSet>> out;
  for (std::size_t i = 0; i < count; ++i) {
    const ItemSet a = pick(false);
    out.emplace_back(a, pick(true));
  }
  return out;
}

int run_verify(const VerifyArgs& v) {
  const auto file = io::instance_from_json(io::read_json_file(v.path));
  const KnapsackInstance& inst = file.instance;
  const Rational eps = epsilon_flag(v.eps);

  std::vector<std::pair<ItemSet, ItemSet>> pairs;
  if (v.mode == "all") {
    const auto rc = enumerate_rows_and_columns(inst);
    for (ItemSet a : rc.infeasible) {
      for (ItemSet b : rc.feasible) pairs.emplace_back(a, b);
    }
  } else if (v.mode == "sample") {
    pairs = sample_pairs(inst, v.samples, v.seed);
  } else {
    throw InputError("--mode must be all or sample");
  }

  const KCProtocol proto = build_kc_protocol(inst, eps);
  std::vector<PairOutcome> outcomes(pairs.size());
  parallel_for(pairs.size(), v.threads, [&](std::size_t i) {
    PairOutcome& o = outcomes[i];
    o.a = pairs[i].first;
    o.b = pairs[i].second;
    o.want = weakened_kc_slack(inst, o.a, o.b, eps);
    o.bound = proto.height_bound(o.a);
    try {
      const PairReport r = analyze_pair(proto.tree(), o.a, o.b);
      o.got = r.expectation;
      o.height = r.max_path_length;
    } catch (const InvariantViolation& e) {
      o.error = e.what();
    }
  });

  Json failures = Json::array();
  int max_height = 0;
  int max_bound = 0;
  for (const auto& o : outcomes) {
    max_height = std::max(max_height, o.height);
    max_bound = std::max(max_bound, o.bound);
    const bool bad = !o.error.empty() || o.got != o.want || o.height > o.bound;
    if (!bad) continue;
    Json f{{"A", io::set_to_json(o.a)}, {"b", io::set_to_json(o.b)}, {"expected", io::rational_to_json(o.want)}};
    if (o.error.empty()) {
      f["got"] = io::rational_to_json(o.got);
      f["height"] = o.height;
      f["height_bound"] = o.bound;
    } else {
      f["error"] = o.error;
    }
    failures.push_back(std::move(f));
  }
  const bool ok = failures.empty();
  emit(Json{{"result", ok ? "PASS" : "FAIL"},
            {"mode", v.mode},
            {"epsilon", io::rational_to_json(eps)},
            {"pairs", pairs.size()},
            {"max_height", max_height},
            {"max_height_bound", max_bound},
            {"failures", std::move(failures)}});
  return ok ? 0 : kExitFail;
}

// ---------------------------------------------------------------- factorize

int run_factorize(const std::string& path, const std::string& eps_text, const std::string& output) {
  const auto file = io::instance_from_json(io::read_json_file(path));
  const Rational eps = epsilon_flag(eps_text);
  const KCProtocol proto = build_kc_protocol(file.instance, eps);
  const Factorization fz = factorize_full(proto);
  const SlackMatrix s = exact_slack_matrix(file.instance, eps);

  bool nonnegative = true;
  for (const auto& row : fz.f) {
    for (const auto& [leaf, x] : row) nonnegative = nonnegative && x >= 0;
  }
  for (const auto& col : fz.v) {
    for (const auto& [leaf, x] : col) nonnegative = nonnegative && x >= 0;
  }
  std::size_t mismatches = 0;
  for (std::size_t r = 0; r < fz.rows.size(); ++r) {
    for (std::size_t c = 0; c < fz.cols.size(); ++c) {
      if (fz.entry(r, c) != s.entries[r][c]) ++mismatches;
    }
  }
  if (!output.empty()) {
    auto dense = [](const std::vector<std::vector<Rational>>& m) {
      Json out = Json::array();
      for (const auto& row : m) out.push_back(io::rationals_to_json(row));
      return out;
    };
    Json rows = Json::array();
    for (ItemSet a : fz.rows) rows.push_back(io::set_to_json(a));
    Json cols = Json::array();
    for (ItemSet b : fz.cols) cols.push_back(io::set_to_json(b));
    io::write_file(output, Json{{"rows", rows}, {"cols", cols}, {"leaves", fz.leaves}, {"F", dense(dense_f(fz))},
                                {"V", dense(dense_v(fz))}}
                               .dump() +
                               "\n");
  }
  const bool ok = mismatches == 0 && nonnegative;
  emit(Json{{"result", ok ? "PASS" : "FAIL"},
            {"rows", fz.rows.size()},
            {"cols", fz.cols.size()},
            {"rank", fz.rank()},
            {"max_row_support", fz.max_row_support()},
            {"mismatched_entries", mismatches},
            {"nonnegative", nonnegative}});
  return ok ? 0 : kExitFail;
}

// ---------------------------------------------------------------- emit-ef

struct EmitArgs {
  std::string path;
  std::string eps = "1/2";
  std::string rows;
  std::string costs;
  std::string separator = "halfround";
  std::string output;
};

int run_emit(const EmitArgs& e) {
  const auto file = io::instance_from_json(io::read_json_file(e.path));
  const Rational eps = epsilon_flag(e.eps);
  const KCProtocol proto = build_kc_protocol(file.instance, eps);
  EFSystem sys;
  if (!e.rows.empty()) {
    Json parsed;
    try {
      parsed = Json::parse(e.rows);
    } catch (const nlohmann::json::exception& ex) {
      throw InputError(std::string("--rows is not JSON: ") + ex.what());
    }
    if (!parsed.is_array()) throw InputError("--rows must be a JSON array of index lists");
    std::vector<ItemSet> rows;
    for (const auto& r : parsed) rows.push_back(io::set_from_json(r, file.instance.n()));
    sys = emit_ef(proto, rows);
  } else {
    const auto costs = costs_for(file, e.costs);
    sys = cutting_plane_solve(proto, costs, parse_separator(e.separator)).system;
  }
  const std::string text = io::ef_to_json(sys).dump(2) + "\n";
  if (e.output.empty()) {
    std::cout << text;
  } else {
    io::write_file(e.output, text);
    emit(Json{{"rows", sys.rows.size()}, {"leaves", sys.leaves.size()}, {"output", e.output}});
  }
  return 0;
}

// ---------------------------------------------------------------- solve / gap

struct SolveArgs {
  std::string path;
  std::string eps = "1/2";
  std::string costs;
  std::string separator = "halfround";
};

int run_solve(const SolveArgs& s, bool gap) {
  const auto file = io::instance_from_json(io::read_json_file(s.path));
  const Rational eps = epsilon_flag(s.eps);
  const auto costs = costs_for(file, s.costs);
  const SeparatorKind sep = parse_separator(s.separator);
  const CuttingPlaneResult res = cutting_plane_solve(file.instance, costs, eps, sep);
  Json out = io::solve_to_json(res, sep);
  if (!gap) {
    emit(out);
    return 0;
  }
  const KnapsackOptimum opt = dp_optimum(file.instance, costs);
  const Rational bound = 2 + eps;
  bool ok = res.value <= opt.value && opt.value <= bound * res.value;
  out["opt"] = io::rational_to_json(opt.value);
  out["opt_witness"] = io::set_to_json(opt.witness);
  if (res.value > 0) {
    out["ratio"] = io::rational_to_json(Rational(opt.value / res.value));
  } else {
    out["ratio"] = nullptr;
  }
  out["bound"] = io::rational_to_json(bound);
  out["result"] = ok ? "PASS" : "FAIL";
  emit(out);
  if (!ok) std::cerr << "integrality gap bound violated\n";
  return ok ? 0 : kExitFail;
}

// ---------------------------------------------------------------- fci-verify

struct FciArgs {
  std::string path;
  std::string eps = "1/2";
  int grid = 4;
  unsigned threads = default_threads();
};

int run_fci(const FciArgs& f) {
  const FacilityInstance inst = io::facility_from_json(io::read_json_file(f.path));
  const Rational eps = epsilon_flag(f.eps);
  const FCIProtocol proto = build_fci_protocol(inst, eps);
  const auto tuples = enumerate_tuples(inst);
  const auto solutions = solution_grid(inst, f.grid);

  std::vector<std::string> errors(solutions.size());
  parallel_for(solutions.size(), f.threads, [&](std::size_t i) {
    const FlowSolution& z = solutions[i];
    std::string& err = errors[i];
    try {
      for (const auto& t : tuples) {
        const Rational want = fci_slack(inst, t, z, eps);
        const Rational got = exact_expectation(proto.tree(), t, z);
        if (got != want) {
          err = "A=" + t.a.to_string() + " F1=" + t.f1.to_string() + ": got " + to_string(got) + ", expected " +
                to_string(want);
          return;
        }
      }
      Rational weight = 0;
      std::vector<Rational> sum(z.x.size(), Rational(0));
      for (const auto& [w, c] : canonical_decompose(inst, z)) {
        if (w < 0 || !is_canonical(inst, c) || c.y != z.y) {
          err = "decomposition produced a bad component";
          return;
        }
        weight += w;
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += w * c.x[k];
      }
      if (weight != 1 || sum != z.x) err = "decomposition does not recombine";
    } catch (const InvariantViolation& e) {
      err = e.what();
    }
  });

  Json failures = Json::array();
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    if (errors[i].empty()) continue;
    failures.push_back(Json{{"solution", io::solution_to_json(solutions[i], inst.n())}, {"error", errors[i]}});
  }
  const bool ok = failures.empty();
  emit(Json{{"result", ok ? "PASS" : "FAIL"},
            {"epsilon", io::rational_to_json(eps)},
            {"tuples", tuples.size()},
            {"solutions", solutions.size()},
            {"pairs", tuples.size() * solutions.size()},
            {"failures", std::move(failures)}});
  return ok ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knapsack-cover extended formulations: protocols, factorizations and LP solving"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "generate a random instance with max s_i <= D <= sum s_i");
  gen_cmd->add_option("--n", gen.n, "number of items")->required();
  gen_cmd->add_option("--max-size", gen.max_size, "largest item size")->required();
  gen_cmd->add_option("--seed", gen.seed, "random seed");
  gen_cmd->add_option("--max-cost", gen.max_cost, "also draw integer costs in 1..max-cost");

  std::string opt_path, opt_costs;
  auto* opt_cmd = app.add_subcommand("opt", "exact min-knapsack optimum");
  opt_cmd->add_option("instance", opt_path)->required();
  opt_cmd->add_option("--costs", opt_costs, "comma-separated costs");

  CircuitArgs circ;
  auto* circ_cmd = app.add_subcommand("circuit", "build a threshold circuit and report its size and depth");
  circ_cmd->add_option("instance", circ.path, "instance file; the circuit is the truncated knapsack function");
  circ_cmd->add_option("--weights", circ.weights, "comma-separated weights instead of an instance");
  circ_cmd->add_option("--threshold", circ.threshold, "threshold T (default: the demand)");
  circ_cmd->add_option("--cutoff", circ.cutoff, "drop items smaller than this");
  circ_cmd->add_option("--dot", circ.dot, "write the circuit in DOT format to this file");

  VerifyArgs ver;
  auto* ver_cmd = app.add_subcommand("verify-protocol", "compare protocol expectations with the slack matrix");
  ver_cmd->add_option("instance", ver.path)->required();
  ver_cmd->add_option("--eps", ver.eps, "epsilon, e.g. 1/2");
  ver_cmd->add_option("--mode", ver.mode, "all or sample");
  ver_cmd->add_option("--samples", ver.samples, "pairs drawn in sample mode");
  ver_cmd->add_option("--seed", ver.seed, "seed for sample mode");
  ver_cmd->add_option("--threads", ver.threads, "worker threads");

  std::string fz_path, fz_eps = "1/2", fz_out;
  auto* fz_cmd = app.add_subcommand("factorize", "full nonnegative factorization with identity check");
  fz_cmd->add_option("instance", fz_path)->required();
  fz_cmd->add_option("--eps", fz_eps, "epsilon");
  fz_cmd->add_option("--output", fz_out, "write dense F and V to this file");

  EmitArgs ef;
  auto* ef_cmd = app.add_subcommand("emit-ef", "write extended formulation rows as JSON");
  ef_cmd->add_option("instance", ef.path)->required();
  ef_cmd->add_option("--eps", ef.eps, "epsilon");
  ef_cmd->add_option("--rows", ef.rows, "JSON list of 1-based index lists, e.g. [[],[3]]");
  ef_cmd->add_option("--costs", ef.costs, "without --rows: rows come from a cutting-plane run on these costs");
  ef_cmd->add_option("--separator", ef.separator, "halfround or exact");
  ef_cmd->add_option("--output", ef.output, "output file (default: standard output)");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "cutting-plane LP over the extended formulation");
  SolveArgs gap;
  auto* gap_cmd = app.add_subcommand("gap", "solve, then compare with the integer optimum");
  for (auto [cmd, args] : {std::pair{solve_cmd, &solve}, std::pair{gap_cmd, &gap}}) {
    cmd->add_option("instance", args->path)->required();
    cmd->add_option("--eps", args->eps, "epsilon");
    cmd->add_option("--costs", args->costs, "comma-separated costs (default: from the file)");
    cmd->add_option("--separator", args->separator, "halfround or exact");
  }

  FciArgs fci;
  auto* fci_cmd = app.add_subcommand("fci-verify", "flow-cover protocol sweep over a grid of solutions");
  fci_cmd->add_option("instance", fci.path, "facility instance file")->required();
  fci_cmd->add_option("--eps", fci.eps, "epsilon");
  fci_cmd->add_option("--grid", fci.grid, "flows are multiples of 1/grid");
  fci_cmd->add_option("--threads", fci.threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*opt_cmd) return run_opt(opt_path, opt_costs);
    if (*circ_cmd) return run_circuit(circ);
    if (*ver_cmd) return run_verify(ver);
    if (*fz_cmd) return run_factorize(fz_path, fz_eps, fz_out);
    if (*ef_cmd) return run_emit(ef);
    if (*solve_cmd) return run_solve(solve, false);
    if (*gap_cmd) return run_solve(gap, true);
    if (*fci_cmd) return run_fci(fci);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
