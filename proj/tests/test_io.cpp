#include <gtest/gtest.h>

#include "kcef/io.hpp"
#include "oracles.hpp"

using namespace kcef;
using oracle::frac;

TEST(Rational, FormattingAndParsing) {
  EXPECT_EQ(to_string(Rational(2)), "2/1");
  EXPECT_EQ(to_string(frac(-6, 4)), "-3/2");
  EXPECT_EQ(parse_rational("10/9"), frac(10, 9));
  EXPECT_EQ(parse_rational("4/6"), frac(2, 3));
  EXPECT_EQ(parse_rational("0.25"), frac(1, 4));
  EXPECT_EQ(parse_rational(" -3 "), -3);
  EXPECT_THROW(parse_rational("1/0"), InputError);
  EXPECT_THROW(parse_rational("abc"), InputError);
  EXPECT_THROW(parse_rational(""), InputError);
  EXPECT_THROW(parse_rational("1/-2"), InputError);
  EXPECT_EQ(ceil_log2(1), 0);
  EXPECT_EQ(ceil_log2(5), 3);
  EXPECT_EQ(ceil_log2(8), 3);
  EXPECT_EQ(floor(frac(-1, 2)), -1);
  EXPECT_EQ(ceil(frac(-1, 2)), 0);
}

TEST(IO, InstanceRoundTrip) {
  auto j = io::Json::parse(R"({"n": 3, "sizes": [2, 3, 4], "demand": 5, "costs": [1, "3/2", "2/1"]})");
  auto f = io::instance_from_json(j);
  EXPECT_EQ(f.instance.sizes(), (std::vector<std::int64_t>{2, 3, 4}));
  ASSERT_TRUE(f.costs.has_value());
  EXPECT_EQ(*f.costs, (std::vector<Rational>{1, frac(3, 2), 2}));
  auto back = io::instance_to_json(f.instance, f.costs);
  EXPECT_EQ(back.dump(), R"({"n":3,"sizes":[2,3,4],"demand":5,"costs":["1/1","3/2","2/1"]})");
}

TEST(IO, MalformedInstances) {
  EXPECT_THROW(io::instance_from_json(io::Json::parse(R"({"n": 2, "sizes": [2, 3, 4], "demand": 5})")), InputError);
  EXPECT_THROW(io::instance_from_json(io::Json::parse(R"({"n": 3, "sizes": [2, 3, 4]})")), InputError);
  EXPECT_THROW(io::instance_from_json(io::Json::parse(R"({"n": 3, "sizes": [2, "x", 4], "demand": 5})")), InputError);
  EXPECT_THROW(io::instance_from_json(io::Json::parse(R"({"n": 3, "sizes": [2, 3, 4], "demand": 5, "costs": [1]})")),
               InputError);
  EXPECT_THROW(io::instance_from_json(io::Json::parse(R"([1, 2])")), InputError);
}

TEST(IO, FacilityAndSolution) {
  auto inst = io::facility_from_json(
      io::Json::parse(R"({"n": 2, "capacities": [3, 2], "demand": 4, "open_costs": [1, 1], "unit_costs": ["1/2", 0]})"));
  EXPECT_EQ(inst.capacities(), (std::vector<std::int64_t>{3, 2}));
  ASSERT_TRUE(inst.unit_costs().has_value());
  EXPECT_EQ((*inst.unit_costs())[0], frac(1, 2));
  auto sol = io::solution_from_json(io::Json::parse(R"({"y": [1, 1], "x": ["3/4", "1/4"]})"), 2);
  EXPECT_EQ(sol.x, (std::vector<Rational>{frac(3, 4), frac(1, 4)}));
  EXPECT_EQ(io::solution_to_json(sol, 2).dump(), R"({"y":[1,1],"x":["3/4","1/4"]})");
  EXPECT_THROW(io::solution_from_json(io::Json::parse(R"({"y": [1], "x": ["1/1"]})"), 2), InputError);
  EXPECT_THROW(io::solution_from_json(io::Json::parse(R"({"y": [1, 2], "x": [1, 0]})"), 2), InputError);
}

TEST(IO, EFRoundTrip) {
  KnapsackInstance inst({2, 3, 4}, 5);
  auto proto = build_kc_protocol(inst, 1);
  auto sys = emit_ef(proto, enumerate_rows_and_columns(inst).infeasible);
  const std::string text = io::ef_to_json(sys).dump();
  auto back = io::ef_from_json(io::Json::parse(text));
  EXPECT_EQ(io::ef_to_json(back).dump(), text);
  ASSERT_EQ(back.rows.size(), sys.rows.size());
  for (std::size_t r = 0; r < sys.rows.size(); ++r) {
    EXPECT_EQ(back.rows[r].y_coeffs, sys.rows[r].y_coeffs);
    EXPECT_EQ(back.rows[r].x_coeffs, sys.rows[r].x_coeffs);
    EXPECT_EQ(back.rows[r].constant, sys.rows[r].constant);
    EXPECT_EQ(back.rows[r].set, sys.rows[r].set);
  }
  auto bad = io::Json::parse(text);
  bad["rows"][0]["y_coeffs"]["not-a-leaf"] = "1/1";
  EXPECT_THROW(io::ef_from_json(bad), InputError);
}

TEST(IO, RationalList) {
  EXPECT_EQ(io::parse_rational_list("1,1/2,3"), (std::vector<Rational>{1, frac(1, 2), 3}));
  EXPECT_THROW(io::parse_rational_list(""), InputError);
  EXPECT_THROW(io::parse_rational_list("1,,2"), InputError);
}
