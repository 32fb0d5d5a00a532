#include "k3taut/io.hpp"
#include "k3taut/sampling.hpp"

#include <catch_amalgamated.hpp>

using namespace k3taut;
using io::json;

TEST_CASE("rationals parse from strings and integers") {
  REQUIRE(io::parse_rational(json("3/6")) == Rational(1, 2));
  REQUIRE(io::parse_rational(json("-7")) == Rational(-7));
  REQUIRE(io::parse_rational(json(4)) == Rational(4));
  REQUIRE_THROWS_AS(io::parse_rational(json("1/0")), io::InputError);
  REQUIRE_THROWS_AS(io::parse_rational(json("x")), io::InputError);
  REQUIRE_THROWS_AS(io::parse_rational(json(1.5)), io::InputError);
}

TEST_CASE("syntax errors carry line and column") {
  std::string text = "{\n  \"n\": 2,\n  \"k\": 0\n  \"l\": 5\n}\n";
  try {
    io::parse_text(text, "inst.json");
    FAIL("no exception");
  } catch (const io::InputError& e) {
    REQUIRE(e.line == 4);
    REQUIRE(e.column == 5);
    REQUIRE(std::string(e.what()).rfind("inst.json:4:5: ", 0) == 0);
  }
  auto [ln, col] = io::line_column("ab\ncd", 5);
  REQUIRE(ln == 2);
  REQUIRE(col == 2);
}

TEST_CASE("config parsing") {
  auto c = io::config_from_json(json::parse(R"({"schema_version": 1, "surface": {"gram": [["2", "1"], ["1", "-2"]]},
                                               "term_ceiling": 100, "parallelism": 3, "output": "r.json"})"));
  REQUIRE(c.surface.ns_rank() == 2);
  REQUIRE(c.surface.pairing(0, 1) == 1);
  REQUIRE(c.term_ceiling == 100);
  REQUIRE(c.workers() == 3);
  REQUIRE(io::config_from_json(io::config_to_json(c)) == c);

  auto d = io::config_from_json(json::parse(R"({"schema_version": 1})"));
  REQUIRE(d.surface == SurfaceModel{});
  REQUIRE_THROWS_AS(io::config_from_json(json::parse(R"({"schema_version": 1, "term_ceiling": 0})")), io::InputError);
  REQUIRE_THROWS_AS(io::config_from_json(json::parse(R"({"schema_version": 1, "surface": {"gram": [["1", "1"], ["1", "1"]]}})")),
                    io::InputError);
  REQUIRE_THROWS_AS(io::config_from_json(json::parse(R"({"schema_version": 2})")), io::InputError);
  REQUIRE_THROWS_AS(io::config_from_json(json::parse(R"({"surface": {}})")), io::InputError);
}

TEST_CASE("instance JSON round trips") {
  std::mt19937 rng(5);
  SurfaceModel surface;
  for (int i = 0; i < 40; ++i) {
    auto spec = sampling::random_instance(surface, 2, 2, {4, 5, 6}, {0, 2, 3, 4}, rng);
    auto j = io::instance_to_json(spec);
    REQUIRE(io::instance_from_json(j) == spec);
    REQUIRE(io::instance_from_json(json::parse(j.dump())) == spec);
  }
  AlphaNode a = AlphaNode::add({AlphaNode::scale(Rational(-1, 3), AlphaNode::diag(1, 2)), AlphaNode::ch(2, 2, false)});
  REQUIRE(io::alpha_from_json(io::alpha_to_json(a)) == a);
}

TEST_CASE("instance JSON errors") {
  auto base = json::parse(R"({"schema_version": 1, "n": 1, "k": 0, "l": 3, "omega": [1, 2, 3], "indices": [2, 2, 2]})");
  REQUIRE(io::instance_from_json(base).alpha->kind == AlphaNode::Kind::One);
  auto missing = base;
  missing.erase("indices");
  REQUIRE_THROWS_AS(io::instance_from_json(missing), io::InputError);
  auto bad_gen = base;
  bad_gen["alpha"] = {{"gen", "pt"}};
  REQUIRE_THROWS_AS(io::instance_from_json(bad_gen), io::InputError);
  auto bad_key = base;
  bad_key["assignment"] = {{"x", 1}};
  REQUIRE_THROWS_AS(io::instance_from_json(bad_key), io::InputError);
  auto wrong_type = base;
  wrong_type["n"] = "2";
  REQUIRE_THROWS_AS(io::instance_from_json(wrong_type), io::InputError);
}

TEST_CASE("filtration requests round trip") {
  io::FiltrationRequest r;
  r.cycle.points = {{1, Rational(1, 2)}, {4, Rational(-3)}};
  r.cycle.cx = Rational(5, 2);
  r.cycle.rational_curve_points = {4};
  r.max_m = 3;
  REQUIRE(io::filtration_from_json(io::filtration_to_json(r)) == r);
}

TEST_CASE("reports round trip and are deterministic") {
  K3Ring ring;
  InstanceSpec spec;
  spec.n = 2;
  spec.l = 5;
  spec.omega = {1, 2, 3, 4, 5};
  spec.indices.assign(5, 2);
  io::ReportRecord rec{io::instance_to_json(spec), verify_instance(ring, spec)};
  REQUIRE(rec.verdict.certified());
  auto j = io::report_to_json(rec);
  REQUIRE(io::report_from_json(j) == rec);
  REQUIRE(io::report_from_json(json::parse(j.dump(2))) == rec);

  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  REQUIRE(keys == std::vector<std::string>{"schema_version", "input", "verdict", "wall_time_ms", "peak_terms", "trace"});

  io::ReportRecord again{io::instance_to_json(spec), verify_instance(ring, spec)};
  REQUIRE(io::without_timing(io::report_to_json(again)).dump() == io::without_timing(j).dump());

  Verdict bad;
  bad.status = Status::Inconclusive;
  bad.reason = "term ceiling";
  bad.residual = "3*c(1)";
  io::ReportRecord other{json{{"identity", "x"}}, bad};
  REQUIRE(io::report_from_json(io::report_to_json(other)) == other);
}
