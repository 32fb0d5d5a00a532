#include "k3taut/filtration.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

using namespace k3taut;
using k3test::fac;

namespace {

const K3Ring plain;
const K3Ring ps = point_square_ring(SurfaceModel{});

ZeroCycleExpr cycle(std::map<int, Rational> pts, Rational cx) {
  ZeroCycleExpr z;
  z.points = std::move(pts);
  z.cx = cx;
  return z;
}

}  // namespace

TEST_CASE("point-square rule follows from the diagonal relation") {
  auto cert = derive_point_square_rule(plain);
  REQUIRE(cert.certified);
  REQUIRE_FALSE(cert.target.empty());
  REQUIRE(cert.multiplied_first == cert.target);
  REQUIRE(cert.reduced_first.empty());

  auto cx = derive_point_square_rule(plain, PointSquareProbe::Cx);
  REQUIRE(cx.multiplied_first.empty());
  REQUIRE(cx.certified);
  auto div = derive_point_square_rule(plain, PointSquareProbe::Divisor);
  REQUIRE(div.multiplied_first.empty());
  REQUIRE(div.certified);

  REQUIRE_THROWS_AS(derive_point_square_rule(ps), std::invalid_argument);
}

TEST_CASE("the rule as used by the ring matches the derivation") {
  FactorSet fs = FactorSet::range(2, 3);
  auto y = [&](int t) { return ps.formal_point(fs, fac(t), 1) - ps.point(fs, fac(t)); };
  REQUIRE(ps.mul(y(2), y(3)).empty());
  // distinct points are not related
  auto z3 = ps.formal_point(fs, fac(3), 2) - ps.point(fs, fac(3));
  REQUIRE_FALSE(ps.mul(y(2), z3).empty());
}

TEST_CASE("boxtimes powers") {
  auto xi = cycle({{1, Rational(1)}}, Rational(-1));
  REQUIRE(boxtimes_power(ps, xi, 1).size() == 2);
  REQUIRE(boxtimes_power(ps, xi, 2).empty());
  REQUIRE_THROWS_AS(boxtimes_power(ps, xi, 0), std::invalid_argument);
  REQUIRE_THROWS_AS(boxtimes_power(plain, xi, 1), std::invalid_argument);
}

TEST_CASE("filtration index examples") {
  REQUIRE(filtration_index(ps, ZeroCycleExpr{}, 3).index == 0);
  REQUIRE(filtration_index(ps, cycle({{1, Rational(1)}}, Rational(-1)), 3).index == 1);
  REQUIRE(filtration_index(ps, cycle({{1, Rational(1)}, {2, Rational(1)}, {3, Rational(1)}}, Rational(-3)), 4).index == 3);
  REQUIRE(filtration_index(ps, cycle({{1, Rational(1)}, {2, Rational(-1)}}, Rational(0)), 3).index == 2);
  REQUIRE_THROWS_AS(filtration_index(ps, cycle({{1, Rational(1)}}, Rational(0)), 3), std::invalid_argument);
}

TEST_CASE("points on a rational curve behave like c_X") {
  auto xi = cycle({{1, Rational(1)}, {2, Rational(1)}}, Rational(-2));
  xi.rational_curve_points = {2};
  auto r = filtration_index(ps, xi, 3);
  REQUIRE(r.index == 1);
  xi.rational_curve_points = {1, 2};
  REQUIRE(filtration_index(ps, xi, 3).index == 0);
}

TEST_CASE("effective cycles of degree i have index at most i") {
  for (int i = 1; i <= 4; ++i) {
    auto r = filtration_index(ps, ZeroCycleExpr::effective(i), i);
    INFO("i=" << i);
    REQUIRE(r.index.has_value());
    REQUIRE(*r.index <= i);
    REQUIRE(r.monotone);
  }
}

TEST_CASE("no index is claimed when the bound is too small") {
  auto r = filtration_index(ps, ZeroCycleExpr::effective(3), 1);
  REQUIRE_FALSE(r.index.has_value());
  REQUIRE(r.residual_terms.size() == 2);
  REQUIRE(std::all_of(r.residual_terms.begin(), r.residual_terms.end(), [](auto n) { return n > 0; }));
}

TEST_CASE("vanishing is monotone and powers are symmetric") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coef(-3, 3), id(1, 3);
  for (int trial = 0; trial < 20; ++trial) {
    ZeroCycleExpr xi;
    for (int j = 0; j < 3; ++j) xi.points[id(rng)] += coef(rng);
    xi.cx = -xi.degree();
    auto r = filtration_index(ps, xi, 3);
    REQUIRE(r.index.has_value());
    REQUIRE(r.monotone);
    for (int m = *r.index + 1; m <= 4; ++m) REQUIRE(boxtimes_power(ps, xi, m).empty());

    auto p = boxtimes_power(ps, xi, 3);
    std::array<std::uint8_t, 64> swap{};
    std::iota(swap.begin(), swap.end(), std::uint8_t{0});
    std::swap(swap[fac(1).slot()], swap[fac(3).slot()]);
    REQUIRE(ps.relabel(p, swap) == p);
  }
}
