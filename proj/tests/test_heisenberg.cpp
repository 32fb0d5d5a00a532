#include "k3taut/heisenberg.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

using namespace k3taut;
using k3test::fac;

namespace {

const K3Ring ring;
const Heisenberg heis(ring);

Factor op(int p) { return Factor::op(p); }

std::array<std::uint8_t, 64> rename(std::initializer_list<std::pair<Factor, Factor>> pairs) {
  std::array<std::uint8_t, 64> m{};
  for (int i = 0; i < 64; ++i) m[i] = static_cast<std::uint8_t>(i);
  for (auto [from, to] : pairs) m[from.slot()] = to.slot();
  return m;
}

NCPoly closed_form_lowering(int i) {
  // q_{-(i+1)} = (1/i!) sum_j (-1)^j C(i, j) B^{i-j} A B^j
  NCPoly out;
  for (int j = 0; j <= i; ++j) {
    Rational c = factorial(i) / (factorial(j) * factorial(i - j)) / factorial(i);
    if (j % 2 == 1) c = -c;
    out[std::string(i - j, 'B') + "A" + std::string(j, 'B')] = c;
  }
  return out;
}

}  // namespace

TEST_CASE("contraction examples") {
  FactorSet fs = FactorSet::range(1, 2);
  REQUIRE(heis.contraction(ring.one(fs), fac(1), fac(2)) == ring.one(FactorSet{fac(1)}));
  REQUIRE(heis.contraction(ring.point(fs, fac(1)), fac(1), fac(2)) == ring.point(FactorSet{fac(1)}, fac(1)));
  K3Ring r2(SurfaceModel({{Rational(2), Rational(3)}, {Rational(3), Rational(-2)}}));
  Heisenberg h2(r2);
  auto g = r2.mul(r2.basis_divisor(fs, fac(1), 0), r2.basis_divisor(fs, fac(2), 1));
  REQUIRE(h2.contraction(g, fac(1), fac(2)) == r2.point(FactorSet{fac(1)}, fac(1)) * Rational(3));
  REQUIRE_THROWS_AS(heis.contraction(g, fac(1), fac(1)), InvalidFactor);
}

TEST_CASE("single lowering of a single creation") {
  auto s = heis.state({1}, ring.one(FactorSet{op(0)}), {});
  auto lowered = heis.lower(1, fac(1), s);
  auto expected = heis.vacuum(FactorSet{fac(1)});
  expected.comps.begin()->second *= Rational(-1);
  REQUIRE(lowered == expected);
  REQUIRE(heis.lower(1, fac(1), heis.vacuum()).empty());
}

TEST_CASE("lowering needs a matching part") {
  FactorSet fs{op(0), op(1)};
  auto s = heis.state({1, 1}, ring.point(fs, op(0)), {});
  REQUIRE(heis.lower(2, fac(1), s).empty());
}

TEST_CASE("double lowering exposes both factors with weight two") {
  FactorSet fs{op(0), op(1)};
  auto raw = ring.mul(ring.basis_divisor(fs, op(0), 0), ring.point(fs, op(1)));
  auto sym = heis.symmetrize(raw, {1, 1});
  REQUIRE(sym.size() == 2);
  auto s = heis.state({1, 1}, raw, {});
  auto twice = heis.lower(1, fac(2), heis.lower(1, fac(1), s));
  FockVector expected{FactorSet{fac(1), fac(2)}, {}};
  expected.add({}, ring.relabel(sym, rename({{op(0), fac(1)}, {op(1), fac(2)}})) * Rational(2));
  REQUIRE(twice == expected);
}

TEST_CASE("creation keeps parts descending and symmetric") {
  auto v = heis.create(1, fac(1), heis.vacuum());
  v = heis.create(2, fac(2), v);
  v = heis.create(1, fac(3), v);
  REQUIRE(v.comps.size() == 1);
  REQUIRE(v.comps.begin()->first == std::vector<int>{2, 1, 1});
  const auto& g = v.comps.begin()->second;
  REQUIRE(heis.symmetrize(g, {2, 1, 1}) == g);
}

TEST_CASE("Heisenberg relations on every basis state up to degree three") {
  std::size_t checked = 0;
  for (int k = 0; k <= 1; ++k) {
    FactorSet inert = FactorSet::range(1, k);
    Factor ua = fac(k + 1), ub = fac(k + 2);
    for (int n = 0; n <= 3; ++n) {
      auto states = n == 0 ? std::vector<FockVector>{heis.vacuum(inert)} : heis.basis_states(n, inert);
      for (const auto& s : states)
        for (int a : {-3, -2, -1, 1, 2, 3})
          for (int b : {-3, -2, -1, 1, 2, 3}) {
            auto ab = heis.apply(a, ua, heis.apply(b, ub, s));
            auto ba = heis.apply(b, ub, heis.apply(a, ua, s));
            REQUIRE(ab - ba == heis.commutator_value(a, ua, b, ub, s));
            ++checked;
          }
    }
  }
  REQUIRE(checked > 1000);
}

TEST_CASE("exact rank") {
  using Vec = std::unordered_map<int, Rational>;
  std::vector<Vec> v{{{1, Rational(1)}, {2, Rational(2)}}, {{1, Rational(2)}, {2, Rational(4)}}, {{3, Rational(1, 3)}}};
  REQUIRE(exact_rank(v) == 2);
  REQUIRE(exact_rank(std::vector<Vec>{}) == 0);
}

TEST_CASE("lowering strings are injective at desk scale") {
  for (int n = 1; n <= 3; ++n)
    for (int k = 0; k <= 1; ++k) {
      auto r = injectivity_check(heis, n, k);
      INFO("n=" << n << " k=" << k << " dim=" << r.domain_dim << " rank=" << r.rank);
      REQUIRE(r.domain_dim > 0);
      REQUIRE(r.injective);
    }
}

TEST_CASE("a single lowering string is not injective in degree two") {
  FactorSet inert;
  auto states = heis.basis_states(2, inert);
  std::vector<std::unordered_map<std::string, Rational>> images;
  for (const auto& s : states) {
    auto out = heis.lower(1, fac(2), heis.lower(1, fac(1), s));
    std::unordered_map<std::string, Rational> coords;
    for (const auto& [parts, g] : out.comps)
      for (const auto& [p, c] : g.terms()) coords.emplace(p.to_string(), c);
    images.push_back(coords);
  }
  REQUIRE(exact_rank(images) < states.size());
}

TEST_CASE("lowering closure derivations") {
  REQUIRE(generate_lowering_closure(1).empty());
  auto two = generate_lowering_closure(2);
  REQUIRE(two.size() == 1);
  REQUIRE(two[0].index == 2);
  REQUIRE(two[0].expansion == NCPoly{{"BA", Rational(1)}, {"AB", Rational(-1)}});

  auto four = generate_lowering_closure(4);
  REQUIRE(four.size() == 3);
  for (int i = 1; i <= 3; ++i) {
    REQUIRE(four[i - 1].index == i + 1);
    REQUIRE(four[i - 1].expansion == closed_form_lowering(i));
  }
  REQUIRE(four[1].to_string().find("q_{-3}") == 0);
}
