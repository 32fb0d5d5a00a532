#include "k3taut/hilb.hpp"
#include "k3taut/verifier.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace k3taut;
using k3test::fac;

namespace {

const K3Ring ring;

Factor aux(int s) { return Factor::aux(s); }

HilbExpr gen(int level, FactorSet fs, Factor t, int i) { return HilbExpr::ch(level, fs, t, i); }

HilbExpr cls(int level, const TautClass& c) { return HilbExpr::from_class(level, c); }

NestedExpr nested_zero(int level, FactorSet fs, Factor fresh) { return NestedExpr{level, fs, fresh, {}}; }

NestedExpr nested_mul(const NestedExpr& a, const NestedExpr& b) {
  NestedExpr out = nested_zero(a.level, a.factors, a.fresh);
  for (std::size_t i = 0; i < a.coeffs.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs.size(); ++j) {
      auto prod = hilb_mul(ring, a.coeffs[i], b.coeffs[j]);
      for (const auto& [t, c] : prod.terms()) out.add(static_cast<int>(i + j), t, c);
    }
  return out;
}

bool nested_equal(const NestedExpr& a, const NestedExpr& b) {
  std::size_t n = std::max(a.coeffs.size(), b.coeffs.size());
  for (std::size_t j = 0; j < n; ++j) {
    HilbExpr x = j < a.coeffs.size() ? a.coeffs[j] : HilbExpr(a.level, a.factors);
    HilbExpr y = j < b.coeffs.size() ? b.coeffs[j] : HilbExpr(b.level, b.factors);
    if (!(x == y)) return false;
  }
  return true;
}

// psi^* ch_i(Ibar_{n+1}^{(t)}) through the unnormalized sheaves:
// I_{n+1} = I_n - L O_Delta with ch(O_Delta) = Delta - 2 c x c, then
// ch_2(Ibar) = ch_2(I) + n c^{(t)} at both levels.
NestedExpr psi_generator_oracle(int n, FactorSet fs, Factor fresh, Factor t, int i) {
  NestedExpr out = nested_zero(n, fs, fresh);
  auto put = [&](int lam, const HilbExpr& e) {
    for (const auto& [term, c] : e.terms()) out.add(lam, term, c);
  };
  put(0, HilbExpr::ch(n, fs, t, i, false));
  if (i >= 2) put(i - 2, cls(n, ring.diagonal(fs, fresh, t)) * (Rational(-1) / factorial(i - 2)));
  if (i >= 4)
    put(i - 4, cls(n, ring.mul(ring.point(fs, fresh), ring.point(fs, t))) * (Rational(2) / factorial(i - 4)));
  if (i == 2) put(0, cls(n, ring.point(fs, t)) * Rational(n + 1));
  return out;
}

InstanceSpec all_omega(int n, int l, std::vector<int> indices) {
  InstanceSpec s;
  s.n = n;
  s.l = l;
  for (int t = 1; t <= l; ++t) s.omega.push_back(t);
  s.indices = std::move(indices);
  return s;
}

}  // namespace

TEST_CASE("Chern character generators and their normalizations") {
  FactorSet fs{fac(1)};
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 0, false) == HilbExpr::one(3, fs));
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 1, false).empty());
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 0).empty());
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 1).empty());
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 2, false) == gen(3, fs, fac(1), 2) - cls(3, ring.point(fs, fac(1))) * Rational(3));
  REQUIRE(HilbExpr::ch(3, fs, fac(1), 5, false) == gen(3, fs, fac(1), 5));
  REQUIRE(HilbExpr::ch(1, fs, fac(1), 5).empty());  // above the ambient dimension 4
  REQUIRE_THROWS_AS(HilbExpr(1, FactorSet{Factor::distinguished()}), ShapeError);
}

TEST_CASE("products drop components above the ambient dimension") {
  FactorSet fs{fac(1)};
  auto a = gen(1, fs, fac(1), 2);
  auto b = gen(1, fs, fac(1), 4);
  REQUIRE(hilb_mul(ring, a, a).size() == 1);
  REQUIRE(hilb_mul(ring, a, b).empty());
}

TEST_CASE("base evaluation of single generators") {
  FactorSet fs{fac(1)};
  FactorSet with0 = fs.with(Factor::distinguished());
  auto zero = Factor::distinguished();
  REQUIRE(base_evaluate(ring, gen(1, fs, fac(1), 2)) == ring.normalized_diagonal(with0, zero, fac(1)) * Rational(-1));
  REQUIRE(base_evaluate(ring, gen(1, fs, fac(1), 4)) ==
          ring.mul(ring.point(with0, zero), ring.point(with0, fac(1))) * Rational(2));
  REQUIRE(base_evaluate(ring, gen(1, fs, fac(1), 3)).empty());
  REQUIRE_THROWS(base_evaluate(ring, gen(2, fs, fac(1), 2)));
}

TEST_CASE("base evaluation is multiplicative") {
  FactorSet fs = FactorSet::range(1, 2);
  FactorSet with0 = FactorSet::range(0, 2);
  auto zero = Factor::distinguished();
  auto prod = hilb_mul(ring, gen(1, fs, fac(1), 2), gen(1, fs, fac(2), 2));
  auto expected = ring.mul(ring.normalized_diagonal(with0, zero, fac(1)), ring.normalized_diagonal(with0, zero, fac(2)));
  REQUIRE(base_evaluate(ring, prod) == expected);
  REQUIRE_FALSE(expected.empty());
}

TEST_CASE("build_gamma at level one reproduces the triple product") {
  auto spec = all_omega(1, 3, {2, 2, 2});
  auto gamma = build_gamma(ring, spec);
  REQUIRE(gamma.size() == 1);
  FactorSet with0 = FactorSet::range(0, 3);
  auto zero = Factor::distinguished();
  TautClass expected = ring.one(with0);
  for (int t = 1; t <= 3; ++t)
    expected = ring.raw_mul(expected, ring.normalized_diagonal(with0, zero, fac(t)) * Rational(-1));
  REQUIRE(ring.normalize(expected).empty());
  REQUIRE(base_evaluate(ring, gamma).empty());
}

TEST_CASE("build_gamma vanishes whenever an index is one") {
  auto spec = all_omega(2, 5, {2, 1, 2, 2, 2});
  REQUIRE(build_gamma(ring, spec).empty());
}

TEST_CASE("build_gamma rejects instances below the dimension bound") {
  InstanceSpec spec;
  spec.n = 1;
  spec.k = 1;
  spec.l = 1;
  spec.alpha = std::make_shared<AlphaNode>(AlphaNode::cx(1));
  spec.theta = {1};
  spec.assignment = {{1, 1}};
  spec.indices = {4};
  REQUIRE_THROWS_AS(build_gamma(ring, spec), std::invalid_argument);
  REQUIRE(verify_instance(ring, spec).status == Status::InputError);

  // The product itself is still zero: c^{(s)} c^{(s)} = 0.
  FactorSet fs{aux(1), fac(1)};
  auto ch4 = ring.ch_O_diagonal_bar(fs, aux(1), fac(1)).at(4);
  REQUIRE(ring.mul(ring.point(fs, aux(1)), ch4).empty());
}

TEST_CASE("instance validation") {
  auto spec = all_omega(1, 5, {2, 2, 2, 2, 2});
  REQUIRE(validate(spec, ring.surface()) == 0);
  auto bad = spec;
  bad.theta = {1};
  REQUIRE_THROWS(validate(bad, ring.surface()));  // overlap with omega
  bad = spec;
  bad.omega = {1, 2, 3, 4};
  REQUIRE_THROWS(validate(bad, ring.surface()));  // not a cover
  bad = spec;
  bad.indices = {2, 2};
  REQUIRE_THROWS(validate(bad, ring.surface()));
  bad = all_omega(2, 6, {2, 2, 2, 2, 2, 2});
  bad.alpha = std::make_shared<AlphaNode>(AlphaNode::add({AlphaNode::one(), AlphaNode::cx(1)}));
  bad.k = 1;
  REQUIRE_THROWS(validate(bad, ring.surface()));  // inhomogeneous
  bad = all_omega(2, 4, {2, 2, 2, 2});
  REQUIRE_THROWS(validate(bad, ring.surface()));  // d + l = 2n + 2k
}

TEST_CASE("psi pullback of single generators matches the unnormalized route") {
  for (int n = 1; n <= 3; ++n) {
    FactorSet fs{aux(1), fac(1)};
    for (int i = 2; i <= 6; ++i) {
      auto pulled = psi_pullback(ring, gen(n + 1, fs, fac(1), i));
      REQUIRE(pulled.fresh == aux(0));
      REQUIRE(pulled.level == n);
      auto oracle = psi_generator_oracle(n, fs.with(aux(0)), aux(0), fac(1), i);
      REQUIRE(nested_equal(pulled, oracle));
    }
  }
}

TEST_CASE("psi pullback of ch_2 has the expected shape") {
  FactorSet fs{fac(1)};
  auto pulled = psi_pullback(ring, gen(2, fs, fac(1), 2));
  FactorSet big = fs.with(aux(0));
  auto expected = gen(1, big, fac(1), 2) - cls(1, ring.normalized_diagonal(big, aux(0), fac(1)));
  REQUIRE(pulled.coeffs.size() == 1);
  REQUIRE(pulled.coeffs[0] == expected);
}

TEST_CASE("psi pullback of inert classes and of zero") {
  FactorSet fs = FactorSet::range(1, 2);
  auto inert = cls(2, ring.diagonal(fs, fac(1), fac(2)));
  auto pulled = psi_pullback(ring, inert);
  REQUIRE(pulled.coeffs.size() == 1);
  REQUIRE(pulled.coeffs[0] == cls(1, ring.diagonal(fs.with(aux(0)), fac(1), fac(2))));
  REQUIRE(psi_pullback(ring, HilbExpr(2, fs)).empty());
  REQUIRE_THROWS(psi_pullback(ring, gen(1, fs, fac(1), 2)));
}

TEST_CASE("psi pullback is multiplicative on random monomials") {
  std::mt19937 rng(8);
  std::uniform_int_distribution<int> deg(2, 5), fct(1, 3);
  FactorSet fs = FactorSet::range(1, 3);
  for (int trial = 0; trial < 25; ++trial) {
    auto a = gen(3, fs, fac(fct(rng)), deg(rng));
    auto b = gen(3, fs, fac(fct(rng)), deg(rng)) + cls(3, ring.diagonal(fs, fac(1), fac(2)));
    auto lhs = psi_pullback(ring, hilb_mul(ring, a, b));
    auto rhs = nested_mul(psi_pullback(ring, a), psi_pullback(ring, b));
    REQUIRE(nested_equal(lhs, rhs));
  }
}

TEST_CASE("sigma pushforward of low lambda powers") {
  const int n = 2;
  FactorSet fs{aux(0), fac(1)};
  auto f = aux(0);
  auto images = sigma_lambda_images(ring, n, fs, f, 4);
  REQUIRE(images[0] == HilbExpr::one(n, fs));
  REQUIRE(images[1].empty());
  // c_2(-I) = ch_2(I) once ch_1 = 0
  REQUIRE(images[2] == gen(n, fs, f, 2) - cls(n, ring.point(fs, f)) * Rational(n));
  // -c_3(-I) = 2 ch_3(I)
  REQUIRE(images[3] == gen(n, fs, f, 3) * Rational(2));
  for (int j = 0; j <= 4; ++j)
    for (int d : images[j].codims()) REQUIRE(d == j);
}

TEST_CASE("sigma pushforward keeps lambda-free coefficients") {
  FactorSet fs{aux(0), fac(1)};
  NestedExpr e{1, fs, aux(0), {gen(1, fs, fac(1), 2), HilbExpr(1, fs)}};
  e.at(1) = cls(1, ring.point(fs, fac(1)));
  auto pushed = sigma_pushforward(ring, e);
  REQUIRE(pushed == gen(1, fs, fac(1), 2));
}

TEST_CASE("verify_zero: level one triple product certifies") {
  auto v = verify_instance(ring, all_omega(1, 3, {2, 2, 2}));
  REQUIRE(v.status == Status::CertifiedZero);
}

TEST_CASE("verify_zero: generalized identity at level two certifies") {
  auto v = verify_instance(ring, all_omega(2, 5, {2, 2, 2, 2, 2}));
  REQUIRE(v.status == Status::CertifiedZero);
  int max_depth = 0;
  for (const auto& e : v.trace) max_depth = std::max(max_depth, e.depth);
  REQUIRE(max_depth == 1);
}

TEST_CASE("verify_zero: a nonvanishing class is not certified") {
  FactorSet fs{fac(1)};
  auto v = verify_zero(ring, gen(2, fs, fac(1), 2));
  REQUIRE(v.status == Status::Inconclusive);
  REQUIRE_FALSE(v.residual.empty());
}

TEST_CASE("verify_zero: the term ceiling yields Inconclusive") {
  auto spec = all_omega(2, 5, {2, 2, 2, 2, 2});
  VerifyOptions opts;
  opts.term_ceiling = 3;
  auto v = verify_instance(ring, spec, opts);
  REQUIRE(v.status == Status::Inconclusive);
  REQUIRE(v.reason.find("ceiling") != std::string::npos);
}

TEST_CASE("verify_zero: mixed instance with a diagonal sheaf factor") {
  InstanceSpec spec;
  spec.n = 1;
  spec.k = 1;
  spec.l = 3;
  spec.alpha = std::make_shared<AlphaNode>(AlphaNode::cx(1));
  spec.omega = {2, 3};
  spec.theta = {1};
  spec.assignment = {{1, 1}};
  spec.indices = {2, 2, 2};
  REQUIRE(verify_instance(ring, spec).status == Status::CertifiedZero);
}

TEST_CASE("recursion depth and aux labels at level three") {
  auto spec = all_omega(3, 7, {2, 2, 2, 2, 2, 2, 2});
  auto gamma = build_gamma(ring, spec);
  auto first = sigma_pushforward(ring, psi_pullback(ring, gamma));
  auto second = sigma_pushforward(ring, psi_pullback(ring, first));
  REQUIRE(second.level() == 1);
  REQUIRE(second.factors() == spec.factors().with(aux(0)).with(aux(-1)));
}

TEST_CASE("below the dimension bound the verifier does not certify") {
  auto spec = all_omega(2, 4, {2, 2, 2, 2});
  REQUIRE_THROWS_AS(build_gamma(ring, spec), std::invalid_argument);
  auto gamma = build_gamma_unchecked(ring, spec);
  REQUIRE_FALSE(gamma.empty());
  auto v = verify_zero(ring, gamma);
  REQUIRE(v.status == Status::Inconclusive);
  REQUIRE_FALSE(v.residual.empty());

  auto one = all_omega(1, 2, {2, 2});
  REQUIRE(verify_zero(ring, build_gamma_unchecked(ring, one)).status == Status::Inconclusive);
}
