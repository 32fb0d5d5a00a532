#pragma once

#include "k3taut/k3_ring.hpp"
#include "k3taut/newton.hpp"

#include <boost/container/small_vector.hpp>
#include <boost/container_hash/hash.hpp>

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace k3taut {

struct TermCeilingExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// ch_i(Ibar_n^{(t)}): the Chern character of the rank-zero universal sheaf
/// paired with X-factor t. The level n is carried by the enclosing HilbExpr.
/// Packed as slot << 5 | degree inside monomials.
struct ChGen {
  Factor factor;
  int degree = 0;

  static constexpr int kMaxDegree = 31;

  std::uint16_t code() const { return static_cast<std::uint16_t>(factor.slot() << 5 | degree); }
  static ChGen decode(std::uint16_t c) { return ChGen{Factor(static_cast<std::uint8_t>(c >> 5)), c & 31}; }

  std::string to_string() const { return "ch" + std::to_string(degree) + "(" + factor.name() + ")"; }
};

using Monomial = boost::container::small_vector<std::uint16_t, 6>;

inline int monomial_codim(const Monomial& m) {
  int c = 0;
  for (auto g : m) c += g & 31;
  return c;
}

inline Monomial monomial_product(const Monomial& a, const Monomial& b) {
  Monomial out;
  out.resize(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), out.begin());
  return out;
}

struct HilbTerm {
  Monomial mono;
  DecoratedPartition part;

  int codim() const { return monomial_codim(mono) + part.codim(); }
  friend bool operator==(const HilbTerm& a, const HilbTerm& b) { return a.mono == b.mono && a.part == b.part; }
  friend bool operator<(const HilbTerm& a, const HilbTerm& b) {
    if (a.mono != b.mono) return std::lexicographical_compare(a.mono.begin(), a.mono.end(), b.mono.begin(), b.mono.end());
    return a.part < b.part;
  }
};

struct HilbTermHash {
  std::size_t operator()(const HilbTerm& t) const {
    std::size_t h = t.part.hash();
    for (auto g : t.mono) boost::hash_combine(h, g);
    return h;
  }
};

/// Tautological class on X^[n] x X^F: a polynomial in ch_i(Ibar_n^{(t)}),
/// t in F, with k3_ring coefficients. Components above the ambient dimension
/// 2n + 2|F| vanish and are never stored.
class HilbExpr {
 public:
  using TermMap = std::unordered_map<HilbTerm, Rational, HilbTermHash>;

  HilbExpr() = default;
  HilbExpr(int level, FactorSet factors) : level_(level), factors_(factors) {
    if (level < 1) throw std::invalid_argument("Hilbert scheme level must be at least 1");
    if (factors.contains(Factor::distinguished()))
      throw ShapeError("factor 0 is reserved for the base-case surface");
  }

  static HilbExpr one(int level, FactorSet factors) {
    HilbExpr e(level, factors);
    e.add(HilbTerm{}, Rational(1));
    return e;
  }

  /// Pulls a class on X^F back to X^[n] x X^F.
  static HilbExpr from_class(int level, const TautClass& c) {
    HilbExpr e(level, c.factors());
    for (const auto& [p, coef] : c.terms()) e.add(HilbTerm{{}, p}, coef);
    return e;
  }

  /// ch_i(Ibar_n^{(t)}). With normalized = false, returns ch_i(I_n^{(t)}) instead,
  /// using ch_0(I) = 1, ch_1(I) = 0 and ch_2(I_n) = ch_2(Ibar_n) - n c^{(t)}.
  static HilbExpr ch(int level, FactorSet factors, Factor t, int i, bool normalized = true) {
    if (!factors.contains(t)) throw InvalidFactor("factor " + t.name() + " not in " + factors.to_string());
    if (i < 0) throw std::invalid_argument("negative Chern character degree");
    HilbExpr e(level, factors);
    if (i > e.ambient_dim()) return e;
    if (i > ChGen::kMaxDegree) throw std::invalid_argument("Chern character degree too large");
    if (i >= 2) e.add(HilbTerm{{ChGen{t, i}.code()}, {}}, Rational(1));
    if (!normalized) {
      if (i == 0) e.add(HilbTerm{}, Rational(1));
      if (i == 2) e.add(HilbTerm{{}, DecoratedPartition(Blocks{Block{t.bit(), Decoration::pt()}})}, Rational(-level));
    }
    return e;
  }

  int level() const { return level_; }
  FactorSet factors() const { return factors_; }
  int ambient_dim() const { return 2 * level_ + 2 * factors_.size(); }
  const TermMap& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const HilbTerm& t, const Rational& c) {
    if (c == 0 || t.codim() > ambient_dim()) return;
    auto [it, inserted] = terms_.try_emplace(t, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  HilbExpr& operator+=(const HilbExpr& o) {
    check_same_shape(o);
    for (const auto& [t, c] : o.terms_) add(t, c);
    return *this;
  }
  HilbExpr& operator-=(const HilbExpr& o) {
    check_same_shape(o);
    for (const auto& [t, c] : o.terms_) add(t, -c);
    return *this;
  }
  HilbExpr& operator*=(const Rational& s) {
    if (s == 0) terms_.clear();
    for (auto& [t, c] : terms_) c *= s;
    return *this;
  }
  friend HilbExpr operator+(HilbExpr a, const HilbExpr& b) { return a += b; }
  friend HilbExpr operator-(HilbExpr a, const HilbExpr& b) { return a -= b; }
  friend HilbExpr operator*(HilbExpr a, const Rational& s) { return a *= s; }

  friend bool operator==(const HilbExpr& a, const HilbExpr& b) {
    return a.level_ == b.level_ && a.factors_ == b.factors_ && a.terms_ == b.terms_;
  }

  std::set<int> codims() const {
    std::set<int> out;
    for (const auto& [t, c] : terms_) out.insert(t.codim());
    return out;
  }

  std::vector<std::pair<HilbTerm, Rational>> sorted_terms() const {
    std::vector<std::pair<HilbTerm, Rational>> v(terms_.begin(), terms_.end());
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [t, c] : sorted_terms()) {
      std::string body;
      for (auto g : t.mono) body += (body.empty() ? "" : "*") + ChGen::decode(g).to_string();
      if (!t.part.is_identity() || body.empty()) body += (body.empty() ? "" : "*") + t.part.to_string();
      std::string coef = c.get_str();
      if (s.empty())
        s = coef + "*" + body;
      else if (coef[0] == '-')
        s += " - " + coef.substr(1) + "*" + body;
      else
        s += " + " + coef + "*" + body;
    }
    return s;
  }

  void check_same_shape(const HilbExpr& o) const {
    if (level_ != o.level_ || factors_ != o.factors_)
      throw ShapeError("Hilbert expressions live on different spaces");
  }

 private:
  int level_ = 1;
  FactorSet factors_;
  TermMap terms_;
};

/// Tracks the largest intermediate expression and enforces the term ceiling.
struct TermBudget {
  std::size_t ceiling = 5'000'000;
  std::size_t peak = 0;

  void observe(std::size_t terms) {
    if (terms > peak) peak = terms;
    if (terms > ceiling)
      throw TermCeilingExceeded("intermediate expression has " + std::to_string(terms) + " terms, ceiling is " +
                                std::to_string(ceiling));
  }
};

inline HilbExpr hilb_mul(const K3Ring& ring, const HilbExpr& a, const HilbExpr& b, TermBudget* budget = nullptr) {
  a.check_same_shape(b);
  HilbExpr out(a.level(), a.factors());
  const int dim = a.ambient_dim();
  K3Ring::TermMap parts;
  for (const auto& [ta, ca] : a.terms()) {
    const int da = ta.codim();
    for (const auto& [tb, cb] : b.terms()) {
      if (da + tb.codim() > dim) continue;
      Monomial mono = monomial_product(ta.mono, tb.mono);
      parts.clear();
      ring.multiply_terms(ta.part, tb.part, ca * cb, parts);
      for (auto& [p, c] : parts) out.add(HilbTerm{mono, p}, c);
    }
    if (budget) budget->observe(out.size());
  }
  return out;
}

/// Polynomial in lambda = c_1(O_{P(I_n)}(1)) with coefficients pulled back
/// from X^[n] x X^F along sigma. coeffs[j] multiplies lambda^j.
struct NestedExpr {
  int level = 1;
  FactorSet factors;
  Factor fresh;
  std::vector<HilbExpr> coeffs;

  int ambient_dim() const { return 2 * level + 2 * factors.size(); }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& c : coeffs) n += c.size();
    return n;
  }

  bool empty() const { return size() == 0; }

  HilbExpr& at(int j) {
    while (static_cast<int>(coeffs.size()) <= j) coeffs.emplace_back(level, factors);
    return coeffs[j];
  }

  void add(int j, const HilbTerm& t, const Rational& c) {
    if (j + t.codim() > ambient_dim()) return;
    at(j).add(t, c);
  }

  NestedExpr times_lambda() const {
    NestedExpr out{level, factors, fresh, {}};
    out.coeffs.emplace_back(level, factors);
    for (const auto& c : coeffs) {
      out.coeffs.push_back(HilbExpr(level, factors));
      for (const auto& [t, v] : c.terms()) out.add(static_cast<int>(out.coeffs.size()) - 1, t, v);
    }
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t j = 0; j < coeffs.size(); ++j) {
      if (coeffs[j].empty()) continue;
      if (!s.empty()) s += " + ";
      s += "lambda^" + std::to_string(j) + "*(" + coeffs[j].to_string() + ")";
    }
    return s.empty() ? "0" : s;
  }
};

namespace detail {

struct Piece {
  int lambda;
  Monomial mono;
  DecoratedPartition part;
  Rational coef;
};

inline DecoratedPartition points(std::initializer_list<Factor> fs) {
  Blocks b;
  for (auto f : fs) b.push_back(Block{f.bit(), Decoration::pt()});
  return DecoratedPartition(std::move(b));
}

/// psi^* ch_i(Ibar_{n+1}^{(t)}) from the K-theory identity
/// Ibar_{n+1} = Ibar_n - L O_{Dbar_{ft}} - (L-1) O_{c^{(t)}}, with ch(L) = e^lambda.
/// For i >= 3 the two c^{(t)} contributions cancel.
inline std::vector<Piece> psi_pieces(ChGen g, Factor fresh) {
  const int i = g.degree;
  const Factor t = g.factor;
  std::vector<Piece> out;
  out.push_back({0, {g.code()}, {}, Rational(1)});
  const Rational inv = Rational(1) / factorial(i - 2);
  out.push_back({i - 2, {}, DecoratedPartition(Blocks{Block{fresh.bit() | t.bit(), Decoration::fund()}}), -inv});
  if (i == 2) out.push_back({0, {}, points({t}), Rational(1)});
  if (i >= 4) out.push_back({i - 4, {}, points({fresh, t}), Rational(2) / factorial(i - 4)});
  return out;
}

struct State {
  int lambda;
  Monomial mono;
  DecoratedPartition part;
  Rational coef;
};

}  // namespace detail

/// psi^*: classes on X^[n+1] x X^F to classes on X^[n,n+1] x X^F, written as a
/// lambda-polynomial over X^[n] x X^{F + fresh}. The fresh label is
/// FactorSet::fresh_aux().
inline NestedExpr psi_pullback(const K3Ring& ring, const HilbExpr& e, TermBudget* budget = nullptr) {
  if (e.level() < 2) throw std::invalid_argument("psi pullback needs level at least 2; use base_evaluate at level 1");
  const Factor fresh = e.factors().fresh_aux();
  NestedExpr out{e.level() - 1, e.factors().with(fresh), fresh, {}};
  const int dim = out.ambient_dim();

  std::unordered_map<std::uint16_t, std::vector<detail::Piece>> pieces;
  std::vector<detail::State> states, next;
  K3Ring::TermMap parts;
  for (const auto& [term, coef] : e.terms()) {
    states.clear();
    states.push_back({0, {}, term.part, coef});
    for (auto g : term.mono) {
      auto it = pieces.find(g);
      if (it == pieces.end()) it = pieces.emplace(g, detail::psi_pieces(ChGen::decode(g), fresh)).first;
      next.clear();
      for (const auto& s : states) {
        for (const auto& pc : it->second) {
          int lam = s.lambda + pc.lambda;
          if (lam + monomial_codim(s.mono) + monomial_codim(pc.mono) + s.part.codim() + pc.part.codim() > dim) continue;
          Monomial mono = monomial_product(s.mono, pc.mono);
          parts.clear();
          ring.multiply_terms(s.part, pc.part, s.coef * pc.coef, parts);
          for (auto& [p, c] : parts) next.push_back({lam, mono, p, c});
        }
      }
      std::swap(states, next);
    }
    for (const auto& s : states) out.add(s.lambda, HilbTerm{s.mono, s.part}, s.coef);
    if (budget) budget->observe(out.size());
  }
  return out;
}

/// (-1)^j c_j(-I_n^{(f)}) for j = 0..N on X^[n] x X^F, via Newton's identities
/// with ch(-I_n) = -ch(I_n).
inline std::vector<HilbExpr> sigma_lambda_images(const K3Ring& ring, int level, FactorSet factors, Factor f, int N) {
  std::vector<HilbExpr> ch;
  ch.reserve(N + 1);
  for (int i = 0; i <= N; ++i) ch.push_back(HilbExpr::ch(level, factors, f, i, /*normalized=*/false) * Rational(-1));
  auto mul = [&](const HilbExpr& a, const HilbExpr& b) { return hilb_mul(ring, a, b); };
  auto c = newton_c_from_ch(ch, HilbExpr::one(level, factors), mul);
  for (int j = 1; j <= N; j += 2) c[j] *= Rational(-1);
  return c;
}

/// sigma_*: lambda^j -> (-1)^j c_j(-I_n^{(f)}), where f is the fresh factor
/// introduced by psi_pullback. Codimension is preserved (sigma is birational).
inline HilbExpr sigma_pushforward(const K3Ring& ring, const NestedExpr& e, TermBudget* budget = nullptr) {
  const Factor fresh = e.fresh;
  if (!e.factors.contains(fresh)) throw InvalidFactor("fresh factor " + fresh.name() + " missing");
  HilbExpr out(e.level, e.factors);
  int top = 0;
  for (std::size_t j = 0; j < e.coeffs.size(); ++j)
    if (!e.coeffs[j].empty()) top = static_cast<int>(j);
  auto images = sigma_lambda_images(ring, e.level, e.factors, fresh, top);
  for (int j = 0; j <= top && j < static_cast<int>(e.coeffs.size()); ++j) {
    if (e.coeffs[j].empty()) continue;
    if (j == 0) {
      out += e.coeffs[0];
    } else {
      out += hilb_mul(ring, e.coeffs[j], images[j], budget);
    }
    if (budget) budget->observe(out.size());
  }
  return out;
}

/// Level-1 substitution: Ibar_1^{(t)} = -O_{Dbar_{0t}}, so ch_2 = -Dbar_{0t},
/// ch_4 = 2 c^{(0)} c^{(t)} and every other ch_i vanishes. The result lives on
/// X^{F + 0}, where 0 is the X = X^[1] factor.
inline TautClass base_evaluate(const K3Ring& ring, const HilbExpr& e, TermBudget* budget = nullptr) {
  if (e.level() != 1) throw std::invalid_argument("base_evaluate needs level 1, got " + std::to_string(e.level()));
  const Factor zero = Factor::distinguished();
  const FactorSet fs = e.factors().with(zero);

  std::map<Monomial, TautClass> by_mono;
  for (const auto& [t, c] : e.terms()) {
    auto it = by_mono.try_emplace(t.mono, fs).first;
    it->second.add(t.part, c);
  }

  auto gen_value = [&](ChGen g) {
    TautClass v(fs);
    if (g.degree == 2) {
      v = ring.normalized_diagonal(fs, zero, g.factor) * Rational(-1);
    } else if (g.degree == 4) {
      v = ring.mul(ring.point(fs, zero), ring.point(fs, g.factor)) * Rational(2);
    }
    return v;
  };

  // Monomials are visited in sorted order, so prefixes are shared.
  std::map<Monomial, TautClass> prefix;
  prefix.emplace(Monomial{}, ring.one(fs));
  auto value_of = [&](const Monomial& m, auto& self) -> const TautClass& {
    auto it = prefix.find(m);
    if (it != prefix.end()) return it->second;
    Monomial head(m.begin(), m.end() - 1);
    const TautClass& h = self(head, self);
    TautClass v = h.empty() ? h : ring.mul(h, gen_value(ChGen::decode(m.back())));
    return prefix.emplace(m, std::move(v)).first->second;
  };

  TautClass out(fs);
  for (const auto& [m, cls] : by_mono) {
    const TautClass& v = value_of(m, value_of);
    if (v.empty()) continue;
    out += ring.mul(v, cls);
    if (budget) budget->observe(out.size());
  }
  return out;
}

}  // namespace k3taut
