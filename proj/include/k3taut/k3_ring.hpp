#pragma once

#include "k3taut/factor.hpp"
#include "k3taut/partition.hpp"
#include "k3taut/rational.hpp"
#include "k3taut/surface.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace k3taut {

struct InvalidFactor : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A rational linear combination of decorated partitions on a fixed factor set,
/// modeling an element of R_*(X^l). Ring operations live on K3Ring.
class TautClass {
 public:
  using TermMap = std::unordered_map<DecoratedPartition, Rational, DecoratedPartitionHash>;

  TautClass() = default;
  explicit TautClass(FactorSet factors) : factors_(factors) {}

  static TautClass monomial(FactorSet factors, DecoratedPartition p, const Rational& c = 1) {
    TautClass t(factors);
    t.add(p, c);
    return t;
  }

  FactorSet factors() const { return factors_; }
  const TermMap& terms() const { return terms_; }
  TermMap& mutable_terms() { return terms_; }
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const DecoratedPartition& p, const Rational& c) {
    if (c == 0) return;
    if ((p.support() & ~factors_.mask()) != 0)
      throw ShapeError("term " + p.to_string() + " leaves factor set " + factors_.to_string());
    auto [it, inserted] = terms_.try_emplace(p, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  TautClass& operator+=(const TautClass& o) {
    check_same_shape(o);
    for (const auto& [p, c] : o.terms_) add(p, c);
    return *this;
  }
  TautClass& operator-=(const TautClass& o) {
    check_same_shape(o);
    for (const auto& [p, c] : o.terms_) add(p, -c);
    return *this;
  }
  TautClass& operator*=(const Rational& s) {
    if (s == 0) {
      terms_.clear();
      return *this;
    }
    for (auto& [p, c] : terms_) c *= s;
    return *this;
  }
  friend TautClass operator+(TautClass a, const TautClass& b) { return a += b; }
  friend TautClass operator-(TautClass a, const TautClass& b) { return a -= b; }
  friend TautClass operator*(TautClass a, const Rational& s) { return a *= s; }
  friend TautClass operator*(const Rational& s, TautClass a) { return a *= s; }
  TautClass operator-() const { return *this * Rational(-1); }

  friend bool operator==(const TautClass& a, const TautClass& b) {
    return a.factors_ == b.factors_ && a.terms_ == b.terms_;
  }

  std::set<int> codims() const {
    std::set<int> out;
    for (const auto& [p, c] : terms_) out.insert(p.codim());
    return out;
  }

  TautClass component(int codim) const {
    TautClass out(factors_);
    for (const auto& [p, c] : terms_)
      if (p.codim() == codim) out.terms_.emplace(p, c);
    return out;
  }

  std::vector<std::pair<DecoratedPartition, Rational>> sorted_terms() const {
    std::vector<std::pair<DecoratedPartition, Rational>> v(terms_.begin(), terms_.end());
    std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    return v;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [p, c] : sorted_terms()) {
      std::string coef = c.get_str();
      if (s.empty()) {
        s = coef + "*" + p.to_string();
      } else if (coef[0] == '-') {
        s += " - " + coef.substr(1) + "*" + p.to_string();
      } else {
        s += " + " + coef + "*" + p.to_string();
      }
    }
    return s;
  }

  void check_same_shape(const TautClass& o) const {
    if (factors_ != o.factors_)
      throw ShapeError("factor sets differ: " + factors_.to_string() + " vs " + o.factors_.to_string());
  }

 private:
  FactorSet factors_;
  TermMap terms_;
};

struct RingOptions {
  /// Enables ([x]-c_X)^{x2} = 0 for formal points sharing an id.
  bool point_square_rule = false;
};

/// Graded family i -> ch_i of a class; absent degrees are zero.
struct GradedClass {
  FactorSet factors;
  std::map<int, TautClass> parts;

  TautClass at(int i) const {
    auto it = parts.find(i);
    return it == parts.end() ? TautClass(factors) : it->second;
  }
};

/// The tautological ring of powers of a K3 surface X.
///
/// Every product is brought to normal form with four rules:
///   Delta_{B,b} * Delta_{C,g} = Delta_{B u C, b g (24 c_X)^{|B n C|-1}}   (excess intersection, c_2(TX) = 24 c_X)
///   Delta_{B,c_X}             = prod_{i in B} c_X^{(i)}                  (from c^{(0)} * Dbar_{01} = 0)
///   Delta_{B,D}, |B| >= 2     = sum_i D^{(i)} prod_{j != i} c^{(j)}         (push-forward of D^{(0)} Dbar_{01} Dbar_{02} = 0)
///   Delta_B, |B| >= 3         = sum_{i<j} Delta_{ij} c^{B-ij} - (|B|-2) sum_i c^{B-i}   (iterated Beauville-Voisin)
class K3Ring {
 public:
  using TermMap = TautClass::TermMap;

  explicit K3Ring(SurfaceModel surface = {}, RingOptions options = {})
      : surface_(std::move(surface)), options_(options) {}

  const SurfaceModel& surface() const { return surface_; }
  const RingOptions& options() const { return options_; }

  TautClass one(FactorSet f) const { return TautClass::monomial(f, DecoratedPartition{}); }

  TautClass point(FactorSet f, Factor t) const {
    require(f, t);
    return TautClass::monomial(f, DecoratedPartition(Blocks{Block{t.bit(), Decoration::pt()}}));
  }

  TautClass formal_point(FactorSet f, Factor t, int id) const {
    require(f, t);
    if (id < 0 || id > 255) throw std::invalid_argument("formal point id out of range");
    return TautClass::monomial(f, DecoratedPartition(Blocks{Block{t.bit(), Decoration::formal_pt(id)}}));
  }

  TautClass basis_divisor(FactorSet f, Factor t, int j) const {
    require(f, t);
    if (j < 0 || j >= surface_.ns_rank()) throw std::invalid_argument("divisor basis index out of range");
    return TautClass::monomial(f, DecoratedPartition(Blocks{Block{t.bit(), Decoration::div(j)}}));
  }

  /// Linear combination of basis divisors pulled back from factor t.
  TautClass divisor(FactorSet f, Factor t, const DivisorClass& d) const {
    d.check(surface_);
    TautClass out(f);
    for (int j = 0; j < surface_.ns_rank(); ++j)
      if (d.coeffs[j] != 0) out += basis_divisor(f, t, j) * d.coeffs[j];
    return out;
  }

  /// Small diagonal Delta_B without reduction (a single raw block).
  TautClass raw_diagonal(FactorSet f, const std::vector<Factor>& block) const {
    std::uint64_t m = 0;
    for (auto t : block) {
      require(f, t);
      if (m & t.bit()) throw InvalidFactor("repeated factor " + t.name() + " in diagonal");
      m |= t.bit();
    }
    return TautClass::monomial(f, DecoratedPartition(Blocks{Block{m, Decoration::fund()}}));
  }

  TautClass diagonal(FactorSet f, const std::vector<Factor>& block) const { return normalize(raw_diagonal(f, block)); }

  TautClass diagonal(FactorSet f, Factor r, Factor s) const {
    if (r == s) throw InvalidFactor("diagonal needs two distinct factors, got " + r.name() + " twice");
    return diagonal(f, std::vector<Factor>{r, s});
  }

  /// Dbar_{rs} = Delta_{rs} - c_X^{(s)}; the point class sits on the second argument.
  TautClass normalized_diagonal(FactorSet f, Factor r, Factor s) const {
    if (r == s) throw InvalidFactor("normalized diagonal needs r != s, got " + r.name() + " twice");
    return diagonal(f, r, s) - point(f, s);
  }

  /// ch(O_{Dbar_{rs}}) = Dbar_{rs} - 2 c^{(r)} c^{(s)}.
  GradedClass ch_O_diagonal_bar(FactorSet f, Factor r, Factor s) const {
    if (r == s) throw InvalidFactor("ch(O_Dbar) needs r != s, got " + r.name() + " twice");
    GradedClass g{f, {}};
    g.parts.emplace(2, normalized_diagonal(f, r, s));
    g.parts.emplace(4, mul(point(f, r), point(f, s)) * Rational(-2));
    return g;
  }

  TautClass mul(const TautClass& a, const TautClass& b) const {
    a.check_same_shape(b);
    TautClass out(a.factors());
    for (const auto& [pa, ca] : a.terms())
      for (const auto& [pb, cb] : b.terms()) multiply_terms(pa, pb, ca * cb, out.mutable_terms());
    return out;
  }

  /// Product that merges blocks (with excess and decoration products) but
  /// applies none of the size-reducing rewrites.
  TautClass raw_mul(const TautClass& a, const TautClass& b) const {
    a.check_same_shape(b);
    TautClass out(a.factors());
    for (const auto& [pa, ca] : a.terms())
      for (const auto& [pb, cb] : b.terms()) multiply_terms(pa, pb, ca * cb, out.mutable_terms(), false);
    return out;
  }

  TautClass normalize(const TautClass& a) const {
    TautClass out(a.factors());
    static const DecoratedPartition identity;
    for (const auto& [p, c] : a.terms()) multiply_terms(p, identity, c, out.mutable_terms());
    return out;
  }

  bool is_zero(const TautClass& a) const { return normalize(a).empty(); }

  /// Push-forward along the projection forgetting factor t.
  TautClass pushforward_forget(const TautClass& a, Factor t) const {
    if (!a.factors().contains(t)) throw InvalidFactor("cannot forget absent factor " + t.name());
    TautClass out(a.factors().without(t));
    for (const auto& [p, c] : a.terms()) {
      Blocks kept;
      bool vanishes = true;
      bool found = false;
      for (const auto& b : p.blocks()) {
        if (!(b.members & t.bit())) {
          kept.push_back(b);
          continue;
        }
        found = true;
        if (b.size() >= 2) {
          kept.push_back(Block{b.members & ~t.bit(), b.dec});
          vanishes = false;
        } else {
          // degree of the decoration on a singleton: only point classes have degree 1
          vanishes = !b.dec.is_point();
        }
      }
      if (!found || vanishes) continue;
      out.add(DecoratedPartition(std::move(kept)), c);
    }
    return out;
  }

  /// Flat pull-back along the projection that adds factor t.
  TautClass pullback_insert(const TautClass& a, Factor t) const {
    if (a.factors().contains(t)) throw ShapeError("factor " + t.name() + " already present");
    TautClass out(a.factors().with(t));
    out.mutable_terms() = a.terms();
    return out;
  }

  /// Renames factors. `map` sends each old slot to a new slot and must be
  /// injective on the factor set.
  TautClass relabel(const TautClass& a, const std::array<std::uint8_t, 64>& map) const {
    std::uint64_t image = 0;
    for (auto f : a.factors().elements()) {
      std::uint64_t bit = std::uint64_t{1} << map[f.slot()];
      if (image & bit) throw ShapeError("relabel map is not injective");
      image |= bit;
    }
    TautClass out{FactorSet(image)};
    for (const auto& [p, c] : a.terms()) {
      Blocks nb;
      for (const auto& b : p.blocks()) {
        std::uint64_t m = 0;
        for (auto f : FactorSet::elements_of(b.members)) m |= std::uint64_t{1} << map[f.slot()];
        nb.push_back(Block{m, b.dec});
      }
      out.add(DecoratedPartition(std::move(nb)), c);
    }
    return out;
  }

  /// Accumulates coef * (a * b) into `out`. With `reduce`, the result is in
  /// normal form; without it only block merging is performed.
  void multiply_terms(const DecoratedPartition& a, const DecoratedPartition& b, const Rational& coef, TermMap& out,
                      bool reduce = true) const {
    if (coef == 0) return;
    struct Comp {
      std::uint64_t members;
      Decoration dec;
      int excess;
    };
    boost::container::small_vector<Comp, 16> comps;
    for (const auto& blk : a.blocks()) comps.push_back(Comp{blk.members, blk.dec, 0});
    Rational scale = coef;
    for (const auto& blk : b.blocks()) {
      Comp cur{blk.members, blk.dec, 0};
      for (std::size_t i = comps.size(); i-- > 0;) {
        std::uint64_t overlap = comps[i].members & cur.members;
        if (!overlap) continue;
        cur.excess += comps[i].excess + std::popcount(overlap) - 1;
        if (cur.excess >= 2) return;  // (24 c_X)^2 = 0
        if (!multiply_decorations(cur.dec, comps[i].dec, scale)) return;
        cur.members |= comps[i].members;
        comps.erase(comps.begin() + static_cast<std::ptrdiff_t>(i));
      }
      comps.push_back(cur);
    }
    for (auto& comp : comps) {
      if (comp.excess == 0) continue;
      if (comp.dec.kind != DecKind::Fund) return;  // c_X times a positive-codimension class
      comp.dec = Decoration::pt();
      scale *= 24;
    }

    if (!reduce) {
      Blocks blocks;
      for (const auto& comp : comps) blocks.push_back(Block{comp.members, comp.dec});
      accumulate(out, DecoratedPartition(std::move(blocks)), scale);
      return;
    }

    // Fast path: every component already normal.
    bool normal = true;
    for (const auto& comp : comps) {
      int sz = std::popcount(comp.members);
      if (comp.dec.kind == DecKind::Fund ? sz > 2 : sz > 1) {
        normal = false;
        break;
      }
    }
    Expansion terms;
    if (normal) {
      Blocks blocks;
      for (const auto& comp : comps) blocks.push_back(Block{comp.members, comp.dec});
      terms.emplace_back(std::move(blocks), Rational(1));
    } else {
      terms.emplace_back(Blocks{}, Rational(1));
      for (const auto& comp : comps) {
        Expansion piece;
        expand_block(Block{comp.members, comp.dec}, piece);
        terms = cross(terms, piece);
      }
    }
    for (auto& [blocks, c] : terms) {
      if (options_.point_square_rule && has_repeated_formal_point(blocks)) {
        Expansion reduced;
        apply_point_square(blocks, reduced);
        for (auto& [rb, rc] : reduced) accumulate(out, DecoratedPartition(std::move(rb)), scale * c * rc);
      } else {
        accumulate(out, DecoratedPartition(std::move(blocks)), c == 1 ? scale : scale * c);
      }
    }
  }

 private:
  using Expansion = std::vector<std::pair<Blocks, Rational>>;

  static void require(FactorSet f, Factor t) {
    if (!f.contains(t)) throw InvalidFactor("factor " + t.name() + " not in " + f.to_string());
  }

  static void accumulate(TermMap& out, DecoratedPartition p, const Rational& c) {
    if (c == 0) return;
    auto [it, inserted] = out.try_emplace(std::move(p), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) out.erase(it);
    }
  }

  /// a <- a*b on X; returns false when the product vanishes.
  bool multiply_decorations(Decoration& a, Decoration b, Rational& scale) const {
    if (b.kind == DecKind::Fund) return true;
    if (a.kind == DecKind::Fund) {
      a = b;
      return true;
    }
    if (a.kind == DecKind::Div && b.kind == DecKind::Div) {
      const Rational& g = surface_.pairing(a.index, b.index);
      if (g == 0) return false;
      scale *= g;
      a = Decoration::pt();
      return true;
    }
    return false;
  }

  static Blocks singletons(std::uint64_t members, Decoration dec) {
    Blocks out;
    for (auto f : FactorSet::elements_of(members)) out.push_back(Block{f.bit(), dec});
    return out;
  }

  static void expand_block(const Block& blk, Expansion& out) {
    const int m = blk.size();
    const auto members = FactorSet::elements_of(blk.members);
    switch (blk.dec.kind) {
      case DecKind::Pt:
      case DecKind::FormalPt:
        out.emplace_back(singletons(blk.members, blk.dec), Rational(1));
        return;
      case DecKind::Div:
        if (m == 1) {
          out.emplace_back(Blocks{blk}, Rational(1));
          return;
        }
        for (auto f : members) {
          Blocks b = singletons(blk.members & ~f.bit(), Decoration::pt());
          b.push_back(Block{f.bit(), blk.dec});
          out.emplace_back(std::move(b), Rational(1));
        }
        return;
      case DecKind::Fund:
        if (m <= 1) {
          out.emplace_back(Blocks{}, Rational(1));
          return;
        }
        if (m == 2) {
          out.emplace_back(Blocks{blk}, Rational(1));
          return;
        }
        for (std::size_t i = 0; i < members.size(); ++i)
          for (std::size_t j = i + 1; j < members.size(); ++j) {
            std::uint64_t pair = members[i].bit() | members[j].bit();
            Blocks b = singletons(blk.members & ~pair, Decoration::pt());
            b.push_back(Block{pair, Decoration::fund()});
            out.emplace_back(std::move(b), Rational(1));
          }
        for (auto f : members) out.emplace_back(singletons(blk.members & ~f.bit(), Decoration::pt()), Rational(2 - m));
        return;
    }
  }

  static Expansion cross(const Expansion& left, const Expansion& right) {
    Expansion out;
    out.reserve(left.size() * right.size());
    for (const auto& [lb, lc] : left)
      for (const auto& [rb, rc] : right) {
        Blocks b = lb;
        b.insert(b.end(), rb.begin(), rb.end());
        out.emplace_back(std::move(b), lc * rc);
      }
    return out;
  }

  static bool has_repeated_formal_point(const Blocks& blocks) {
    std::uint64_t seen[4] = {0, 0, 0, 0};
    for (const auto& b : blocks) {
      if (b.dec.kind != DecKind::FormalPt) continue;
      std::uint64_t& word = seen[b.dec.index >> 6];
      std::uint64_t bit = std::uint64_t{1} << (b.dec.index & 63);
      if (word & bit) return true;
      word |= bit;
    }
    return false;
  }

  /// prod_{i in S} [x]^{(i)} = sum_{i in S} [x]^{(i)} c^{S-i} - (|S|-1) c^S for each id x.
  static void apply_point_square(const Blocks& blocks, Expansion& out) {
    std::map<std::uint8_t, std::uint64_t> by_id;
    Blocks rest;
    for (const auto& b : blocks) {
      if (b.dec.kind == DecKind::FormalPt)
        by_id[b.dec.index] |= b.members;
      else
        rest.push_back(b);
    }
    Expansion acc{{rest, Rational(1)}};
    for (const auto& [id, members] : by_id) {
      Expansion piece;
      int m = std::popcount(members);
      if (m == 1) {
        piece.emplace_back(Blocks{Block{members, Decoration::formal_pt(id)}}, Rational(1));
      } else {
        for (auto f : FactorSet::elements_of(members)) {
          Blocks b = singletons(members & ~f.bit(), Decoration::pt());
          b.push_back(Block{f.bit(), Decoration::formal_pt(id)});
          piece.emplace_back(std::move(b), Rational(1));
        }
        piece.emplace_back(singletons(members, Decoration::pt()), Rational(1 - m));
      }
      acc = cross(acc, piece);
    }
    out = std::move(acc);
  }

  SurfaceModel surface_;
  RingOptions options_;
};

}  // namespace k3taut
