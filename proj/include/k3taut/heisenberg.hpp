#pragma once

#include "k3taut/k3_ring.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <string>
#include <vector>

namespace k3taut {

/// Every tautological normal-form term on the given factors: set partitions
/// into Fund pairs and decorated singletons (1, D_j, c_X).
inline std::vector<DecoratedPartition> normal_form_terms(FactorSet fs, int ns_rank) {
  std::vector<DecoratedPartition> out;
  std::vector<Factor> elems = fs.elements();
  Blocks cur;
  auto rec = [&](std::uint64_t remaining, auto& self) -> void {
    if (!remaining) {
      out.emplace_back(cur);
      return;
    }
    Factor f(static_cast<std::uint8_t>(std::countr_zero(remaining)));
    std::uint64_t rest = remaining & ~f.bit();
    self(rest, self);
    for (int j = 0; j < ns_rank; ++j) {
      cur.push_back(Block{f.bit(), Decoration::div(j)});
      self(rest, self);
      cur.pop_back();
    }
    cur.push_back(Block{f.bit(), Decoration::pt()});
    self(rest, self);
    cur.pop_back();
    for (auto g : FactorSet::elements_of(rest)) {
      cur.push_back(Block{f.bit() | g.bit(), Decoration::fund()});
      self(rest & ~g.bit(), self);
      cur.pop_back();
    }
  };
  rec(fs.mask(), rec);
  return out;
}

/// An element of the Fock space sum_lambda q_{lambda_1} ... q_{lambda_l}(Gamma) v
/// with k inert X-factors. Operator positions are the factors q0..q{l-1};
/// parts are stored in descending order and Gamma is symmetric under
/// exchanging positions with equal parts.
struct FockVector {
  FactorSet inert;
  std::map<std::vector<int>, TautClass> comps;

  static FactorSet op_factors(std::size_t l) {
    FactorSet fs;
    for (std::size_t j = 0; j < l; ++j) fs.insert(Factor::op(static_cast<int>(j)));
    return fs;
  }

  FactorSet gamma_factors(std::size_t l) const { return FactorSet(op_factors(l).mask() | inert.mask()); }

  void add(const std::vector<int>& parts, const TautClass& gamma) {
    if (gamma.empty()) return;
    auto it = comps.find(parts);
    if (it == comps.end()) {
      comps.emplace(parts, gamma);
      return;
    }
    it->second += gamma;
    if (it->second.empty()) comps.erase(it);
  }

  bool empty() const { return comps.empty(); }

  FockVector& operator+=(const FockVector& o) {
    if (inert != o.inert) throw ShapeError("Fock vectors with different inert factors");
    for (const auto& [p, g] : o.comps) add(p, g);
    return *this;
  }
  FockVector& operator-=(const FockVector& o) {
    if (inert != o.inert) throw ShapeError("Fock vectors with different inert factors");
    for (const auto& [p, g] : o.comps) add(p, -g);
    return *this;
  }
  friend FockVector operator-(FockVector a, const FockVector& b) { return a -= b; }

  friend bool operator==(const FockVector& a, const FockVector& b) { return a.inert == b.inert && a.comps == b.comps; }

  std::string to_string() const {
    if (comps.empty()) return "0";
    std::string s;
    for (const auto& [parts, g] : comps) {
      if (!s.empty()) s += " + ";
      s += "q[";
      for (std::size_t j = 0; j < parts.size(); ++j) s += (j ? "," : "") + std::to_string(parts[j]);
      s += "](" + g.to_string() + ")v";
    }
    return s;
  }
};

/// Heisenberg action with [q_a, q_b] = a delta_{a+b,0} Delta_{u_a u_b}, so
/// [q_{-i}, q_i] = -i times the contraction. Each operator carries a new inert
/// X-factor u.
class Heisenberg {
 public:
  explicit Heisenberg(const K3Ring& ring) : ring_(ring) {}

  const K3Ring& ring() const { return ring_; }

  FockVector vacuum(FactorSet inert = {}) const {
    FockVector v{inert, {}};
    v.add({}, ring_.one(inert));
    return v;
  }

  /// q_{parts}(gamma) v, with gamma on positions q0.. plus the inert factors.
  FockVector state(std::vector<int> parts, const TautClass& gamma, FactorSet inert) const {
    if (!std::is_sorted(parts.rbegin(), parts.rend())) throw std::invalid_argument("parts must be descending");
    for (int p : parts)
      if (p <= 0) throw std::invalid_argument("parts must be positive");
    FockVector v{inert, {}};
    if (gamma.factors() != v.gamma_factors(parts.size())) throw ShapeError("gamma lives on the wrong factors");
    v.add(parts, symmetrize(gamma, parts));
    return v;
  }

  /// pushforward_forget(gamma * Delta_{rs}, s).
  TautClass contraction(const TautClass& gamma, Factor r, Factor s) const {
    if (r == s) throw InvalidFactor("contraction needs two distinct factors");
    return ring_.pushforward_forget(ring_.mul(gamma, ring_.diagonal(gamma.factors(), r, s)), s);
  }

  /// Average of gamma over permutations of positions carrying equal parts.
  TautClass symmetrize(const TautClass& gamma, const std::vector<int>& parts) const {
    std::vector<std::vector<int>> groups;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (j == 0 || parts[j] != parts[j - 1]) groups.emplace_back();
      groups.back().push_back(static_cast<int>(j));
    }
    bool trivial = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.size() == 1; });
    if (trivial) return gamma;

    std::vector<std::vector<int>> perms = groups;
    TautClass sum(gamma.factors());
    long count = 0;
    auto rec = [&](std::size_t gi, auto& self) -> void {
      if (gi == groups.size()) {
        auto map = identity_map();
        for (std::size_t g = 0; g < groups.size(); ++g)
          for (std::size_t i = 0; i < groups[g].size(); ++i)
            map[Factor::op(groups[g][i]).slot()] = Factor::op(perms[g][i]).slot();
        sum += ring_.relabel(gamma, map);
        ++count;
        return;
      }
      std::sort(perms[gi].begin(), perms[gi].end());
      do {
        self(gi + 1, self);
      } while (std::next_permutation(perms[gi].begin(), perms[gi].end()));
    };
    rec(0, rec);
    return sum * Rational(1, count);
  }

  /// q_a with a > 0, carrying the new inert factor u.
  FockVector create(int a, Factor u, const FockVector& v) const {
    if (a <= 0) throw std::invalid_argument("create needs a positive index");
    if (v.inert.contains(u)) throw ShapeError("factor " + u.name() + " already inert");
    FockVector out{v.inert.with(u), {}};
    for (const auto& [parts, gamma] : v.comps) {
      const std::size_t l = parts.size();
      std::size_t p = 0;
      while (p < l && parts[p] >= a) ++p;
      auto map = identity_map();
      for (std::size_t j = p; j < l; ++j) map[Factor::op(static_cast<int>(j)).slot()] = Factor::op(static_cast<int>(j + 1)).slot();
      std::vector<int> np = parts;
      np.insert(np.begin() + static_cast<std::ptrdiff_t>(p), a);
      Factor slot = Factor::op(static_cast<int>(p));
      TautClass g = ring_.pullback_insert(ring_.pullback_insert(ring_.relabel(gamma, map), slot), u);
      g = ring_.mul(g, ring_.diagonal(g.factors(), slot, u));
      out.add(np, symmetrize(g, np));
    }
    return out;
  }

  /// q_{-i} with i > 0, carrying the new inert factor u: commuted to the
  /// vacuum, each part equal to i is contracted against u with weight -i.
  FockVector lower(int i, Factor u, const FockVector& v) const {
    if (i <= 0) throw std::invalid_argument("lower needs a positive index");
    if (v.inert.contains(u)) throw ShapeError("factor " + u.name() + " already inert");
    FockVector out{v.inert.with(u), {}};
    for (const auto& [parts, gamma] : v.comps) {
      const std::size_t l = parts.size();
      TautClass pulled = ring_.pullback_insert(gamma, u);
      for (std::size_t j = 0; j < l; ++j) {
        if (parts[j] != i) continue;
        TautClass g = contraction(pulled, u, Factor::op(static_cast<int>(j)));
        auto map = identity_map();
        for (std::size_t m = j + 1; m < l; ++m) map[Factor::op(static_cast<int>(m)).slot()] = Factor::op(static_cast<int>(m - 1)).slot();
        g = ring_.relabel(g, map) * Rational(-i);
        std::vector<int> np = parts;
        np.erase(np.begin() + static_cast<std::ptrdiff_t>(j));
        out.add(np, symmetrize(g, np));
      }
    }
    return out;
  }

  /// q_a for any nonzero a.
  FockVector apply(int a, Factor u, const FockVector& v) const {
    if (a == 0) throw std::invalid_argument("q_0 is not an operator here");
    return a > 0 ? create(a, u, v) : lower(-a, u, v);
  }

  /// a delta_{a+b,0} Delta_{u_a u_b} v: the expected value of [q_a, q_b] v.
  FockVector commutator_value(int a, Factor ua, int b, Factor ub, const FockVector& v) const {
    FockVector out{v.inert.with(ua).with(ub), {}};
    if (a + b != 0) return out;
    for (const auto& [parts, gamma] : v.comps) {
      TautClass g = ring_.pullback_insert(ring_.pullback_insert(gamma, ua), ub);
      out.add(parts, ring_.mul(g, ring_.diagonal(g.factors(), ua, ub)) * Rational(a));
    }
    return out;
  }

  /// Symmetrized normal-form classes spanning the Gamma's for one partition.
  std::vector<TautClass> gamma_basis(const std::vector<int>& parts, FactorSet inert) const {
    FockVector shape{inert, {}};
    FactorSet fs = shape.gamma_factors(parts.size());
    std::vector<TautClass> out;
    for (const auto& p : normal_form_terms(fs, ring_.surface().ns_rank())) {
      TautClass g = symmetrize(TautClass::monomial(fs, p), parts);
      if (g.empty() || std::find(out.begin(), out.end(), g) != out.end()) continue;
      out.push_back(std::move(g));
    }
    return out;
  }

  /// Every q_lambda(Gamma) v with |lambda| = n and Gamma from gamma_basis.
  std::vector<FockVector> basis_states(int n, FactorSet inert) const {
    std::vector<FockVector> out;
    for (const auto& parts : partitions(n))
      for (const auto& g : gamma_basis(parts, inert)) out.push_back(state(parts, g, inert));
    return out;
  }

  static std::vector<std::vector<int>> partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    auto rec = [&](int remaining, int max_part, auto& self) -> void {
      if (remaining == 0) {
        out.push_back(cur);
        return;
      }
      for (int p = std::min(remaining, max_part); p >= 1; --p) {
        cur.push_back(p);
        self(remaining - p, p, self);
        cur.pop_back();
      }
    };
    rec(n, n, rec);
    return out;
  }

 private:
  static std::array<std::uint8_t, 64> identity_map() {
    std::array<std::uint8_t, 64> m{};
    std::iota(m.begin(), m.end(), std::uint8_t{0});
    return m;
  }

  const K3Ring& ring_;
};

/// Rank of a list of sparse rational vectors by exact Gaussian elimination.
template <class Key, class Hash = std::hash<Key>>
std::size_t exact_rank(const std::vector<std::unordered_map<Key, Rational, Hash>>& vectors) {
  std::unordered_map<Key, std::size_t, Hash> column;
  std::vector<std::map<std::size_t, Rational>> rows;
  for (const auto& v : vectors) {
    std::map<std::size_t, Rational> r;
    for (const auto& [k, c] : v) {
      auto [it, inserted] = column.try_emplace(k, column.size());
      r[it->second] = c;
    }
    rows.push_back(std::move(r));
  }
  std::map<std::size_t, std::map<std::size_t, Rational>> pivots;  // pivot column -> reduced row
  std::size_t rank = 0;
  for (auto& r : rows) {
    for (;;) {
      if (r.empty()) break;
      auto lead = r.begin();
      auto piv = pivots.find(lead->first);
      if (piv == pivots.end()) {
        Rational inv = Rational(1) / lead->second;
        for (auto& [c, x] : r) x *= inv;
        pivots.emplace(lead->first, std::move(r));
        ++rank;
        break;
      }
      Rational f = lead->second;
      for (const auto& [c, x] : piv->second) {
        auto it = r.find(c);
        Rational nv = (it == r.end() ? Rational(0) : it->second) - f * x;
        if (nv == 0) {
          if (it != r.end()) r.erase(it);
        } else if (it == r.end()) {
          r.emplace(c, nv);
        } else {
          it->second = nv;
        }
      }
    }
  }
  return rank;
}

struct InjectivityReport {
  int n = 0;
  int k = 0;
  std::size_t domain_dim = 0;
  std::size_t rank = 0;
  bool injective = false;
};

namespace detail {

struct FockKey {
  std::vector<int> parts;
  DecoratedPartition part;
  int block = 0;  // index of the lowering string mu

  friend bool operator==(const FockKey&, const FockKey&) = default;
};

struct FockKeyHash {
  std::size_t operator()(const FockKey& k) const {
    std::size_t h = k.part.hash() ^ (static_cast<std::size_t>(k.block) * 0x9e3779b97f4a7c15ull);
    for (int p : k.parts) h = h * 31 + static_cast<std::size_t>(p);
    return h;
  }
};

inline std::unordered_map<FockKey, Rational, FockKeyHash> coordinates(const FockVector& v, int block) {
  std::unordered_map<FockKey, Rational, FockKeyHash> out;
  for (const auto& [parts, g] : v.comps)
    for (const auto& [p, c] : g.terms()) out.emplace(FockKey{parts, p, block}, c);
  return out;
}

}  // namespace detail

/// Checks that the sum over partitions mu of n of the lowering strings
/// q_{-mu_1} ... q_{-mu_m} is injective on the degree-n Fock space with k inert
/// factors, with Gamma ranging over symmetrized normal-form classes.
inline InjectivityReport injectivity_check(const Heisenberg& h, int n, int k) {
  if (n < 1 || n > 4) throw std::invalid_argument("injectivity_check supports 1 <= n <= 4");
  if (k < 0 || k > 2) throw std::invalid_argument("injectivity_check supports 0 <= k <= 2");
  FactorSet inert = FactorSet::range(1, k);
  auto domain = h.basis_states(n, inert);

  // Independent subset of the domain in the formal term coordinates.
  std::vector<FockVector> independent;
  std::vector<std::unordered_map<detail::FockKey, Rational, detail::FockKeyHash>> coords;
  for (const auto& s : domain) {
    coords.push_back(detail::coordinates(s, -1));
    if (exact_rank(coords) == coords.size())
      independent.push_back(s);
    else
      coords.pop_back();
  }

  auto mus = Heisenberg::partitions(n);
  std::vector<std::unordered_map<detail::FockKey, Rational, detail::FockKeyHash>> images;
  for (const auto& s : independent) {
    std::unordered_map<detail::FockKey, Rational, detail::FockKeyHash> image;
    for (std::size_t b = 0; b < mus.size(); ++b) {
      FockVector cur = s;
      int next = k + 1;
      for (int part : mus[b]) cur = h.lower(part, Factor::main(next++), cur);
      for (auto& [key, c] : detail::coordinates(cur, static_cast<int>(b))) image.emplace(key, c);
    }
    images.push_back(std::move(image));
  }
  InjectivityReport r;
  r.n = n;
  r.k = k;
  r.domain_dim = independent.size();
  r.rank = exact_rank(images);
  r.injective = r.rank == r.domain_dim;
  return r;
}

/// Noncommutative polynomial in A = q_{-1} and B = q_{-1}^{(1)}.
using Word = std::string;
using NCPoly = std::map<Word, Rational>;

struct DerivationStep {
  int index = 0;         // q_{-index} is derived in this step
  std::string relation;  // the commutator relation used
  NCPoly expansion;      // q_{-index} as a polynomial in A, B

  std::string to_string() const {
    std::string s = "q_{-" + std::to_string(index) + "} = " + relation + " = ";
    bool first = true;
    for (const auto& [w, c] : expansion) {
      std::string coef = c.get_str();
      if (!first) s += coef[0] == '-' ? " - " : " + ";
      if (first && coef[0] == '-') s += "-";
      std::string mag = coef[0] == '-' ? coef.substr(1) : coef;
      s += (mag == "1" ? "" : mag + "*") + w;
      first = false;
    }
    return s;
  }
};

inline NCPoly nc_commutator_left(const std::string& letter, const NCPoly& p) {
  NCPoly out;
  auto add = [&](const Word& w, const Rational& c) {
    auto& slot = out[w];
    slot += c;
    if (slot == 0) out.erase(w);
  };
  for (const auto& [w, c] : p) {
    add(letter + w, c);
    add(w + letter, -c);
  }
  return out;
}

/// Derives q_{-2}, ..., q_{-N} from q_{-1} and q_{-1}^{(1)} using
/// [q_{-1}^{(1)}, q_{-i}] = i q_{-i-1} with the diagonal pushforward stripped.
inline std::vector<DerivationStep> generate_lowering_closure(int N) {
  if (N < 1) throw std::invalid_argument("closure bound must be positive");
  std::vector<DerivationStep> out;
  NCPoly cur{{"A", Rational(1)}};
  for (int i = 1; i < N; ++i) {
    NCPoly next = nc_commutator_left("B", cur);
    for (auto& [w, c] : next) c /= i;
    std::string rel = "(1/" + std::to_string(i) + ")[q_{-1}^{(1)}, q_{-" + std::to_string(i) + "}]";
    out.push_back({i + 1, rel, next});
    cur = std::move(next);
  }
  return out;
}

}  // namespace k3taut
