#pragma once

#include "k3taut/k3_ring.hpp"

#include <string>
#include <vector>

namespace k3taut::identities {

inline Factor f(int t) { return t == 0 ? Factor::distinguished() : Factor::main(t); }

/// Dbar_{01} Dbar_{02} ... Dbar_{0m} on X^{m+1}.
inline TautClass dbar_star(const K3Ring& ring, int m, bool raw = false) {
  FactorSet fs = FactorSet::range(0, m);
  TautClass out = ring.one(fs);
  for (int t = 1; t <= m; ++t) {
    auto d = ring.normalized_diagonal(fs, f(0), f(t));
    out = raw ? ring.raw_mul(out, d) : ring.mul(out, d);
  }
  return out;
}

inline TautClass bv(const K3Ring& ring) { return dbar_star(ring, 3); }

/// Delta - Delta_c + Delta_{c,c} on X^3, unreduced.
inline TautClass bv0(const K3Ring& ring) {
  FactorSet fs = FactorSet::range(1, 3);
  TautClass out = ring.raw_diagonal(fs, {f(1), f(2), f(3)});
  for (int k = 1; k <= 3; ++k) {
    std::vector<Factor> pair;
    for (int t = 1; t <= 3; ++t)
      if (t != k) pair.push_back(f(t));
    out -= ring.raw_mul(ring.raw_diagonal(fs, pair), ring.point(fs, f(k)));
    out += ring.raw_mul(ring.point(fs, pair[0]), ring.point(fs, pair[1]));
  }
  return out;
}

/// D_j^{(0)} Dbar_{01} Dbar_{02} on X^3.
inline TautClass second(const K3Ring& ring, int j) {
  FactorSet fs = FactorSet::range(0, 2);
  return ring.mul(ring.basis_divisor(fs, f(0), j),
                  ring.mul(ring.normalized_diagonal(fs, f(0), f(1)), ring.normalized_diagonal(fs, f(0), f(2))));
}

/// c^{(0)} Dbar_{01} on X^2.
inline TautClass third(const K3Ring& ring) {
  FactorSet fs = FactorSet::range(0, 1);
  return ring.mul(ring.point(fs, f(0)), ring.normalized_diagonal(fs, f(0), f(1)));
}

/// Gamma^N(X, c_X) = sum over nonempty T of (-1)^{N-|T|} Delta_T c^{complement of T}, on factors 1..N, unreduced.
inline TautClass modified_diagonal(const K3Ring& ring, int N) {
  FactorSet fs = FactorSet::range(1, N);
  TautClass out(fs);
  for (std::uint64_t sub = 1; sub < (std::uint64_t{1} << N); ++sub) {
    std::vector<Factor> diag;
    TautClass term = ring.one(fs);
    for (int t = 1; t <= N; ++t) {
      if (sub >> (t - 1) & 1)
        diag.push_back(f(t));
      else
        term = ring.raw_mul(term, ring.point(fs, f(t)));
    }
    if (diag.size() >= 2) term = ring.raw_mul(term, ring.raw_diagonal(fs, diag));
    int sign = (N - static_cast<int>(diag.size())) % 2 == 0 ? 1 : -1;
    out += term * Rational(sign);
  }
  return out;
}

/// Full Chern character of Ibar_{01} Ibar_{02} Ibar_{03} on X^4, using
/// ch(Ibar_{0t}) = -ch(O_{Dbar_{0t}}).
inline TautClass k_ideal(const K3Ring& ring) {
  FactorSet fs = FactorSet::range(0, 3);
  TautClass out = ring.one(fs);
  for (int t = 1; t <= 3; ++t) {
    auto ch = ring.ch_O_diagonal_bar(fs, f(0), f(t));
    out = ring.mul(out, -(ch.at(2) + ch.at(4)));
  }
  return out;
}

/// The built-in identities, each a class that must reduce to zero.
struct NamedIdentity {
  std::string name;
  TautClass lhs;
};

inline std::vector<std::string> identity_names() {
  return {"bv", "bv0", "second", "third", "modified-diagonal-x", "k-ideal-x"};
}

/// Returns one or more classes for the named identity; `second` yields one per basis divisor.
inline std::vector<NamedIdentity> build(const K3Ring& ring, const std::string& name) {
  if (name == "bv") return {{"bv", bv(ring)}};
  if (name == "bv0") return {{"bv0", bv0(ring)}};
  if (name == "third") return {{"third", third(ring)}};
  if (name == "modified-diagonal-x") return {{"modified-diagonal-x", modified_diagonal(ring, 3)}};
  if (name == "k-ideal-x") return {{"k-ideal-x", k_ideal(ring)}};
  if (name == "second") {
    std::vector<NamedIdentity> out;
    for (int j = 0; j < ring.surface().ns_rank(); ++j)
      out.push_back({"second[div" + std::to_string(j) + "]", second(ring, j)});
    return out;
  }
  throw std::invalid_argument("unknown identity '" + name + "'");
}

/// Pushes the unreduced product Dbar_{01} Dbar_{02} Dbar_{03} forward along
/// the projection forgetting factor 0.
inline TautClass bv_pushed_to_bv0(const K3Ring& ring) {
  return ring.pushforward_forget(dbar_star(ring, 3, true), f(0));
}

}  // namespace k3taut::identities
