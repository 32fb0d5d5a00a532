#pragma once

#include "k3taut/verifier.hpp"

#include <random>

namespace k3taut::sampling {

/// Random product of up to `depth` generators (1, c, D_j, Delta, Dbar) on
/// factors 1..l, times a small nonzero integer.
inline TautClass random_generator_product(const K3Ring& ring, int l, std::mt19937& rng, int depth = 3) {
  FactorSet fs = FactorSet::range(1, l);
  std::uniform_int_distribution<int> pick_factor(1, l);
  std::uniform_int_distribution<int> pick_kind(0, 4);
  std::uniform_int_distribution<int> pick_len(1, depth);
  std::uniform_int_distribution<int> pick_coef(-3, 3);
  std::uniform_int_distribution<int> pick_div(0, ring.surface().ns_rank() - 1);
  TautClass out = ring.one(fs);
  int len = pick_len(rng);
  for (int i = 0; i < len; ++i) {
    Factor r = Factor::main(pick_factor(rng));
    Factor s = Factor::main(pick_factor(rng));
    TautClass g = ring.one(fs);
    switch (pick_kind(rng)) {
      case 0: g = ring.point(fs, r); break;
      case 1: g = ring.basis_divisor(fs, r, pick_div(rng)); break;
      case 2:
        if (r != s) g = ring.diagonal(fs, r, s);
        break;
      case 3:
        if (r != s) g = ring.normalized_diagonal(fs, r, s);
        break;
      default: break;
    }
    out = ring.mul(out, g);
  }
  int c = pick_coef(rng);
  return out * Rational(c == 0 ? 1 : c);
}

inline TautClass random_class(const K3Ring& ring, int l, std::mt19937& rng, int summands = 2) {
  TautClass out(FactorSet::range(1, l));
  for (int i = 0; i < summands; ++i) out += random_generator_product(ring, l, rng);
  return out;
}

/// Single alpha generators on aux factors 1..k: 1, c, D_j, Delta_{st} and
/// ch_i(Ibar) for the given degrees.
inline std::vector<AlphaNode> alpha_generators(int k, int ns_rank, const std::vector<int>& ch_degrees) {
  std::vector<AlphaNode> out{AlphaNode::one()};
  for (int s = 1; s <= k; ++s) {
    out.push_back(AlphaNode::cx(s));
    for (int j = 0; j < ns_rank; ++j) out.push_back(AlphaNode::div(s, j));
    for (int t = s + 1; t <= k; ++t) out.push_back(AlphaNode::diag(s, t));
    for (int i : ch_degrees) out.push_back(AlphaNode::ch(s, i));
  }
  return out;
}

/// Random instance on X^[n]: k <= max_k, l from `ls`, indices from `degrees`,
/// random Omega/Theta split and assignment, alpha a product of at most two
/// generators with d + l > 2n + 2k.
inline InstanceSpec random_instance(const SurfaceModel& surface, int n, int max_k, const std::vector<int>& ls,
                                    const std::vector<int>& degrees, std::mt19937& rng) {
  auto pick = [&](const auto& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  for (;;) {
    InstanceSpec spec;
    spec.n = n;
    spec.k = std::uniform_int_distribution<int>(0, max_k)(rng);
    spec.l = pick(ls);
    auto gens = alpha_generators(spec.k, surface.ns_rank(), {2, 3, 4});
    AlphaNode a = pick(gens);
    if (std::bernoulli_distribution(0.5)(rng)) a = AlphaNode::mul({a, pick(gens)});
    spec.alpha = std::make_shared<AlphaNode>(std::move(a));
    for (int t = 1; t <= spec.l; ++t) {
      spec.indices.push_back(pick(degrees));
      if (spec.k > 0 && std::bernoulli_distribution(0.3)(rng)) {
        spec.theta.push_back(t);
        spec.assignment[t] = std::uniform_int_distribution<int>(1, spec.k)(rng);
      } else {
        spec.omega.push_back(t);
      }
    }
    if (alpha_codim(*spec.alpha) + spec.l > 2 * spec.n + 2 * spec.k) return spec;
  }
}

}  // namespace k3taut::sampling
