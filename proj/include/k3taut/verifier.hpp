#pragma once

#include "k3taut/hilb.hpp"

#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace k3taut {

/// Expression tree for the class alpha on X^[n] x X^k. Aux factors are
/// numbered 1..k.
struct AlphaNode {
  enum class Kind { One, Cx, Div, Diag, Ch, Mul, Add, Scale };

  Kind kind = Kind::One;
  int s = 0;           // aux factor for Cx, Div, Ch and first factor of Diag
  int t = 0;           // second factor of Diag
  int index = 0;       // divisor basis index, or Chern character degree
  bool normalized = true;
  Rational scalar = 1;
  std::vector<AlphaNode> children;

  static AlphaNode leaf(Kind kind, int s = 0, int t = 0, int index = 0) {
    AlphaNode a;
    a.kind = kind;
    a.s = s;
    a.t = t;
    a.index = index;
    return a;
  }
  static AlphaNode one() { return {}; }
  static AlphaNode cx(int s) { return leaf(Kind::Cx, s); }
  static AlphaNode div(int s, int j) { return leaf(Kind::Div, s, 0, j); }
  static AlphaNode diag(int s, int t) { return leaf(Kind::Diag, s, t); }
  static AlphaNode ch(int s, int degree, bool normalized = true) {
    AlphaNode a = leaf(Kind::Ch, s, 0, degree);
    a.normalized = normalized;
    return a;
  }
  static AlphaNode mul(std::vector<AlphaNode> c) {
    AlphaNode a = leaf(Kind::Mul);
    a.children = std::move(c);
    return a;
  }
  static AlphaNode add(std::vector<AlphaNode> c) {
    AlphaNode a = leaf(Kind::Add);
    a.children = std::move(c);
    return a;
  }
  static AlphaNode scale(Rational r, AlphaNode c) {
    AlphaNode a = leaf(Kind::Scale);
    a.scalar = std::move(r);
    a.children.push_back(std::move(c));
    return a;
  }

  friend bool operator==(const AlphaNode&, const AlphaNode&) = default;
};

/// Codimension read off the expression tree. Throws std::invalid_argument for
/// inhomogeneous sums.
inline int alpha_codim(const AlphaNode& a) {
  using K = AlphaNode::Kind;
  switch (a.kind) {
    case K::One: return 0;
    case K::Cx: return 2;
    case K::Div: return 1;
    case K::Diag: return 2;
    case K::Ch: return a.index;
    case K::Scale:
      if (a.children.size() != 1) throw std::invalid_argument("scale node needs exactly one child");
      return alpha_codim(a.children[0]);
    case K::Mul: {
      int d = 0;
      for (const auto& c : a.children) d += alpha_codim(c);
      return d;
    }
    case K::Add: {
      if (a.children.empty()) throw std::invalid_argument("empty sum in alpha");
      int d = alpha_codim(a.children[0]);
      for (const auto& c : a.children)
        if (alpha_codim(c) != d) throw std::invalid_argument("alpha is not homogeneous");
      return d;
    }
  }
  return 0;
}

inline void alpha_check_factors(const AlphaNode& a, int k, int ns_rank) {
  using K = AlphaNode::Kind;
  auto aux_ok = [&](int s) {
    if (s < 1 || s > k) throw std::invalid_argument("alpha references aux factor " + std::to_string(s) + " outside 1.." + std::to_string(k));
  };
  switch (a.kind) {
    case K::Cx: aux_ok(a.s); break;
    case K::Div:
      aux_ok(a.s);
      if (a.index < 0 || a.index >= ns_rank) throw std::invalid_argument("alpha divisor index out of range");
      break;
    case K::Diag:
      aux_ok(a.s);
      aux_ok(a.t);
      if (a.s == a.t) throw std::invalid_argument("alpha diagonal needs two distinct factors");
      break;
    case K::Ch:
      aux_ok(a.s);
      if (a.index < 0) throw std::invalid_argument("negative Chern character degree in alpha");
      break;
    default: break;
  }
  for (const auto& c : a.children) alpha_check_factors(c, k, ns_rank);
}

inline HilbExpr alpha_evaluate(const K3Ring& ring, const AlphaNode& a, int level, FactorSet fs) {
  using K = AlphaNode::Kind;
  switch (a.kind) {
    case K::One: return HilbExpr::one(level, fs);
    case K::Cx: return HilbExpr::from_class(level, ring.point(fs, Factor::aux(a.s)));
    case K::Div: return HilbExpr::from_class(level, ring.basis_divisor(fs, Factor::aux(a.s), a.index));
    case K::Diag: return HilbExpr::from_class(level, ring.diagonal(fs, Factor::aux(a.s), Factor::aux(a.t)));
    case K::Ch: return HilbExpr::ch(level, fs, Factor::aux(a.s), a.index, a.normalized);
    case K::Scale: return alpha_evaluate(ring, a.children.at(0), level, fs) * a.scalar;
    case K::Mul: {
      HilbExpr out = HilbExpr::one(level, fs);
      for (const auto& c : a.children) out = hilb_mul(ring, out, alpha_evaluate(ring, c, level, fs));
      return out;
    }
    case K::Add: {
      HilbExpr out(level, fs);
      for (const auto& c : a.children) out += alpha_evaluate(ring, c, level, fs);
      return out;
    }
  }
  return HilbExpr(level, fs);
}

inline std::string alpha_to_string(const AlphaNode& a) {
  using K = AlphaNode::Kind;
  auto join = [&](const char* sep) {
    std::string s;
    for (const auto& c : a.children) s += (s.empty() ? "" : sep) + alpha_to_string(c);
    return s;
  };
  switch (a.kind) {
    case K::One: return "1";
    case K::Cx: return "c(^" + std::to_string(a.s) + ")";
    case K::Div: return "div" + std::to_string(a.index) + "(^" + std::to_string(a.s) + ")";
    case K::Diag: return "D[^" + std::to_string(a.s) + ",^" + std::to_string(a.t) + "]";
    case K::Ch: return std::string(a.normalized ? "chbar" : "ch") + std::to_string(a.index) + "(^" + std::to_string(a.s) + ")";
    case K::Scale: return a.scalar.get_str() + "*" + alpha_to_string(a.children.at(0));
    case K::Mul: return "(" + join("*") + ")";
    case K::Add: return "(" + join(" + ") + ")";
  }
  return "?";
}

/// A product instance alpha * prod_{t in Omega} ch_{i_t}(Ibar_n^{(t)}) *
/// prod_{t in Theta} ch_{i_t}(O_{Dbar_{s_t, t}}) on X^[n] x X^k x X^l.
struct InstanceSpec {
  int n = 1;
  int k = 0;
  int l = 1;
  std::shared_ptr<const AlphaNode> alpha = std::make_shared<AlphaNode>();
  std::vector<int> omega;
  std::vector<int> theta;
  std::map<int, int> assignment;  // t in Theta -> aux factor s in 1..k
  std::vector<int> indices;       // i_1..i_l

  FactorSet factors() const {
    FactorSet fs;
    for (int s = 1; s <= k; ++s) fs.insert(Factor::aux(s));
    for (int t = 1; t <= l; ++t) fs.insert(Factor::main(t));
    return fs;
  }

  friend bool operator==(const InstanceSpec& a, const InstanceSpec& b) {
    return a.n == b.n && a.k == b.k && a.l == b.l && *a.alpha == *b.alpha && a.omega == b.omega &&
           a.theta == b.theta && a.assignment == b.assignment && a.indices == b.indices;
  }
};

/// Throws std::invalid_argument describing the first violated precondition.
/// Returns the codimension of alpha. With enforce_bound false the dimension
/// bound d + l > 2n + 2k is not checked.
inline int validate(const InstanceSpec& spec, const SurfaceModel& surface, bool enforce_bound = true) {
  if (spec.n < 1) throw std::invalid_argument("n must be at least 1");
  if (spec.l < 1) throw std::invalid_argument("l must be at least 1");
  if (spec.k < 0 || spec.k > Factor::kMaxAux) throw std::invalid_argument("k must lie in 0.." + std::to_string(Factor::kMaxAux));
  if (spec.l > Factor::kMaxMain) throw std::invalid_argument("l must be at most " + std::to_string(Factor::kMaxMain));
  if (spec.n - 1 > 1 - Factor::kMinAux)
    throw std::invalid_argument("recursion would exhaust auxiliary factor labels");
  if (!spec.alpha) throw std::invalid_argument("alpha is missing");
  if (static_cast<int>(spec.indices.size()) != spec.l)
    throw std::invalid_argument("indices must have exactly l = " + std::to_string(spec.l) + " entries");
  for (int i : spec.indices)
    if (i < 0) throw std::invalid_argument("indices must be nonnegative");
  std::set<int> seen;
  for (int t : spec.omega) {
    if (t < 1 || t > spec.l) throw std::invalid_argument("omega entry " + std::to_string(t) + " outside 1..l");
    if (!seen.insert(t).second) throw std::invalid_argument("omega repeats factor " + std::to_string(t));
  }
  for (int t : spec.theta) {
    if (t < 1 || t > spec.l) throw std::invalid_argument("theta entry " + std::to_string(t) + " outside 1..l");
    if (!seen.insert(t).second) throw std::invalid_argument("omega and theta overlap or theta repeats at factor " + std::to_string(t));
  }
  if (static_cast<int>(seen.size()) != spec.l) throw std::invalid_argument("omega and theta must cover 1..l");
  if (spec.assignment.size() != spec.theta.size()) throw std::invalid_argument("assignment must be defined exactly on theta");
  for (int t : spec.theta) {
    auto it = spec.assignment.find(t);
    if (it == spec.assignment.end()) throw std::invalid_argument("assignment missing for theta factor " + std::to_string(t));
    if (it->second < 1 || it->second > spec.k)
      throw std::invalid_argument("assignment of factor " + std::to_string(t) + " must be an aux factor in 1..k");
  }
  alpha_check_factors(*spec.alpha, spec.k, surface.ns_rank());
  int d = alpha_codim(*spec.alpha);
  if (enforce_bound && d + spec.l <= 2 * spec.n + 2 * spec.k)
    throw std::invalid_argument("d + l > 2n + 2k fails: d = " + std::to_string(d) + ", l = " + std::to_string(spec.l) +
                                ", 2n + 2k = " + std::to_string(2 * spec.n + 2 * spec.k));
  return d;
}

/// True when some factor of the product is identically zero: ch_0 and ch_1 of
/// Ibar vanish, and ch(O_Dbar) has only degrees 2 and 4.
inline bool gamma_trivially_zero(const InstanceSpec& spec) {
  const int dim = 2 * spec.n + 2 * spec.k + 2 * spec.l;
  for (int t : spec.omega) {
    int i = spec.indices[t - 1];
    if (i < 2 || i > dim) return true;
    if (spec.n == 1 && i != 2 && i != 4) return true;
  }
  for (int t : spec.theta) {
    int i = spec.indices[t - 1];
    if (i != 2 && i != 4) return true;
  }
  return false;
}

namespace detail {

inline HilbExpr assemble_gamma(const K3Ring& ring, const InstanceSpec& spec, TermBudget* budget) {
  const FactorSet fs = spec.factors();
  HilbExpr out(spec.n, fs);
  if (gamma_trivially_zero(spec)) return out;

  Monomial mono;
  for (int t : spec.omega) mono.push_back(ChGen{Factor::main(t), spec.indices[t - 1]}.code());
  std::sort(mono.begin(), mono.end());
  TautClass theta = ring.one(fs);
  for (int t : spec.theta) {
    auto ch = ring.ch_O_diagonal_bar(fs, Factor::aux(spec.assignment.at(t)), Factor::main(t));
    theta = ring.mul(theta, ch.at(spec.indices[t - 1]));
  }
  HilbExpr tail(spec.n, fs);
  for (const auto& [p, c] : theta.terms()) tail.add(HilbTerm{mono, p}, c);
  return hilb_mul(ring, alpha_evaluate(ring, *spec.alpha, spec.n, fs), tail, budget);
}

}  // namespace detail

/// gamma for a validated instance.
inline HilbExpr build_gamma(const K3Ring& ring, const InstanceSpec& spec, TermBudget* budget = nullptr) {
  validate(spec, ring.surface());
  return detail::assemble_gamma(ring, spec, budget);
}

/// gamma without the dimension bound, for probing instances where vanishing
/// is not expected.
inline HilbExpr build_gamma_unchecked(const K3Ring& ring, const InstanceSpec& spec, TermBudget* budget = nullptr) {
  validate(spec, ring.surface(), false);
  return detail::assemble_gamma(ring, spec, budget);
}

enum class Status { CertifiedZero, Inconclusive, InputError };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::CertifiedZero: return "CertifiedZero";
    case Status::Inconclusive: return "Inconclusive";
    case Status::InputError: return "InputError";
  }
  return "?";
}

struct TraceEntry {
  int depth = 0;
  int level = 0;
  std::string branch;
  std::size_t terms = 0;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

struct Verdict {
  Status status = Status::CertifiedZero;
  std::string reason;
  std::string residual;
  std::size_t peak_terms = 0;
  double wall_time_ms = 0;
  std::vector<TraceEntry> trace;

  bool certified() const { return status == Status::CertifiedZero; }
};

struct VerifyOptions {
  std::size_t term_ceiling = 5'000'000;
  std::size_t residual_chars = 2000;
};

namespace detail {

inline void check_grading(const HilbExpr& e, int expected, const char* where) {
  for (const auto& [t, c] : e.terms())
    if (t.codim() != expected)
      throw std::logic_error(std::string("grading violated after ") + where + ": expected codim " +
                             std::to_string(expected) + ", found " + std::to_string(t.codim()));
}

inline void check_grading(const NestedExpr& e, int expected) {
  for (std::size_t j = 0; j < e.coeffs.size(); ++j)
    for (const auto& [t, c] : e.coeffs[j].terms())
      if (static_cast<int>(j) + t.codim() != expected)
        throw std::logic_error("grading violated after psi pullback: expected codim " + std::to_string(expected));
}

struct Recursion {
  const K3Ring& ring;
  const VerifyOptions& options;
  TermBudget budget;
  Verdict& verdict;

  bool run(const HilbExpr& e, int depth, const std::string& branch) {
    verdict.trace.push_back({depth, e.level(), branch, e.size()});
    budget.observe(e.size());
    if (e.empty()) return true;
    if (e.level() == 1) {
      TautClass base = base_evaluate(ring, e, &budget);
      verdict.trace.push_back({depth, 0, branch + "/base", base.size()});
      if (base.empty()) return true;
      if (verdict.residual.empty()) {
        verdict.residual = base.to_string();
        if (verdict.residual.size() > options.residual_chars)
          verdict.residual = verdict.residual.substr(0, options.residual_chars) + " ...";
      }
      return false;
    }
    auto codims = e.codims();
    std::optional<int> d;
    if (codims.size() == 1) d = *codims.begin();

    NestedExpr pulled = psi_pullback(ring, e, &budget);
    if (d) check_grading(pulled, *d);
    HilbExpr first = sigma_pushforward(ring, pulled, &budget);
    if (d) check_grading(first, *d, "sigma pushforward");
    if (!run(first, depth + 1, branch + "/psi")) return false;
    HilbExpr second = sigma_pushforward(ring, pulled.times_lambda(), &budget);
    if (d) check_grading(second, *d + 1, "sigma pushforward of lambda");
    return run(second, depth + 1, branch + "/lambda.psi");
  }
};

}  // namespace detail

/// Decides vanishing of e by the nested Hilbert scheme recursion down to
/// level 1. CertifiedZero means every branch reduced to the empty normal form.
inline Verdict verify_zero(const K3Ring& ring, const HilbExpr& e, const VerifyOptions& options = {}) {
  auto start = std::chrono::steady_clock::now();
  Verdict v;
  detail::Recursion rec{ring, options, TermBudget{options.term_ceiling, 0}, v};
  try {
    v.status = rec.run(e, 0, "root") ? Status::CertifiedZero : Status::Inconclusive;
    if (!v.certified()) v.reason = "a branch did not reduce to the empty normal form at level 1";
  } catch (const TermCeilingExceeded& ex) {
    v.status = Status::Inconclusive;
    v.reason = ex.what();
  }
  v.peak_terms = rec.budget.peak;
  v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return v;
}

inline Verdict verify_instance(const K3Ring& ring, const InstanceSpec& spec, const VerifyOptions& options = {}) {
  auto start = std::chrono::steady_clock::now();
  HilbExpr gamma;
  try {
    TermBudget budget{options.term_ceiling, 0};
    gamma = build_gamma(ring, spec, &budget);
  } catch (const TermCeilingExceeded& ex) {
    Verdict v;
    v.status = Status::Inconclusive;
    v.reason = ex.what();
    return v;
  } catch (const std::invalid_argument& ex) {
    Verdict v;
    v.status = Status::InputError;
    v.reason = ex.what();
    return v;
  }
  Verdict v = verify_zero(ring, gamma, options);
  v.wall_time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return v;
}

}  // namespace k3taut
