#pragma once

#include "k3taut/k3_ring.hpp"

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace k3taut {

/// A zero-cycle on X: a rational combination of formal points [x_id] and c_X.
/// Points declared to lie on a rational curve are replaced by c_X.
struct ZeroCycleExpr {
  std::map<int, Rational> points;
  Rational cx = 0;
  std::set<int> rational_curve_points;

  Rational degree() const {
    Rational d = cx;
    for (const auto& [id, c] : points) d += c;
    return d;
  }

  ZeroCycleExpr resolved() const {
    ZeroCycleExpr out;
    out.cx = cx;
    for (const auto& [id, c] : points) {
      if (c == 0) continue;
      if (rational_curve_points.count(id))
        out.cx += c;
      else
        out.points[id] += c;
    }
    return out;
  }

  /// sum_{j=1}^{i} [x_j] - i c_X.
  static ZeroCycleExpr effective(int i) {
    ZeroCycleExpr z;
    for (int j = 1; j <= i; ++j) z.points[j] = 1;
    z.cx = -i;
    return z;
  }

  friend bool operator==(const ZeroCycleExpr&, const ZeroCycleExpr&) = default;
};

inline K3Ring point_square_ring(const SurfaceModel& surface) {
  return K3Ring(surface, RingOptions{.point_square_rule = true});
}

/// p_1^* xi ... p_m^* xi on X^m (factors 1..m), reduced with the point-square rule.
inline TautClass boxtimes_power(const K3Ring& ps_ring, const ZeroCycleExpr& xi, int m) {
  if (m < 1) throw std::invalid_argument("boxtimes power needs m >= 1");
  if (m > Factor::kMaxMain) throw std::invalid_argument("boxtimes power too large");
  if (!ps_ring.options().point_square_rule) throw std::invalid_argument("boxtimes_power needs the point-square rule");
  ZeroCycleExpr z = xi.resolved();
  FactorSet fs = FactorSet::range(1, m);
  TautClass out = ps_ring.one(fs);
  for (int t = 1; t <= m; ++t) {
    Factor f = Factor::main(t);
    TautClass pulled = ps_ring.point(fs, f) * z.cx;
    for (const auto& [id, c] : z.points) pulled += ps_ring.formal_point(fs, f, id) * c;
    out = ps_ring.mul(out, pulled);
    if (out.empty()) break;
  }
  return out;
}

enum class PointSquareProbe { FormalPoint, Cx, Divisor };

struct PointSquareCertificate {
  TautClass multiplied_first;  // ([x]^{(1)} Dbar_{01}) Dbar_{02} Dbar_{03}, pushed to factors 2, 3
  TautClass target;            // ([x] - c_X)^{x2} on factors 2, 3
  TautClass reduced_first;     // (Dbar_{01} Dbar_{02} Dbar_{03}) [x]^{(1)}, pushed to factors 2, 3
  bool certified = false;
};

/// Evaluates p_{23*}(Dbar_{01} Dbar_{02} Dbar_{03} p_1^*[x]) in two orders on
/// X^4. Multiplying by [x] first reaches ([x] - c_X)^{x2}; reducing the
/// triple product first reaches 0. Their agreement is the point-square rule.
inline PointSquareCertificate derive_point_square_rule(const K3Ring& ring, PointSquareProbe probe = PointSquareProbe::FormalPoint,
                                                       int id = 1) {
  if (ring.options().point_square_rule) throw std::invalid_argument("the derivation must not assume the rule");
  FactorSet fs = FactorSet::range(0, 3);
  auto f = [](int t) { return t == 0 ? Factor::distinguished() : Factor::main(t); };
  TautClass x(fs);
  switch (probe) {
    case PointSquareProbe::FormalPoint: x = ring.formal_point(fs, f(1), id); break;
    case PointSquareProbe::Cx: x = ring.point(fs, f(1)); break;
    case PointSquareProbe::Divisor: x = ring.basis_divisor(fs, f(1), 0); break;
  }
  auto push23 = [&](const TautClass& c) {
    return ring.pushforward_forget(ring.pushforward_forget(c, f(0)), f(1));
  };
  TautClass a = x;
  for (int t = 1; t <= 3; ++t) a = ring.mul(a, ring.normalized_diagonal(fs, f(0), f(t)));
  TautClass b = ring.one(fs);
  for (int t = 1; t <= 3; ++t) b = ring.mul(b, ring.normalized_diagonal(fs, f(0), f(t)));
  b = ring.mul(b, x);

  PointSquareCertificate cert;
  cert.multiplied_first = push23(a);
  cert.reduced_first = push23(b);
  FactorSet out = FactorSet::range(2, 3);
  cert.target = TautClass(out);
  if (probe == PointSquareProbe::FormalPoint) {
    TautClass y2 = ring.formal_point(out, f(2), id) - ring.point(out, f(2));
    TautClass y3 = ring.formal_point(out, f(3), id) - ring.point(out, f(3));
    cert.target = ring.mul(y2, y3);
  }
  cert.certified = cert.multiplied_first == cert.target && cert.reduced_first.empty();
  return cert;
}

struct FiltrationReport {
  std::optional<int> index;          // least i with xi^{x(i+1)} = 0, if found
  std::vector<std::size_t> residual_terms;  // normal-form size of xi^{xm} for m = 1, 2, ...
  bool monotone = true;              // xi^{x(i+2)} also vanished
};

/// Least i <= max_m with xi^{x(i+1)} reducing to zero. Nonvanishing is never
/// claimed: when nothing reduces, index is empty.
inline FiltrationReport filtration_index(const K3Ring& ps_ring, const ZeroCycleExpr& xi, int max_m) {
  if (max_m < 0) throw std::invalid_argument("max_m must be nonnegative");
  ZeroCycleExpr z = xi.resolved();
  if (z.degree() != 0) throw std::invalid_argument("filtration index needs a degree-zero cycle, got degree " + z.degree().get_str());
  FiltrationReport r;
  for (int i = 0; i <= max_m; ++i) {
    TautClass p = boxtimes_power(ps_ring, z, i + 1);
    r.residual_terms.push_back(p.size());
    if (p.empty()) {
      r.index = i;
      r.monotone = boxtimes_power(ps_ring, z, i + 2).empty();
      break;
    }
  }
  return r;
}

}  // namespace k3taut
