#pragma once

#include "k3taut/rational.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

namespace k3taut {

/// Neron-Severi lattice of the K3 surface: a basis D_0..D_{r-1} of divisor
/// classes and their intersection numbers. D_i.D_j = gram[i][j] * c_X.
class SurfaceModel {
 public:
  /// Degree-2 polarized K3: rank one, D.D = 2.
  SurfaceModel() : SurfaceModel(std::vector<std::vector<Rational>>{{Rational(2)}}) {}

  explicit SurfaceModel(std::vector<std::vector<Rational>> gram) : gram_(std::move(gram)) {
    const std::size_t r = gram_.size();
    if (r == 0) throw std::invalid_argument("Neron-Severi rank must be positive");
    if (r > 255) throw std::invalid_argument("Neron-Severi rank too large");
    for (const auto& row : gram_)
      if (row.size() != r) throw std::invalid_argument("gram matrix is not square");
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (gram_[i][j] != gram_[j][i]) throw std::invalid_argument("gram matrix is not symmetric");
    if (determinant() == 0) throw std::invalid_argument("gram matrix is degenerate");
  }

  int ns_rank() const { return static_cast<int>(gram_.size()); }
  const Rational& pairing(int i, int j) const { return gram_.at(i).at(j); }
  const std::vector<std::vector<Rational>>& gram() const { return gram_; }

  Rational determinant() const {
    auto m = gram_;
    const std::size_t r = m.size();
    Rational det = 1;
    for (std::size_t c = 0; c < r; ++c) {
      std::size_t p = c;
      while (p < r && m[p][c] == 0) ++p;
      if (p == r) return 0;
      if (p != c) {
        std::swap(m[p], m[c]);
        det = -det;
      }
      det *= m[c][c];
      for (std::size_t i = c + 1; i < r; ++i) {
        if (m[i][c] == 0) continue;
        Rational f = m[i][c] / m[c][c];
        for (std::size_t j = c; j < r; ++j) m[i][j] -= f * m[c][j];
      }
    }
    return det;
  }

  friend bool operator==(const SurfaceModel&, const SurfaceModel&) = default;

 private:
  std::vector<std::vector<Rational>> gram_;
};

/// A divisor class in coordinates of the Neron-Severi basis.
struct DivisorClass {
  std::vector<Rational> coeffs;

  static DivisorClass basis(const SurfaceModel& s, int j) {
    DivisorClass d;
    d.coeffs.assign(s.ns_rank(), Rational(0));
    d.coeffs.at(j) = 1;
    return d;
  }

  void check(const SurfaceModel& s) const {
    if (static_cast<int>(coeffs.size()) != s.ns_rank())
      throw std::invalid_argument("divisor coordinate count does not match Neron-Severi rank");
  }

  Rational dot(const SurfaceModel& s, const DivisorClass& o) const {
    check(s);
    o.check(s);
    Rational sum = 0;
    for (int i = 0; i < s.ns_rank(); ++i)
      for (int j = 0; j < s.ns_rank(); ++j) sum += coeffs[i] * s.pairing(i, j) * o.coeffs[j];
    return sum;
  }
};

}  // namespace k3taut
