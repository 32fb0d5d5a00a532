#pragma once

#include "k3taut/rational.hpp"

#include <functional>
#include <vector>

namespace k3taut {

/// Chern classes c_1..c_N from Chern character components ch_1..ch_N over any
/// commutative Q-algebra. `ch[k]` is ch_k; ch[0] (the rank) is not used.
/// Returns c with c[0] = one. Uses k c_k = sum_{i=1}^k (-1)^{i-1} c_{k-i} p_i
/// with power sums p_i = i! ch_i.
template <class T, class Mul = std::multiplies<T>>
std::vector<T> newton_c_from_ch(const std::vector<T>& ch, const T& one, Mul mul = {}) {
  const int N = static_cast<int>(ch.size()) - 1;
  std::vector<T> p(ch.size(), one * Rational(0));
  for (int i = 1; i <= N; ++i) p[i] = ch[i] * factorial(i);
  std::vector<T> c(ch.size(), one * Rational(0));
  c[0] = one;
  for (int k = 1; k <= N; ++k) {
    T acc = one * Rational(0);
    for (int i = 1; i <= k; ++i) {
      T term = mul(c[k - i], p[i]);
      if (i % 2 == 1)
        acc += term;
      else
        acc -= term;
    }
    c[k] = acc * Rational(1, k);
  }
  return c;
}

/// Inverse of newton_c_from_ch: ch_1..ch_N from c_1..c_N (ch[0] is set to zero).
/// Uses p_k = (-1)^{k-1} k c_k + sum_{i=1}^{k-1} (-1)^{k-1+i} c_{k-i} p_i.
template <class T, class Mul = std::multiplies<T>>
std::vector<T> newton_ch_from_c(const std::vector<T>& c, const T& one, Mul mul = {}) {
  const int N = static_cast<int>(c.size()) - 1;
  T zero = one * Rational(0);
  std::vector<T> p(c.size(), zero);
  for (int k = 1; k <= N; ++k) {
    T acc = c[k] * Rational(k % 2 == 1 ? k : -k);
    for (int i = 1; i < k; ++i) {
      T term = mul(c[k - i], p[i]);
      if ((k - 1 + i) % 2 == 0)
        acc += term;
      else
        acc -= term;
    }
    p[k] = acc;
  }
  std::vector<T> ch(c.size(), zero);
  for (int k = 1; k <= N; ++k) ch[k] = p[k] * (Rational(1) / factorial(k));
  return ch;
}

/// ch(-E) = -ch(E), componentwise.
template <class T>
std::vector<T> negate_ch(std::vector<T> ch) {
  for (auto& x : ch) x = x * Rational(-1);
  return ch;
}

/// Truncated product of total classes sum a_i and sum b_i, degrees 0..N.
template <class T, class Mul = std::multiplies<T>>
std::vector<T> truncated_product(const std::vector<T>& a, const std::vector<T>& b, const T& zero, Mul mul = {}) {
  std::vector<T> out(a.size(), zero);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; i + j < out.size() && j < b.size(); ++j) out[i + j] += mul(a[i], b[j]);
  return out;
}

}  // namespace k3taut
