#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace k3taut {

/// One X-factor of an ambient product X^N, stored as a bit position 0..63.
///
/// Slot layout:
///   0        the distinguished factor "0" (X = X^[1] at the base of the recursion)
///   1..31    main factors t = 1..31
///   32..47   auxiliary factors ^h for h = -7..8 (^0, ^-1, ... are fresh labels)
///   48..63   Nakajima operator positions q0..q15
class Factor {
 public:
  static constexpr int kMaxMain = 31;
  static constexpr int kMinAux = -7;
  static constexpr int kMaxAux = 8;
  static constexpr int kMaxOp = 15;

  constexpr Factor() = default;
  constexpr explicit Factor(std::uint8_t slot) : slot_(slot) {}

  static constexpr Factor distinguished() { return Factor(0); }
  static Factor main(int t) {
    if (t < 1 || t > kMaxMain) throw std::out_of_range("main factor out of range: " + std::to_string(t));
    return Factor(static_cast<std::uint8_t>(t));
  }
  static Factor aux(int h) {
    if (h < kMinAux || h > kMaxAux) throw std::out_of_range("aux factor out of range: " + std::to_string(h));
    return Factor(static_cast<std::uint8_t>(39 + h));
  }
  static Factor op(int p) {
    if (p < 0 || p > kMaxOp) throw std::out_of_range("operator slot out of range: " + std::to_string(p));
    return Factor(static_cast<std::uint8_t>(48 + p));
  }

  constexpr std::uint8_t slot() const { return slot_; }
  constexpr std::uint64_t bit() const { return std::uint64_t{1} << slot_; }

  constexpr bool is_distinguished() const { return slot_ == 0; }
  constexpr bool is_main() const { return slot_ >= 1 && slot_ <= 31; }
  constexpr bool is_aux() const { return slot_ >= 32 && slot_ <= 47; }
  constexpr bool is_op() const { return slot_ >= 48; }
  constexpr int main_index() const { return slot_; }
  constexpr int aux_index() const { return static_cast<int>(slot_) - 39; }
  constexpr int op_index() const { return static_cast<int>(slot_) - 48; }

  std::string name() const {
    if (is_aux()) return "^" + std::to_string(aux_index());
    if (is_op()) return "q" + std::to_string(op_index());
    return std::to_string(slot_);
  }

  friend constexpr auto operator<=>(Factor, Factor) = default;

 private:
  std::uint8_t slot_ = 0;
};

/// A finite set of factors as a 64-bit mask.
class FactorSet {
 public:
  constexpr FactorSet() = default;
  constexpr explicit FactorSet(std::uint64_t mask) : mask_(mask) {}
  FactorSet(std::initializer_list<Factor> fs) {
    for (auto f : fs) mask_ |= f.bit();
  }
  static FactorSet range(int first, int last) {
    FactorSet s;
    for (int t = first; t <= last; ++t) s.insert(Factor(static_cast<std::uint8_t>(t)));
    return s;
  }

  constexpr std::uint64_t mask() const { return mask_; }
  constexpr bool contains(Factor f) const { return (mask_ & f.bit()) != 0; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }
  constexpr void insert(Factor f) { mask_ |= f.bit(); }
  constexpr void erase(Factor f) { mask_ &= ~f.bit(); }
  constexpr FactorSet with(Factor f) const { return FactorSet(mask_ | f.bit()); }
  constexpr FactorSet without(Factor f) const { return FactorSet(mask_ & ~f.bit()); }

  std::vector<Factor> elements() const { return elements_of(mask_); }
  static std::vector<Factor> elements_of(std::uint64_t mask) {
    std::vector<Factor> out;
    while (mask) {
      out.emplace_back(static_cast<std::uint8_t>(std::countr_zero(mask)));
      mask &= mask - 1;
    }
    return out;
  }

  /// Lowest-index aux label strictly below every aux factor present and below ^1.
  Factor fresh_aux() const {
    int lowest = 1;
    for (auto f : elements())
      if (f.is_aux() && f.aux_index() < lowest) lowest = f.aux_index();
    return Factor::aux(lowest - 1);
  }

  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (auto f : elements()) {
      if (!first) s += ",";
      s += f.name();
      first = false;
    }
    return s + "}";
  }

  friend constexpr bool operator==(FactorSet, FactorSet) = default;

 private:
  std::uint64_t mask_ = 0;
};

}  // namespace k3taut
