#pragma once

#include "k3taut/factor.hpp"

#include <boost/container/small_vector.hpp>

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace k3taut {

enum class DecKind : std::uint8_t { Fund = 0, Div = 1, Pt = 2, FormalPt = 3 };

/// Beauville-Voisin decoration carried by one diagonal block.
/// Div carries a Neron-Severi basis index, FormalPt an undetermined point id.
struct Decoration {
  DecKind kind = DecKind::Fund;
  std::uint8_t index = 0;

  static constexpr Decoration fund() { return {DecKind::Fund, 0}; }
  static constexpr Decoration div(int j) { return {DecKind::Div, static_cast<std::uint8_t>(j)}; }
  static constexpr Decoration pt() { return {DecKind::Pt, 0}; }
  static constexpr Decoration formal_pt(int id) { return {DecKind::FormalPt, static_cast<std::uint8_t>(id)}; }

  constexpr int codim() const {
    switch (kind) {
      case DecKind::Fund: return 0;
      case DecKind::Div: return 1;
      default: return 2;
    }
  }
  constexpr bool is_point() const { return kind == DecKind::Pt || kind == DecKind::FormalPt; }

  friend constexpr auto operator<=>(const Decoration&, const Decoration&) = default;
};

/// A small diagonal Delta_B pushed forward with a decoration on X.
struct Block {
  std::uint64_t members = 0;
  Decoration dec;

  int size() const { return std::popcount(members); }
  int codim() const { return 2 * (size() - 1) + dec.codim(); }

  friend constexpr auto operator<=>(const Block&, const Block&) = default;
};

using Blocks = boost::container::small_vector<Block, 8>;

/// A monomial in diagonals, divisors and point classes: a set partition of
/// the ambient factors with one decoration per block. Singleton Fund blocks
/// are implicit and never stored, so the same object is valid on any factor
/// set containing its support.
///
/// Normal form: Fund blocks have size 2, all other blocks are singletons.
class DecoratedPartition {
 public:
  DecoratedPartition() = default;
  explicit DecoratedPartition(Blocks blocks) : blocks_(std::move(blocks)) { canonicalize(); }

  const Blocks& blocks() const { return blocks_; }
  bool is_identity() const { return blocks_.empty(); }

  std::uint64_t support() const {
    std::uint64_t m = 0;
    for (const auto& b : blocks_) m |= b.members;
    return m;
  }

  int codim() const {
    int c = 0;
    for (const auto& b : blocks_) c += b.codim();
    return c;
  }

  bool is_normal() const {
    for (const auto& b : blocks_) {
      if (b.dec.kind == DecKind::Fund) {
        if (b.size() != 2) return false;
      } else if (b.size() != 1) {
        return false;
      }
    }
    return true;
  }

  /// Block containing factor f, or nullptr when f sits in an implicit Fund singleton.
  const Block* block_of(Factor f) const {
    for (const auto& b : blocks_)
      if (b.members & f.bit()) return &b;
    return nullptr;
  }

  std::size_t hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    for (const auto& b : blocks_) {
      h ^= std::hash<std::uint64_t>{}(b.members * 0xff51afd7ed558ccdull + (static_cast<std::uint64_t>(b.dec.kind) << 8) +
                                      b.dec.index) +
           0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }

  std::string to_string() const {
    if (blocks_.empty()) return "1";
    std::string s;
    for (const auto& b : blocks_) {
      if (!s.empty()) s += "*";
      auto members = FactorSet::elements_of(b.members);
      std::string idx;
      for (std::size_t i = 0; i < members.size(); ++i) idx += (i ? "," : "") + members[i].name();
      switch (b.dec.kind) {
        case DecKind::Fund: s += "D[" + idx + "]"; break;
        case DecKind::Div:
          s += (b.size() == 1 ? "div" + std::to_string(b.dec.index) + "(" + idx + ")"
                              : "D[" + idx + "|div" + std::to_string(b.dec.index) + "]");
          break;
        case DecKind::Pt: s += (b.size() == 1 ? "c(" + idx + ")" : "D[" + idx + "|c]"); break;
        case DecKind::FormalPt:
          s += (b.size() == 1 ? "x" + std::to_string(b.dec.index) + "(" + idx + ")"
                              : "D[" + idx + "|x" + std::to_string(b.dec.index) + "]");
          break;
      }
    }
    return s;
  }

  friend bool operator==(const DecoratedPartition& a, const DecoratedPartition& b) { return a.blocks_ == b.blocks_; }
  friend bool operator<(const DecoratedPartition& a, const DecoratedPartition& b) {
    return std::lexicographical_compare(a.blocks_.begin(), a.blocks_.end(), b.blocks_.begin(), b.blocks_.end());
  }

 private:
  void canonicalize() {
    blocks_.erase(std::remove_if(blocks_.begin(), blocks_.end(),
                                 [](const Block& b) { return b.dec.kind == DecKind::Fund && b.size() <= 1; }),
                  blocks_.end());
    std::sort(blocks_.begin(), blocks_.end());
  }

  Blocks blocks_;
};

struct DecoratedPartitionHash {
  std::size_t operator()(const DecoratedPartition& p) const { return p.hash(); }
};

}  // namespace k3taut
