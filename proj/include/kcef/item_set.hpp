#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "kcef/rational.hpp"

namespace kcef {

/// Subset of the items {0, ..., n-1}, stored as a bitmask. Indices are
/// 0-based in the API; files and CLI output use 1-based indices.
class ItemSet {
 public:
  static constexpr int kMaxItems = 64;

  constexpr ItemSet() = default;
  constexpr explicit ItemSet(std::uint64_t bits) : bits_(bits) {}

  static ItemSet full(int n) {
    return ItemSet(n >= kMaxItems ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1));
  }

  static ItemSet from_indices(const std::vector<int>& indices) {
    ItemSet s;
    for (int i : indices) {
      if (i < 0 || i >= kMaxItems) throw InputError("item index out of range: " + std::to_string(i));
      if (s.contains(i)) throw InputError("duplicate item index: " + std::to_string(i));
      s = s.with(i);
    }
    return s;
  }

  /// Interprets a 0/1 vector; any entry other than 0 or 1 is an input error.
  static ItemSet from_bits(const std::vector<int>& bits) {
    if (bits.size() > static_cast<std::size_t>(kMaxItems)) throw InputError("bit vector too long");
    ItemSet s;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] != 0 && bits[i] != 1) throw InputError("bit vector entries must be 0 or 1");
      if (bits[i]) s = s.with(static_cast<int>(i));
    }
    return s;
  }

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(int i) const { return (bits_ >> i) & 1U; }
  constexpr ItemSet with(int i) const { return ItemSet(bits_ | (std::uint64_t{1} << i)); }
  constexpr ItemSet without(int i) const { return ItemSet(bits_ & ~(std::uint64_t{1} << i)); }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }

  ItemSet complement(int n) const { return ItemSet(~bits_ & full(n).bits_); }
  constexpr ItemSet operator&(ItemSet o) const { return ItemSet(bits_ & o.bits_); }
  constexpr ItemSet operator|(ItemSet o) const { return ItemSet(bits_ | o.bits_); }
  constexpr ItemSet minus(ItemSet o) const { return ItemSet(bits_ & ~o.bits_); }
  constexpr bool subset_of(ItemSet o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool operator==(const ItemSet&) const = default;
  constexpr auto operator<=>(const ItemSet&) const = default;

  std::vector<int> indices() const {
    std::vector<int> out;
    for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
    return out;
  }

  std::vector<int> to_bits(int n) const {
    std::vector<int> out(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = contains(i) ? 1 : 0;
    return out;
  }

  /// 1-based, brace-delimited, e.g. "{1,3}".
  std::string to_string() const {
    std::string s = "{";
    bool first = true;
    for (int i : indices()) {
      if (!first) s += ",";
      s += std::to_string(i + 1);
      first = false;
    }
    return s + "}";
  }

 private:
  std::uint64_t bits_ = 0;
};

/// Lexicographic order on sorted index lists ({1,2} < {1,3} < {2}; a proper
/// prefix sorts first).
inline bool lex_less(ItemSet a, ItemSet b) {
  std::vector<int> x = a.indices();
  std::vector<int> y = b.indices();
  return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
}

}  // namespace kcef
