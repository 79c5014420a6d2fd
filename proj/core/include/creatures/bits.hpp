#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace creatures {

// Binary string of fixed width. Position j counts from the left, so the
// numeric value is sum over j of bit(j) * 2^(width-1-j) and an initial
// segment of the string is the block of top bits.
struct BitString {
  unsigned width = 0;
  std::uint64_t value = 0;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    if (auto c = a.width <=> b.width; c != 0) return c;
    return a.value <=> b.value;
  }
};

BitString make_bits(unsigned width, std::uint64_t value);

// Initial segment: the top m bits.
BitString restrict_bits(BitString s, unsigned m);
int bit_at(BitString s, unsigned j);
bool is_prefix(BitString shorter, BitString longer);
std::string bits_str(BitString s);

}  // namespace creatures
