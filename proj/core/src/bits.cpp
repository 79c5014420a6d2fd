#include "creatures/bits.hpp"

#include <stdexcept>

namespace creatures {

BitString make_bits(unsigned width, std::uint64_t value) {
  if (width > 63) throw std::invalid_argument("make_bits: width > 63");
  if (width < 64 && (value >> width) != 0)
    throw std::invalid_argument("make_bits: value out of range for width");
  return BitString{width, value};
}

BitString restrict_bits(BitString s, unsigned m) {
  if (m > s.width) throw std::invalid_argument("restrict_bits: m exceeds width");
  return BitString{m, m == 0 ? 0 : s.value >> (s.width - m)};
}

int bit_at(BitString s, unsigned j) {
  if (j >= s.width) throw std::invalid_argument("bit_at: index out of range");
  return static_cast<int>((s.value >> (s.width - 1 - j)) & 1u);
}

bool is_prefix(BitString shorter, BitString longer) {
  if (shorter.width > longer.width) return false;
  return restrict_bits(longer, shorter.width) == shorter;
}

std::string bits_str(BitString s) {
  std::string r = "(" + std::to_string(s.width) + ",";
  for (unsigned j = 0; j < s.width; ++j) r += static_cast<char>('0' + bit_at(s, j));
  if (s.width == 0) r += "-";
  r += ")";
  return r;
}

}  // namespace creatures
