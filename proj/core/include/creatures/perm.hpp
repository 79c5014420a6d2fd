#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "creatures/bits.hpp"
#include "creatures/rational.hpp"

namespace creatures {

// Permutation of the width-w binary strings, stored as the image array over
// string values. Canonical order on a class of permutations is lexicographic
// on the image array, which coincides with Lehmer-code rank order.
struct LevelPerm {
  unsigned width = 0;
  std::vector<std::uint32_t> img;

  static LevelPerm identity(unsigned width);
  std::uint32_t apply_value(std::uint32_t v) const;
  BitString apply(BitString s) const;
  bool is_valid() const;

  friend bool operator==(const LevelPerm&, const LevelPerm&) = default;
  friend std::strong_ordering operator<=>(const LevelPerm& a, const LevelPerm& b) {
    if (auto c = a.width <=> b.width; c != 0) return c;
    return a.img <=> b.img;
  }
};

// (a after b): compose(a, b).apply(x) == a.apply(b.apply(x)).
LevelPerm compose(const LevelPerm& a, const LevelPerm& b);
LevelPerm inverse(const LevelPerm& p);

Int perm_count(unsigned width);  // (2^width)!
Int perm_rank(const LevelPerm& p);
LevelPerm perm_unrank(unsigned width, const Int& rank);

// pi moves every string within the fiber over g: restricting pi's output to
// g.width agrees with g on the restricted input.
bool perm_extends(const LevelPerm& pi, const LevelPerm& g);

// The extensions of g to top_width decompose into independent bijections
// between prefix fibers; their count and a canonical mixed-radix ranking.
Int block_extension_count_w(unsigned top_width, unsigned g_width);
Int block_extension_index(const LevelPerm& pi, const LevelPerm& g);
LevelPerm block_extension_make(const LevelPerm& g, unsigned top_width, const Int& index);

}  // namespace creatures
