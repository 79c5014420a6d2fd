#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "creatures/bits.hpp"
#include "creatures/rational.hpp"

namespace creatures {

// Iterated power tower: beth(0) = 1, beth(j+1) = 2^beth(j). Values from
// index 6 on cannot be materialized and are reported symbolically.
struct BethValue {
  unsigned index = 0;
  bool symbolic = false;
  Int value;  // meaningful only when !symbolic
  std::string str() const;
};
BethValue beth(unsigned j);

// Finite instantiation of the width/norm/log parameter triple per level.
// Desk-scale replaces the tower-sized parameters by small numbers; the
// paper_scale flag records whether the growth side conditions still hold.
class Ladder {
 public:
  Ladder(std::vector<unsigned> n, std::vector<unsigned> k, std::vector<unsigned> l,
         std::uint64_t enum_cap = std::uint64_t(1) << 24);

  unsigned levels() const { return static_cast<unsigned>(n_.size()); }
  unsigned width(unsigned i) const;
  // Width one level down; the level-0 value is stipulated to be 0.
  unsigned width_below(unsigned i) const;
  unsigned norm_base(unsigned i) const;
  unsigned log_base(unsigned i) const;
  std::uint64_t enum_cap() const { return enum_cap_; }
  bool paper_scale() const { return paper_scale_; }

  std::string spec_string() const;
  static Ladder parse(const std::string& text);

  friend bool operator==(const Ladder&, const Ladder&) = default;

 private:
  std::vector<unsigned> n_, k_, l_;
  std::uint64_t enum_cap_;
  bool paper_scale_ = false;
};

using LadderRef = std::shared_ptr<const Ladder>;
LadderRef make_ladder(std::vector<unsigned> n, std::vector<unsigned> k, std::vector<unsigned> l,
                      std::uint64_t enum_cap = std::uint64_t(1) << 24);

// Refuse enumerations larger than the ladder cap, loudly.
void check_enum_cap(const Ladder& ladder, const Int& size, const char* what);

}  // namespace creatures
