#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "creatures/ladder.hpp"
#include "creatures/objects.hpp"
#include "creatures/rational.hpp"
#include "creatures/support.hpp"

namespace creatures {

// Weight-function flavors. w/y carry arbitrary rationals, v/x only dyadics
// on the 2^{n_i} grid; w/v are required to be nonzero somewhere, y/x may
// vanish identically.
enum class Flavor { wpos, vpos, ypos, xpos };

const char* flavor_name(Flavor f);
Flavor flavor_parse(const std::string& s);

// A finitely supported weight function on pos^u_i, keyed by possibility
// rank. Stored entries are strictly positive; an absent key weighs 0.
// All weights lie in [0,1].
struct WeightedPos {
  LadderRef ladder;
  unsigned level = 0;
  Support u;
  Flavor flavor = Flavor::ypos;
  std::map<Int, Rat> weights;

  friend bool operator==(const WeightedPos& a, const WeightedPos& b) {
    return a.level == b.level && a.u == b.u && a.flavor == b.flavor && a.weights == b.weights;
  }
};

// Validating constructor; drops explicit zeros, rejects weights outside
// [0,1], ranks outside the space, and flavor violations.
WeightedPos make_weighted(LadderRef ladder, Support u, unsigned level, Flavor flavor,
                          std::map<Int, Rat> weights);
void validate_weighted(const WeightedPos& f);

Int pos_size(const WeightedPos& f);  // |pos^u_i|
Rat mass(const WeightedPos& f);
Rat density(const WeightedPos& f);  // mass / |pos^u_i|
std::vector<Int> set_of(const WeightedPos& f);
std::uint64_t weighted_hash(const WeightedPos& f);
// Pointwise comparison; both arguments must live on the same space.
bool weights_leq(const WeightedPos& lo, const WeightedPos& hi);
// Pointwise sum (clamped nowhere: throws if a sum exceeds 1).
WeightedPos add_weighted(const WeightedPos& a, const WeightedPos& b);

// Characteristic function of the whole space (materializes it, cap-guarded).
WeightedPos uniform_weighted(LadderRef ladder, Support u, unsigned level);
// Characteristic function of the given ranks.
WeightedPos indicator_weighted(LadderRef ladder, Support u, unsigned level,
                               const std::vector<Int>& ranks);

// nor0 = k_i - log3(log_{k_i}(k_i |pos| / mass)), clamped at zero. The zero
// branch is decided by the exact rational test |pos| >= mass * k^(3^k - 1);
// the reported value is floating point.
struct Nor0 {
  bool exact_zero = false;
  double value = 0.0;
};
Nor0 nor0(const WeightedPos& f);  // throws on the zero function

// Exact decision of nor0(f) >= r for a natural r.
bool nor0_at_least(const WeightedPos& f, unsigned r);
// Membership-grade comparison against a rational threshold: exact for
// integral m, floating point (1e-9 slack) otherwise.
bool nor0_at_least_rat(const WeightedPos& f, const Rat& m);

// Exact truth of nor0(fnew) >= nor0(fold) - delta, via
//   k P / mass(fnew) <= (k P / mass(fold))^(3^delta).
// Both functions must live on the same space.
bool nor_drop_leq(const WeightedPos& fnew, const WeightedPos& fold, unsigned delta);
// Same inequality across different spaces (respective sizes supplied).
bool nor_drop_leq_general(unsigned k, const Int& p_new, const Rat& mass_new, const Int& p_old,
                          const Rat& mass_old, unsigned delta);

// A creature is a weight function together with a norm debt m; it belongs
// to the dyadic class when flavor is vpos, to the rational class when wpos,
// in both cases subject to nor0(F) >= m. Membership is queryable, not
// constructor-enforced.
struct Creature {
  WeightedPos F;
  Rat m;

  friend bool operator==(const Creature& a, const Creature& b) = default;
};

double nor1(const Creature& c);  // nor0 value minus m
double nor2(const Creature& c);  // log_{l_i} of nor1, clamped at 0
bool in_cr(const Creature& c);
bool in_underline_cr(const Creature& c);

// Push every weight down to the 2^{n_i} grid. Output flavor is vpos, or
// xpos when rounding kills the function entirely.
WeightedPos round_dyadic(const WeightedPos& f);
// Dyadic approximation of a creature; requires nor1 > 1.
Creature densify(const Creature& c);

// Averaged restriction to a nonempty w <= u; w = u is the identity.
WeightedPos restrict_weighted(const WeightedPos& f, const Support& w);
// Rebuild an extension with a prescribed restriction: f2 lives on u0 < u1,
// is dominated by f1 restricted to u0, and the result g satisfies g <= f1
// and g restricted to u0 equals f2 exactly.
WeightedPos extend_restriction(const WeightedPos& f1, const WeightedPos& f2);

// (f1 * f2)(h) = f1(h on u1) * f2(h on u2) on the union support.
WeightedPos product(const WeightedPos& f1, const WeightedPos& f2);
bool is_balanced(const WeightedPos& f1, const WeightedPos& f2);
bool is_strongly_balanced(const WeightedPos& f1, const WeightedPos& f2);
// Enlarge supports by fresh coordinates (cylinder weights) until the pair
// is strongly balanced; restrictions recover the inputs exactly.
std::pair<WeightedPos, WeightedPos> pad_to_strong(const WeightedPos& f1, const WeightedPos& f2);

struct ProductBound {
  Rat a;        // the common density of the pair
  Rat lhs;      // density of the product
  bool verdict;  // lhs >= a^3 / 8
};
ProductBound balanced_product_bound(const WeightedPos& f1, const WeightedPos& f2);

// d refines c: pointwise smaller weights, at least the same debt.
bool sigma_member(const Creature& d, const Creature& c);
// Pick a maximal-mass part (lowest index on ties) of an exact partition of
// F_c into at most k_i parts; the pick always passes nor_drop_leq(.., 1).
std::size_t bigness_select(const Creature& c, const std::vector<WeightedPos>& parts);

struct HalveInfo {
  double midpoint = 0.0;  // float midpoint of nor0 and m
  Rat rounded;            // midpoint rounded up to the 2^-32 grid
};
// Raise the debt to the midpoint of nor0(F) and m.
Creature halve(const Creature& c, HalveInfo* info = nullptr);
// Undo a halving: keep the refined weights, restore the original debt.
Creature unhalve(const Creature& dprime, const Creature& c);

}  // namespace creatures
