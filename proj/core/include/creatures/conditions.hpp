#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "creatures/objects.hpp"
#include "creatures/weighted.hpp"

namespace creatures {

// A finite-horizon forcing condition: a committed history, then one
// creature per remaining level up to the horizon.
struct Condition {
  LadderRef ladder;
  HistorySeq hist;
  std::vector<Creature> creatures;
  unsigned horizon = 0;

  unsigned base_level() const { return hist.length(); }
  const Creature& at_level(unsigned j) const;
};

Condition make_condition(LadderRef ladder, HistorySeq hist, std::vector<Creature> creatures,
                         unsigned horizon);
void validate_condition(const Condition& p);
bool condition_equal(const Condition& a, const Condition& b);
std::uint64_t condition_hash(const Condition& p);

// The recorded norm profile standing in for the divergence demand: the
// nor2 value of every remaining creature, plus whether it is non-decreasing.
struct ProfileReport {
  std::vector<double> nor2_values;
  bool nondecreasing = true;
};
ProfileReport profile_report(const Condition& p);

// Order: q extends p when the committed history grew along weighted
// possibilities of p and every remaining creature refined.
bool leq(const Condition& p, const Condition& q);

// Reachable histories of length j, chaining set(F) choices level by level.
std::vector<HistorySeq> pos_of(const Condition& p, unsigned j);
// p with the commitment advanced to xs (which must be reachable).
Condition lift(const Condition& p, const HistorySeq& xs);

// Coordinate-wise projection onto a nonempty sub-support, debts unchanged.
Condition project_condition(const Condition& q, const Support& u);

// Given r extending the projection of q, rebuild a condition above q whose
// projection extends r; the history extension picks the lowest-rank
// witness, the creatures come from extend_restriction.
Condition complete_lift(const Condition& q, const Condition& r);

// Order-isomorphic support relabeling (positional), for histories, weight
// functions, and whole conditions.
HistorySeq transfer_history(const HistorySeq& xs, const Support& target);
WeightedPos transfer_weighted(const WeightedPos& f, const Support& target);
Condition transfer(const Condition& p, const Support& target);

struct AmalgamationLevel {
  unsigned level = 0;
  bool checked = false;  // norm-drop comparator ran (needs k >= 3)
  bool drop_ok = false;
};
struct AmalgamationReport {
  std::vector<AmalgamationLevel> levels;
};

// Merge two conditions over a Delta-system support pair, the second a
// transferred copy of the first: histories are united coordinate-wise,
// creatures become products, debts are shared. Projections onto both
// supports dominate the inputs; the norm drop stays within 1 whenever the
// norm base is at least 3.
Condition amalgamate(const Condition& p1, const Condition& p2,
                     AmalgamationReport* report = nullptr);

// A level-indexed name: finitely many decision tables, one per declared
// level, keyed by the canonical identifier of the deciding history.
struct LevelName {
  Support u;
  std::map<unsigned, unsigned> value_width;                    // level -> width of the value
  std::map<unsigned, std::map<HistoryKey, BitString>> tables;  // level -> table on histories
};
void validate_name(const Ladder& ladder, const LevelName& name);
// Value decided at level length(xs) - 1; histories on larger supports are
// restricted to the name's support first.
BitString decide(const Ladder& ladder, const LevelName& name, const HistorySeq& xs);

// Equality of projections onto the empty support: same debt and same
// density (which pins the norms exactly).
bool proj_equal_trivial(const Creature& c1, const Creature& c2);

// Canonical common refinement: pointwise-minimum creatures over the longer
// history. Empty when the two conditions are incompatible.
std::optional<Condition> common_refinement(const Condition& a, const Condition& b);
bool compatible(const Condition& a, const Condition& b);

// Creature-wise dyadic approximation; requires nor1 > 1 at every level.
Condition densify_condition(const Condition& p);

}  // namespace creatures
