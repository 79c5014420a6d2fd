#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "creatures/conditions.hpp"
#include "creatures/labeling.hpp"
#include "creatures/weighted.hpp"

namespace creatures {

// Outcome flavor of one splitting step: either every surviving product
// possibility separates the two label readings, or all of them agree and
// the common value factors through the core.
enum class StepMode { differ, agree };

const char* step_mode_name(StepMode m);

// Per-core-fiber record of the median split.
struct StepFiber {
  Int core_rank;                 // rank of the shared-support restriction
  Rat k_g;                       // fiber mass, equal on the two sides
  std::uint64_t m1 = 0, m2 = 0;  // chosen median labels
  unsigned iota = 0;             // case tag 1..5
  Rat kept_mass;                 // common fiber mass after cut and equalization
  bool in_agree_class = false;   // case 1 with matching medians
};

struct DisjointifyStep {
  WeightedPos f1, f2;  // thinned sides, same supports as the inputs
  WeightedPos f;       // their product
  StepMode mode = StepMode::differ;
  // Core rank -> common label, for the kept fibers (agree mode only).
  std::map<Int, std::uint64_t> agree_label;
  std::vector<StepFiber> fibers;
  Rat sum_agree, sum_differ;  // kept-mass totals of the two fiber classes
  std::string certificate;
};

// One label-splitting step over a balanced pair with disjoint support
// surplus: per core fiber, cut each side around its median label, equalize
// masses, then keep the heavier of the agreeing / separating fiber classes.
// Each side retains at least an eighth of its mass, exactly.
DisjointifyStep disjointify_step(const WeightedPos& f1, const WeightedPos& f2,
                                 const StepLabels& lab1, const StepLabels& lab2);

// Key of a partial reading: the restricted lower history and the core
// successor above it.
using ReadingKey = std::pair<HistoryKey, HistoryKey>;
using ReadingMap = std::map<ReadingKey, BitString>;

struct DisjointifyLevel {
  WeightedPos f1, f2;  // thinned sides after all steps
  WeightedPos f;       // their product
  ReadingMap h1, h2;   // partial readings backing the agree steps
  std::vector<StepMode> modes;  // one per history in canonical order
  std::uint64_t steps = 0;
  Rat input_density;          // common density of the input pair
  bool mass_ok = false;       // 8^steps * ||f_l'|| >= ||f_l||, exact
  bool density_ok = false;    // density(f) >= a^3 / 2^(9 steps + 3), exact
  bool gamma_ok = false;      // agreeing labels always read through h1/h2
  bool delta_ok = false;      // per-history agreement truth value is constant
  std::string certificate;
};

// The level loop: one splitting step per reachable lower history, with
// labels induced by the branch labelings through suc.
DisjointifyLevel disjointify_level(const WeightedPos& f1, const WeightedPos& f2,
                                   const BranchLabeling& H1, const BranchLabeling& H2);

// Reading rule keyed by the rank of the restricted possibility.
using ReadingRule = std::map<Int, BitString>;

struct CoincidenceReport {
  Rat overall;      // fraction of the whole space realizing the coincidence
  Rat fiber_bound;  // 2^-(n_i - n_(i-1))
  bool within_bound = false;  // every restriction class stays under the bound
  bool exhaustive = false;    // extensions enumerated directly, closed form cross-checked
};

// Exact fraction of possibilities h whose transported reading at alpha
// coincides: f_y(alpha)(rule1(h0)) = g_y(alpha)(rule2(h0)) with h0 the
// restriction away from alpha and y the successor object along xbar.
CoincidenceReport coincidence_fraction(const Ladder& ladder, unsigned level, const Support& u,
                                       std::uint32_t alpha, const HistorySeq& xbar,
                                       const ReadingRule& rule1, const ReadingRule& rule2);

// Two-coordinate form reduced to the one-coordinate form at alpha1: the
// second core reading is transported through the top pair at alpha2 of the
// successor along xbar restricted away from alpha1.
struct ReductionRules {
  ReadingRule rule1, rule2;
};
ReductionRules coincidence_reduction(const Ladder& ladder, unsigned level, const Support& u,
                                     std::uint32_t alpha1, std::uint32_t alpha2,
                                     const HistorySeq& xbar, const Support& w,
                                     const std::map<HistoryKey, BitString>& core_rule1,
                                     const std::map<HistoryKey, BitString>& core_rule2);

struct ObstructionWitness {
  HistorySeq xbar;
  std::uint32_t alpha = 0;
  ReadingRule rule1, rule2;
};

struct ObstructionVerdict {
  bool hypothesis_holds = false;  // the coincidence fires on all of set(F)
  bool threshold_regime = false;  // 2^(n_i - n_(i-1)) >= k^(3^k - 1)
  bool exact_zero = false;        // exact-zero branch of nor0 on the weight function
  Rat density;
  Rat fraction;  // overall coincidence fraction of the full space
  std::string certificate;
};

// The counting obstruction: a creature whose set is trapped by a transported
// coincidence is thinner than one fiber slice, which at a wide enough ladder
// forces the zero branch of the norm. Throws when the forced implication
// fails - that would be an engine bug, not an input error.
ObstructionVerdict nor_zero_obstruction(const Creature& c, const ObstructionWitness& wit);

struct CreatureDisjointReport {
  Creature d1, d2;
  WeightedPos f;  // product of the two refined weight functions
  DisjointifyLevel pass1, pass2;
  bool proj_equal = false;  // core projections of d1, d2 agree exactly
  double nor2_in1 = 0, nor2_in2 = 0, nor2_out1 = 0, nor2_out2 = 0;
  bool drop_ok = false;  // nor2 dropped by at most 1 on both sides
  std::uint64_t gamma_vacuous = 0, gamma_satisfied = 0, gamma_violated = 0;
  bool gamma_ok = false;  // label agreement forces transported separation
  std::uint64_t pass2_agree = 0;      // second-pass steps that still agree
  std::uint64_t default_labels = 0;   // derived labels filled canonically
  std::vector<ObstructionVerdict> agree_obstructions;  // one per surviving agree step
  bool guaranteed = false;  // ladder growth makes the norm clauses theorems
  std::string certificate;
};

// Creature-level disjointification at two separated coordinates: two level
// loops, the second on labels transported through the coordinate pairs, an
// obstruction audit of every surviving agree step, and the final exhaustive
// separation check.
CreatureDisjointReport disjointify_creatures(const Creature& c1, const Creature& c2,
                                             const BranchLabeling& H1, const BranchLabeling& H2,
                                             std::uint32_t alpha1, std::uint32_t alpha2);

// One scheduled name: the coordinates it separates and, per level from its
// activation on, the pair of branch labelings it reads.
struct NamePair {
  std::uint32_t alpha1 = 0, alpha2 = 0;
  std::map<unsigned, std::pair<BranchLabeling, BranchLabeling>> readings;
};

struct NormalFormReport {
  bool structural = false;   // supports, histories, horizons, schedule shape
  bool norm_floors = false;  // nor2 > 2j+2 from the j-th activation on
  std::vector<std::string> issues;
};

// Validates the explicit preconditions of the disjoint amalgamation:
// delta-system supports, transfer-compatible inputs, equal core
// projections, activation schedule shape, reading coverage, norm floors.
NormalFormReport reading_normal_form(const Condition& p1, const Condition& p2,
                                     const std::vector<NamePair>& names,
                                     const std::vector<unsigned>& schedule);

struct DisjointAmalgamStep {
  unsigned level = 0;
  std::size_t name_index = 0;
  CreatureDisjointReport report;
};

struct DisjointAmalgam {
  Condition q;
  bool project_dominates = false;  // q projects onto extensions of both inputs
  bool forced_disjoint = false;    // label agreement implies cone disjointness
  std::uint64_t agreements_checked = 0;
  std::uint64_t premise_failures = 0;
  std::uint64_t cone_failures = 0;
  bool guaranteed = false;
  std::vector<DisjointAmalgamStep> steps;
  std::string certificate;
};

// Amalgamation with scheduled separation: per level every active name gets
// one creature-level disjointification, chained; the merged condition then
// carries the product creatures. Every label agreement among reachable
// histories of the result is checked to sit on disjoint cones. schedule[j]
// is the level at which name j activates; names stay active through the
// horizon. An empty name list is a plain amalgamation.
DisjointAmalgam amalgamate_disjoint(const Condition& p1, const Condition& p2,
                                    const std::vector<NamePair>& names,
                                    const std::vector<unsigned>& schedule);

}  // namespace creatures
