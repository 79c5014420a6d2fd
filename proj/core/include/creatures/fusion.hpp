#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "creatures/coding.hpp"
#include "creatures/conditions.hpp"
#include "creatures/disjoint.hpp"

namespace creatures {

// A condition transformer. Every application is re-validated: the output
// must extend the input in the condition order or it is rejected.
using OracleFn = std::function<Condition(const Condition&)>;

// Registered oracles:
//   noop         identity
//   advance      extend the base history along the least-rank possibility
//   halve:<j>    raise the debt at ladder level j to the norm midpoint
//   densify      round every creature to the dyadic grid
OracleFn resolve_oracle(const std::string& id);
std::vector<std::string> oracle_names();

// Labeling rules, one branch labeling per (support, level) on demand:
//   constant:<v>          every history labeled v (mod the level width)
//   seeded:<s>            seeded pseudorandom labels
//   follow:<alpha>:<v>    preimage of the probe's top bits at alpha
BranchLabeling resolve_labeling(const std::string& rule, LadderRef ladder, Support u,
                                unsigned level);

struct OracleSpec {
  unsigned level = 0;  // tree level whose condition the oracle refines
  std::string id;
  unsigned width = 0;  // required support width; 0 accepts any
};

// A scheduled separation obligation: at the step from tree_level to
// tree_level + 1 the two fresh sibling coordinates are separated by one
// name, reading the two rules from ladder level `activation` on. Several
// names may share a tree level with strictly increasing activations.
struct FusionNameSpec {
  unsigned tree_level = 0;
  std::string rule1, rule2;
  unsigned activation = 2;  // first ladder level the readings cover
};

// Blueprint of the finite fusion: a binary tree with exactly one splitting
// node per level, so level i carries i + 1 nodes; coordinate m of the level
// condition is the m-th node in lexicographic order.
struct FusionPlan {
  LadderRef ladder;
  unsigned depth = 0;
  Condition root;                     // support {0}
  std::vector<std::uint32_t> splits;  // lex rank of the splitting node, per level
  std::vector<OracleSpec> oracles;
  std::vector<FusionNameSpec> names;  // grouped by tree level at build time
};
void validate_plan(const FusionPlan& plan);

// Supports of the two transferred copies inside {0, ..., level+1}: the
// splitting rank s duplicates into s and s+1, later ranks shift up.
Support split_image(unsigned level, std::uint32_t split, unsigned ell);

struct FusionLevelRecord {
  std::vector<BitString> nodes;  // the tree level, lex sorted
  std::uint32_t split = 0;       // meaningful below the bottom level
  Condition cond;                // after this level's oracle refinements
};

struct FusionTree {
  FusionPlan plan;
  std::vector<FusionLevelRecord> levels;  // depth + 1 records
  bool clause_extension = false;  // every transferred parent sits below the
                                  // matching projection of its child level
  std::uint64_t oracles_applied = 0;
  std::uint64_t oracles_skipped = 0;
  std::vector<std::string> skipped;        // one line per width-mismatched oracle
  std::vector<DisjointAmalgam> name_runs;  // per scheduled name, by tree level
  std::string certificate;
};

// Level-by-level construction: transfer the level condition through the two
// child injections, amalgamate (with scheduled separation when a name is
// due), then refine by the level's oracles. Deterministic end to end.
FusionTree build_fusion(const FusionPlan& plan);

// Per-level permutations read off a history at one coordinate.
KappaSeq kappa_of(LadderRef ladder, const HistorySeq& xs, std::uint32_t alpha);

struct BranchExtract {
  HistorySeq prefix;             // realized history of the bottom condition
  std::uint32_t leaf_coord = 0;  // lex rank of the leaf
  std::vector<KappaSeq> kappas;  // one per bottom coordinate
  std::string certificate;
};

// Reads off the data of one full-depth branch: the common realized history
// prefix and the per-coordinate permutation sequences.
BranchExtract extract_branch(const FusionTree& tree, BitString leaf);

}  // namespace creatures
