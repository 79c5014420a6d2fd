#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "creatures/bits.hpp"
#include "creatures/ladder.hpp"
#include "creatures/perm.hpp"
#include "creatures/support.hpp"

namespace creatures {

using PermPair = std::pair<LevelPerm, LevelPerm>;

// One slot of a possibility's domain: a coordinate plus the rank of a
// permutation one level down.
struct DomainPoint {
  std::uint32_t alpha = 0;
  Int key_rank;

  friend bool operator==(const DomainPoint&, const DomainPoint&) = default;
  friend bool operator<(const DomainPoint& a, const DomainPoint& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    return a.key_rank < b.key_rank;
  }
};

Int domain_size(const Ladder& ladder, const Support& u, unsigned level);
std::vector<DomainPoint> domain_points(const Ladder& ladder, const Support& u, unsigned level);

// A possibility at one level: for every domain point a pair of width-n_i
// permutations, each extending the point's one-level-down permutation.
// vals is aligned with the canonical domain_points order.
struct PosFunc {
  unsigned level = 0;
  Support u;
  std::vector<PermPair> vals;

  friend bool operator==(const PosFunc&, const PosFunc&) = default;
};

// Number of block extensions of a fixed one-level-down permutation.
Int block_extension_count(const Ladder& ladder, unsigned level);
Int pos_count(const Ladder& ladder, const Support& u, unsigned level);
void validate_pos(const Ladder& ladder, const PosFunc& h);
Int pos_rank(const Ladder& ladder, const PosFunc& h);
PosFunc pos_unrank(const Ladder& ladder, const Support& u, unsigned level, const Int& rank);
const PermPair& pos_at(const Ladder& ladder, const PosFunc& h, std::uint32_t alpha, const Int& key_rank);
PosFunc pos_restrict(const Ladder& ladder, const PosFunc& h, const Support& w);
PosFunc pos_merge(const Ladder& ladder, const PosFunc& a, const PosFunc& b);

// Level-i object: per coordinate the pair (f, g) of width-n_i permutations
// whose one-level-down restrictions agree, plus the extension table e.
// e tables may be sparse; reads fall back to the canonical completion
// (block extension of the key with all fiber codes zero, paired with itself).
struct CreatureObject {
  unsigned level = 0;
  Support u;
  std::vector<LevelPerm> f, g;
  std::vector<std::map<Int, PermPair>> e;

  friend bool operator==(const CreatureObject&, const CreatureObject&) = default;
};

void validate_object(const Ladder& ladder, const CreatureObject& x);
// Returns the table value and whether it came from the default completion.
std::pair<PermPair, bool> e_lookup(const Ladder& ladder, const CreatureObject& x,
                                   std::size_t pos_idx, const Int& key_rank);
CreatureObject object_restrict(const CreatureObject& x, const Support& w);
bool is_successor(const Ladder& ladder, const CreatureObject& x, const CreatureObject& y);

// Chain of objects, one per level starting at 0.
struct HistorySeq {
  Support u;
  std::vector<CreatureObject> entries;

  unsigned length() const { return static_cast<unsigned>(entries.size()); }
  friend bool operator==(const HistorySeq&, const HistorySeq&) = default;
};

HistorySeq empty_history(Support u);
void validate_history(const Ladder& ladder, const HistorySeq& xs);
HistorySeq suc_apply(const Ladder& ladder, const HistorySeq& xs, const PosFunc& h);
HistorySeq history_restrict(const HistorySeq& xs, const Support& w);
bool history_initial(const HistorySeq& shorter, const HistorySeq& longer);
// Recover the possibility that produced entry j (needs a suc-generated entry).
PosFunc step_of(const Ladder& ladder, const HistorySeq& xs, unsigned j);

// Canonical identifier of a suc-generated history: the rank of every step.
using HistoryKey = std::vector<Int>;
HistoryKey history_key(const Ladder& ladder, const HistorySeq& xs);
std::string key_str(const HistoryKey& key);

Int reach_count(const Ladder& ladder, const Support& u, unsigned length);
// All suc-reachable histories of the given length, by ascending step ranks.
std::vector<HistorySeq> enumerate_histories(const Ladder& ladder, const Support& u,
                                            unsigned length);
// Depth-first visit of the same histories without materializing the list.
void for_each_history(const Ladder& ladder, const Support& u, unsigned length,
                      const std::function<void(const HistorySeq&)>& fn);

// Rebuild the f/g components from extension tables alone.
HistorySeq history_from_e(const Ladder& ladder, const Support& u,
                          std::vector<std::vector<std::map<Int, PermPair>>> e_tables);

std::vector<LevelPerm> kappa_of(const HistorySeq& xs, std::uint32_t alpha);

// Tree order attached to a coordinate: node eta at level i precedes node nu
// at level j when i < j and the permuted images are prefix-comparable.
bool tree_less(const Ladder& ladder, const HistorySeq& xs, std::uint32_t alpha,
               BitString eta, BitString nu);

struct ConeCheck {
  bool premise = false;   // the transported nodes differ
  bool disjoint = false;  // no common upper node across the two trees
};
ConeCheck cone_disjointness(const Ladder& ladder, const HistorySeq& xs, std::uint32_t alpha1,
                            std::uint32_t alpha2, unsigned level, BitString eta1, BitString eta2);

}  // namespace creatures
