#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "creatures/bits.hpp"
#include "creatures/ladder.hpp"
#include "creatures/perm.hpp"
#include "creatures/support.hpp"

namespace creatures {

// Cantor pairing. The binomial variant collides at (0,0)/(0,1), so the
// bijective form is used throughout.
std::uint64_t pr(std::uint64_t n, std::uint64_t m);
// Graph of a finite partial map, pushed through the pairing.
std::set<std::uint64_t> cd(const std::map<std::uint64_t, std::uint64_t>& h);

// Level-interval coding of nodes: level j occupies the next 2^{n_j} codes.
std::uint64_t coded_total(const Ladder& ladder);
std::uint64_t code_node(const Ladder& ladder, BitString rho);
BitString decode_node(const Ladder& ladder, std::uint64_t n);

// A permutation per level, acting on the nodes of its width.
struct KappaSeq {
  LadderRef ladder;
  std::vector<LevelPerm> perms;

  unsigned length() const { return static_cast<unsigned>(perms.size()); }
};
KappaSeq make_kappa(LadderRef ladder, std::vector<LevelPerm> perms);
void validate_kappa(const KappaSeq& kappa);
KappaSeq identity_kappa(LadderRef ladder, unsigned levels);
std::uint64_t kappa_hash(const KappaSeq& kappa);

// Strict tree order: levels increase and permuted images are prefixes.
bool kappa_less(const KappaSeq& kappa, BitString eta, BitString nu);
// All pairing codes of related node pairs whose codes stay below the bound.
std::set<std::uint64_t> a_kappa(const KappaSeq& kappa, std::uint64_t bound);

// The coded order on an initial segment of the naturals.
struct CodedTree {
  KappaSeq kappa;
  std::uint64_t bound = 0;
};
CodedTree make_coded_tree(KappaSeq kappa);
bool star_less(const CodedTree& tree, std::uint64_t a, std::uint64_t b);

// A finite branch: one node per level, forming a chain in its tree.
struct Branch {
  KappaSeq kappa;
  std::vector<BitString> nodes;
};
void validate_branch(const Branch& b);

// Least level from which the two upward cones share no node, within the
// given data; empty when every level still collides.
std::optional<unsigned> cones_disjoint(const Branch& b1, const Branch& b2);
// Least level from which the two branches never meet again; empty when
// they agree at the top of the data.
std::optional<unsigned> bounded_intersection(const Branch& b1, const Branch& b2);

}  // namespace creatures
