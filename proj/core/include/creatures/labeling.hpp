#pragma once

#include <cstdint>
#include <map>

#include "creatures/bits.hpp"
#include "creatures/ladder.hpp"
#include "creatures/objects.hpp"
#include "creatures/support.hpp"

namespace creatures {

// Labels on possibility ranks at a single level, drawn from a canonically
// ordered finite set {0, ..., label_count-1}. Callers must cover every rank
// they feed to the splitting step; unlisted ranks are an error there.
struct StepLabels {
  std::uint64_t label_count = 0;
  std::map<Int, std::uint64_t> at;
};

void validate_step_labels(const StepLabels& lab);

// Total labeling of the reachable histories one step above a level: every
// suc-generated history of length level+1 over u gets a width-n_level value.
struct BranchLabeling {
  LadderRef ladder;
  Support u;
  unsigned level = 0;
  std::map<HistoryKey, BitString> table;
};

BranchLabeling make_labeling(LadderRef ladder, Support u, unsigned level,
                             std::map<HistoryKey, BitString> table);
void validate_labeling(const BranchLabeling& h);
const BitString& label_of(const BranchLabeling& h, const HistorySeq& ys);

// Every history gets the same value.
BranchLabeling labeling_constant(LadderRef ladder, Support u, unsigned level, BitString value);
// Independent draws from a seeded generator, one per history in canonical
// enumeration order.
BranchLabeling labeling_seeded(LadderRef ladder, Support u, unsigned level, std::uint64_t seed);
// Follows a fixed branch of the coordinate tree at alpha: the label of a
// history is the tree node whose embedded image is an initial segment of
// probe, i.e. the preimage of the probe's top bits under the top f.
BranchLabeling labeling_follow(LadderRef ladder, Support u, unsigned level, std::uint32_t alpha,
                               BitString probe);

std::uint64_t labeling_hash(const BranchLabeling& h);

}  // namespace creatures
