#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "creatures/coding.hpp"
#include "creatures/conditions.hpp"
#include "creatures/fusion.hpp"
#include "creatures/labeling.hpp"
#include "creatures/serialize.hpp"

namespace creatures {

// Stamped into every file the engine writes.
inline constexpr const char* kFormatVersion = "creatures/1";

// Parsed structured text: the tree behind the two-space-indented
// "key: value" lines that CertWriter emits. A line ending in ":" opens a
// child block; repeated keys are how lists are encoded.
struct TextNode {
  std::string key;
  std::string value;
  std::vector<TextNode> children;

  const TextNode* find(const std::string& k) const;
  const TextNode& at(const std::string& k) const;
  std::vector<const TextNode*> all(const std::string& k) const;
  const std::string& field(const std::string& k) const;  // at(k).value
};
TextNode parse_text(const std::string& text);

// Scalar forms. Throw std::invalid_argument on malformed input.
BitString parse_bits(const std::string& s);       // "(w,bits)", "(0,-)"
Support parse_support(const std::string& s);      // "{a,b,c}"
HistoryKey parse_key(const std::string& s);       // "[r0,r1]"
std::string perm_str(const LevelPerm& p);         // image array "0,1,3,2"
LevelPerm parse_perm(const std::string& s);
std::uint64_t parse_u64(const std::string& s);
unsigned parse_unsigned(const std::string& s);

// Blocks, reused across the file formats below.
void write_weighted(CertWriter& cw, const WeightedPos& f);
WeightedPos read_weighted(LadderRef ladder, const TextNode& node);
void write_creature(CertWriter& cw, const Creature& c);
Creature read_creature(LadderRef ladder, const TextNode& node);
void write_history(CertWriter& cw, const HistorySeq& xs);
HistorySeq read_history(LadderRef ladder, const TextNode& node);

// Condition files: header (ladder, support, base, horizon), the committed
// history, then one creature block per remaining level. Self-contained.
std::string condition_text(const Condition& p);
Condition read_condition(const std::string& text);
// Canonical file name a dump uses to reference this condition.
std::string condition_file_name(const Condition& p);

// Branch labeling files.
std::string labeling_text(const BranchLabeling& h);
BranchLabeling read_labeling(const std::string& text);

// Fusion plan files; oracles and labeling rules appear by registered
// identifier, the root condition rides inline.
std::string plan_text(const FusionPlan& plan);
FusionPlan read_plan(const std::string& text);

// Tree dumps carry the plan echo and per-level node rows; conditions are
// referenced by content hash and stored as separate condition files. The
// loader maps such a hash to the file text. Run logs (certificates,
// per-name reports) are not part of the dump.
std::string tree_text(const FusionTree& tree);
FusionTree read_tree(const std::string& text,
                     const std::function<std::string(const std::string&)>& load);

// Sorted pairing codes below the bound, under a (kappa hash, bound) header.
std::string a_kappa_text(const KappaSeq& kappa, std::uint64_t bound);

// Branch files: the permutation stack and the level-indexed node codes.
std::string branch_text(const Branch& b);
Branch read_branch(const std::string& text);

// Write-to-temp-then-rename, so readers never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace creatures
