#include "creatures/labeling.hpp"

#include <random>
#include <stdexcept>
#include <utility>

#include "creatures/serialize.hpp"

namespace creatures {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void validate_step_labels(const StepLabels& lab) {
  require(lab.label_count > 0, "step labels: empty label set");
  for (const auto& [rank, m] : lab.at) {
    require(rank >= 0, "step labels: negative rank");
    require(m < lab.label_count, "step labels: label out of range");
  }
}

BranchLabeling make_labeling(LadderRef ladder, Support u, unsigned level,
                             std::map<HistoryKey, BitString> table) {
  BranchLabeling h{std::move(ladder), std::move(u), level, std::move(table)};
  validate_labeling(h);
  return h;
}

void validate_labeling(const BranchLabeling& h) {
  require(h.ladder != nullptr, "labeling: null ladder");
  validate_support(h.u);
  require(h.level < h.ladder->levels(), "labeling: level out of range");
  check_enum_cap(*h.ladder, reach_count(*h.ladder, h.u, h.level + 1), "labeling");
  unsigned w = h.ladder->width(h.level);
  std::size_t seen = 0;
  for_each_history(*h.ladder, h.u, h.level + 1, [&](const HistorySeq& ys) {
    auto it = h.table.find(history_key(*h.ladder, ys));
    require(it != h.table.end(), "labeling: unlabeled history");
    require(it->second.width == w, "labeling: value width mismatch");
    ++seen;
  });
  require(seen == h.table.size(), "labeling: stray table entries");
}

const BitString& label_of(const BranchLabeling& h, const HistorySeq& ys) {
  require(ys.u == h.u, "label_of: support mismatch");
  require(ys.length() == h.level + 1, "label_of: length mismatch");
  auto it = h.table.find(history_key(*h.ladder, ys));
  if (it == h.table.end()) throw std::out_of_range("label_of: history not labeled");
  return it->second;
}

BranchLabeling labeling_constant(LadderRef ladder, Support u, unsigned level, BitString value) {
  require(ladder != nullptr, "labeling_constant: null ladder");
  require(level < ladder->levels() && value.width == ladder->width(level),
          "labeling_constant: value width mismatch");
  std::map<HistoryKey, BitString> table;
  for_each_history(*ladder, u, level + 1,
                   [&](const HistorySeq& ys) { table.emplace(history_key(*ladder, ys), value); });
  return make_labeling(std::move(ladder), std::move(u), level, std::move(table));
}

BranchLabeling labeling_seeded(LadderRef ladder, Support u, unsigned level, std::uint64_t seed) {
  require(ladder != nullptr, "labeling_seeded: null ladder");
  require(level < ladder->levels(), "labeling_seeded: level out of range");
  unsigned w = ladder->width(level);
  std::uint64_t mask = w == 0 ? 0 : ~std::uint64_t(0) >> (64 - w);
  std::mt19937_64 rng(seed);
  std::map<HistoryKey, BitString> table;
  for_each_history(*ladder, u, level + 1, [&](const HistorySeq& ys) {
    table.emplace(history_key(*ladder, ys), BitString{w, rng() & mask});
  });
  return make_labeling(std::move(ladder), std::move(u), level, std::move(table));
}

BranchLabeling labeling_follow(LadderRef ladder, Support u, unsigned level, std::uint32_t alpha,
                               BitString probe) {
  require(ladder != nullptr, "labeling_follow: null ladder");
  require(level < ladder->levels(), "labeling_follow: level out of range");
  auto idx = support_index(u, alpha);
  require(idx.has_value(), "labeling_follow: coordinate outside support");
  unsigned w = ladder->width(level);
  require(probe.width >= w, "labeling_follow: probe too short");
  BitString target = restrict_bits(probe, w);
  std::map<HistoryKey, BitString> table;
  for_each_history(*ladder, u, level + 1, [&](const HistorySeq& ys) {
    table.emplace(history_key(*ladder, ys), inverse(ys.entries.back().f[*idx]).apply(target));
  });
  return make_labeling(std::move(ladder), std::move(u), level, std::move(table));
}

std::uint64_t labeling_hash(const BranchLabeling& h) {
  CertWriter w;
  w.kv("ladder", h.ladder->spec_string());
  w.kv("u", support_str(h.u));
  w.kv("level", h.level);
  w.open("table");
  for (const auto& [key, value] : h.table) w.kv(key_str(key), bits_str(value));
  w.close();
  return w.content_hash();
}

}  // namespace creatures
