#include "creatures/coding.hpp"

#include <stdexcept>
#include <string>

#include "creatures/serialize.hpp"

namespace creatures {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

unsigned level_of_width(const Ladder& ladder, unsigned width, unsigned limit, const char* what) {
  for (unsigned j = 0; j < limit; ++j)
    if (ladder.width(j) == width) return j;
  throw std::invalid_argument(std::string(what) + ": width outside the coded range");
}

}  // namespace

std::uint64_t pr(std::uint64_t n, std::uint64_t m) {
  require(n + m < (std::uint64_t(1) << 31), "pr: arguments too large");
  std::uint64_t s = n + m;
  return s * (s + 1) / 2 + n;
}

std::set<std::uint64_t> cd(const std::map<std::uint64_t, std::uint64_t>& h) {
  std::set<std::uint64_t> out;
  for (const auto& [n, v] : h) out.insert(pr(n, v));
  return out;
}

std::uint64_t coded_total(const Ladder& ladder) {
  std::uint64_t total = 0;
  for (unsigned j = 0; j < ladder.levels(); ++j) total += std::uint64_t(1) << ladder.width(j);
  return total;
}

std::uint64_t code_node(const Ladder& ladder, BitString rho) {
  unsigned level = level_of_width(ladder, rho.width, ladder.levels(), "code_node");
  std::uint64_t offset = 0;
  for (unsigned j = 0; j < level; ++j) offset += std::uint64_t(1) << ladder.width(j);
  return offset + rho.value;
}

BitString decode_node(const Ladder& ladder, std::uint64_t n) {
  std::uint64_t offset = 0;
  for (unsigned j = 0; j < ladder.levels(); ++j) {
    std::uint64_t size = std::uint64_t(1) << ladder.width(j);
    if (n < offset + size) return make_bits(ladder.width(j), n - offset);
    offset += size;
  }
  throw std::invalid_argument("decode_node: code beyond the coded range");
}

KappaSeq make_kappa(LadderRef ladder, std::vector<LevelPerm> perms) {
  KappaSeq kappa;
  kappa.ladder = std::move(ladder);
  kappa.perms = std::move(perms);
  validate_kappa(kappa);
  return kappa;
}

void validate_kappa(const KappaSeq& kappa) {
  require(kappa.ladder != nullptr, "KappaSeq: null ladder");
  require(kappa.perms.size() <= kappa.ladder->levels(), "KappaSeq: more levels than the ladder");
  for (unsigned j = 0; j < kappa.perms.size(); ++j) {
    require(kappa.perms[j].width == kappa.ladder->width(j), "KappaSeq: width mismatch");
    require(kappa.perms[j].is_valid(), "KappaSeq: not a permutation");
  }
}

KappaSeq identity_kappa(LadderRef ladder, unsigned levels) {
  require(ladder != nullptr, "identity_kappa: null ladder");
  require(levels <= ladder->levels(), "identity_kappa: more levels than the ladder");
  std::vector<LevelPerm> perms;
  perms.reserve(levels);
  for (unsigned j = 0; j < levels; ++j) perms.push_back(LevelPerm::identity(ladder->width(j)));
  return make_kappa(std::move(ladder), std::move(perms));
}

std::uint64_t kappa_hash(const KappaSeq& kappa) {
  std::string blob = kappa.ladder->spec_string();
  for (const auto& p : kappa.perms) {
    blob += '|';
    blob += perm_rank(p).get_str();
  }
  return fnv1a64(blob);
}

bool kappa_less(const KappaSeq& kappa, BitString eta, BitString nu) {
  unsigned i = level_of_width(*kappa.ladder, eta.width, kappa.length(), "kappa_less");
  unsigned j = level_of_width(*kappa.ladder, nu.width, kappa.length(), "kappa_less");
  if (i >= j) return false;
  return is_prefix(kappa.perms[i].apply(eta), kappa.perms[j].apply(nu));
}

std::set<std::uint64_t> a_kappa(const KappaSeq& kappa, std::uint64_t bound) {
  std::uint64_t total = 0;
  for (unsigned j = 0; j < kappa.length(); ++j)
    total += std::uint64_t(1) << kappa.ladder->width(j);
  std::uint64_t top = std::min(bound, total);
  std::set<std::uint64_t> out;
  for (std::uint64_t c1 = 0; c1 < top; ++c1) {
    BitString eta = decode_node(*kappa.ladder, c1);
    for (std::uint64_t c2 = 0; c2 < top; ++c2) {
      if (c1 == c2) continue;
      BitString nu = decode_node(*kappa.ladder, c2);
      if (kappa_less(kappa, eta, nu)) out.insert(pr(c1, c2));
    }
  }
  return out;
}

CodedTree make_coded_tree(KappaSeq kappa) {
  validate_kappa(kappa);
  CodedTree tree;
  tree.bound = 0;
  for (unsigned j = 0; j < kappa.length(); ++j)
    tree.bound += std::uint64_t(1) << kappa.ladder->width(j);
  tree.kappa = std::move(kappa);
  return tree;
}

bool star_less(const CodedTree& tree, std::uint64_t a, std::uint64_t b) {
  require(a < tree.bound && b < tree.bound, "star_less: code beyond the tree");
  return kappa_less(tree.kappa, decode_node(*tree.kappa.ladder, a),
                    decode_node(*tree.kappa.ladder, b));
}

void validate_branch(const Branch& b) {
  validate_kappa(b.kappa);
  require(!b.nodes.empty(), "Branch: empty");
  require(b.nodes.size() <= b.kappa.length(), "Branch: more nodes than tree levels");
  for (unsigned j = 0; j < b.nodes.size(); ++j)
    require(b.nodes[j].width == b.kappa.ladder->width(j), "Branch: node at the wrong width");
  for (unsigned j = 0; j + 1 < b.nodes.size(); ++j)
    require(kappa_less(b.kappa, b.nodes[j], b.nodes[j + 1]), "Branch: nodes do not form a chain");
}

namespace {

void require_same_shape(const Branch& b1, const Branch& b2, const char* what) {
  validate_branch(b1);
  validate_branch(b2);
  if (b1.kappa.ladder->spec_string() != b2.kappa.ladder->spec_string() ||
      b1.nodes.size() != b2.nodes.size())
    throw std::invalid_argument(std::string(what) + ": ragged level data");
}

}  // namespace

std::optional<unsigned> cones_disjoint(const Branch& b1, const Branch& b2) {
  require_same_shape(b1, b2, "cones_disjoint");
  const Ladder& ladder = *b1.kappa.ladder;
  unsigned levels = static_cast<unsigned>(b1.nodes.size());
  for (unsigned n = 0; n < levels; ++n) {
    bool collision = false;
    for (unsigned j = n; j < levels && !collision; ++j) {
      std::uint64_t width_count = std::uint64_t(1) << ladder.width(j);
      for (std::uint64_t v = 0; v < width_count; ++v) {
        BitString node = make_bits(ladder.width(j), v);
        bool in1 = j == n ? node == b1.nodes[n] : kappa_less(b1.kappa, b1.nodes[n], node);
        bool in2 = j == n ? node == b2.nodes[n] : kappa_less(b2.kappa, b2.nodes[n], node);
        if (in1 && in2) {
          collision = true;
          break;
        }
      }
    }
    if (!collision) return n;
  }
  return std::nullopt;
}

std::optional<unsigned> bounded_intersection(const Branch& b1, const Branch& b2) {
  require_same_shape(b1, b2, "bounded_intersection");
  unsigned levels = static_cast<unsigned>(b1.nodes.size());
  unsigned a = 0;
  for (unsigned j = 0; j < levels; ++j)
    if (b1.nodes[j] == b2.nodes[j]) a = j + 1;
  if (a >= levels) return std::nullopt;
  return a;
}

}  // namespace creatures
