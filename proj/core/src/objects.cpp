#include "creatures/objects.hpp"

#include <stdexcept>
#include <string>

namespace creatures {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Int domain_size(const Ladder& ladder, const Support& u, unsigned level) {
  return Int(static_cast<unsigned long>(u.size())) * perm_count(ladder.width_below(level));
}

std::vector<DomainPoint> domain_points(const Ladder& ladder, const Support& u, unsigned level) {
  check_enum_cap(ladder, domain_size(ladder, u, level), "domain_points");
  Int keys = perm_count(ladder.width_below(level));
  std::vector<DomainPoint> pts;
  pts.reserve(u.size() * keys.get_ui());
  for (auto alpha : u)
    for (Int r = 0; r < keys; ++r) pts.push_back(DomainPoint{alpha, r});
  return pts;
}

Int block_extension_count(const Ladder& ladder, unsigned level) {
  return block_extension_count_w(ladder.width(level), ladder.width_below(level));
}

Int pos_count(const Ladder& ladder, const Support& u, unsigned level) {
  Int b = block_extension_count(ladder, level);
  Int d = domain_size(ladder, u, level);
  require(d.fits_ulong_p(), "pos_count: domain too large");
  return int_pow(b * b, d.get_ui());
}

void validate_pos(const Ladder& ladder, const PosFunc& h) {
  validate_support(h.u);
  require(h.level < ladder.levels(), "PosFunc: level out of range");
  auto pts = domain_points(ladder, h.u, h.level);
  require(h.vals.size() == pts.size(), "PosFunc: wrong number of values");
  const unsigned below = ladder.width_below(h.level);
  for (std::size_t idx = 0; idx < pts.size(); ++idx) {
    LevelPerm key = perm_unrank(below, pts[idx].key_rank);
    const auto& [h1, h2] = h.vals[idx];
    require(h1.width == ladder.width(h.level) && h2.width == ladder.width(h.level),
            "PosFunc: value width mismatch");
    require(perm_extends(h1, key) && perm_extends(h2, key),
            "PosFunc: value does not extend its key");
  }
}

Int pos_rank(const Ladder& ladder, const PosFunc& h) {
  auto pts = domain_points(ladder, h.u, h.level);
  require(h.vals.size() == pts.size(), "pos_rank: wrong number of values");
  const unsigned below = ladder.width_below(h.level);
  Int b = block_extension_count(ladder, h.level);
  Int per_point = b * b;
  Int rank = 0;
  for (std::size_t idx = 0; idx < pts.size(); ++idx) {
    LevelPerm key = perm_unrank(below, pts[idx].key_rank);
    Int digit = block_extension_index(h.vals[idx].first, key) * b +
                block_extension_index(h.vals[idx].second, key);
    rank = rank * per_point + digit;
  }
  return rank;
}

PosFunc pos_unrank(const Ladder& ladder, const Support& u, unsigned level, const Int& rank) {
  require(rank >= 0 && rank < pos_count(ladder, u, level), "pos_unrank: rank out of range");
  auto pts = domain_points(ladder, u, level);
  const unsigned below = ladder.width_below(level);
  const unsigned top = ladder.width(level);
  Int b = block_extension_count(ladder, level);
  Int per_point = b * b;
  std::vector<Int> digits(pts.size());
  Int rest = rank;
  for (std::size_t idx = pts.size(); idx-- > 0;) {
    digits[idx] = rest % per_point;
    rest /= per_point;
  }
  PosFunc h;
  h.level = level;
  h.u = u;
  h.vals.reserve(pts.size());
  for (std::size_t idx = 0; idx < pts.size(); ++idx) {
    LevelPerm key = perm_unrank(below, pts[idx].key_rank);
    Int r1 = digits[idx] / b, r2 = digits[idx] % b;
    h.vals.emplace_back(block_extension_make(key, top, r1), block_extension_make(key, top, r2));
  }
  return h;
}

const PermPair& pos_at(const Ladder& ladder, const PosFunc& h, std::uint32_t alpha,
                       const Int& key_rank) {
  auto ai = support_index(h.u, alpha);
  require(ai.has_value(), "pos_at: coordinate outside support");
  Int keys = perm_count(ladder.width_below(h.level));
  require(key_rank >= 0 && key_rank < keys, "pos_at: key rank out of range");
  std::size_t idx = *ai * keys.get_ui() + key_rank.get_ui();
  return h.vals[idx];
}

PosFunc pos_restrict(const Ladder& ladder, const PosFunc& h, const Support& w) {
  require(support_subset(w, h.u), "pos_restrict: w not included in support");
  Int keys = perm_count(ladder.width_below(h.level));
  PosFunc r;
  r.level = h.level;
  r.u = w;
  r.vals.reserve(w.size() * keys.get_ui());
  for (auto alpha : w) {
    std::size_t base = *support_index(h.u, alpha) * keys.get_ui();
    for (unsigned long k = 0; k < keys.get_ui(); ++k) r.vals.push_back(h.vals[base + k]);
  }
  return r;
}

PosFunc pos_merge(const Ladder& ladder, const PosFunc& a, const PosFunc& b) {
  require(a.level == b.level, "pos_merge: level mismatch");
  Int keys = perm_count(ladder.width_below(a.level));
  const unsigned long kc = keys.get_ui();
  PosFunc r;
  r.level = a.level;
  r.u = support_union(a.u, b.u);
  r.vals.reserve(r.u.size() * kc);
  for (auto alpha : r.u) {
    auto ia = support_index(a.u, alpha);
    auto ib = support_index(b.u, alpha);
    for (unsigned long k = 0; k < kc; ++k) {
      if (ia && ib) {
        require(a.vals[*ia * kc + k] == b.vals[*ib * kc + k],
                "pos_merge: inputs disagree on a shared coordinate");
      }
      r.vals.push_back(ia ? a.vals[*ia * kc + k] : b.vals[*ib * kc + k]);
    }
  }
  return r;
}

void validate_object(const Ladder& ladder, const CreatureObject& x) {
  validate_support(x.u);
  require(x.level < ladder.levels(), "CreatureObject: level out of range");
  const unsigned top = ladder.width(x.level);
  const unsigned below = ladder.width_below(x.level);
  require(x.f.size() == x.u.size() && x.g.size() == x.u.size() && x.e.size() == x.u.size(),
          "CreatureObject: component count mismatch");
  Int keys = perm_count(below);
  for (std::size_t i = 0; i < x.u.size(); ++i) {
    require(x.f[i].width == top && x.g[i].width == top, "CreatureObject: f/g width mismatch");
    require(x.f[i].is_valid() && x.g[i].is_valid(), "CreatureObject: f/g not bijective");
    if (x.level > 0) {
      const unsigned drop = top - below;
      for (std::uint32_t v = 0; v < (1u << top); ++v)
        require((x.f[i].img[v] >> drop) == (x.g[i].img[v] >> drop),
                "CreatureObject: f and g disagree one level down");
    }
    for (const auto& [key, pair] : x.e[i]) {
      require(key >= 0 && key < keys, "CreatureObject: e key out of range");
      require(pair.first.width == top && pair.second.width == top,
              "CreatureObject: e value width mismatch");
      require(pair.first.is_valid() && pair.second.is_valid(),
              "CreatureObject: e value not bijective");
    }
  }
}

std::pair<PermPair, bool> e_lookup(const Ladder& ladder, const CreatureObject& x,
                                   std::size_t pos_idx, const Int& key_rank) {
  const auto& table = x.e.at(pos_idx);
  auto it = table.find(key_rank);
  if (it != table.end()) return {it->second, false};
  LevelPerm key = perm_unrank(ladder.width_below(x.level), key_rank);
  LevelPerm canonical = block_extension_make(key, ladder.width(x.level), 0);
  return {PermPair{canonical, canonical}, true};
}

CreatureObject object_restrict(const CreatureObject& x, const Support& w) {
  require(support_subset(w, x.u), "object_restrict: w not included in support");
  CreatureObject r;
  r.level = x.level;
  r.u = w;
  for (auto alpha : w) {
    std::size_t i = *support_index(x.u, alpha);
    r.f.push_back(x.f[i]);
    r.g.push_back(x.g[i]);
    r.e.push_back(x.e[i]);
  }
  return r;
}

bool is_successor(const Ladder& ladder, const CreatureObject& x, const CreatureObject& y) {
  if (y.level != x.level + 1 || x.u != y.u) return false;
  const unsigned top = ladder.width(y.level);
  const unsigned mid = ladder.width(x.level);
  const unsigned drop = top - mid;
  for (std::size_t i = 0; i < y.u.size(); ++i) {
    // Restricting the new f one level down reproduces the old g.
    for (std::uint32_t v = 0; v < (1u << top); ++v)
      if ((y.f[i].img[v] >> drop) != x.g[i].img[v >> drop]) return false;
    auto [pair, defaulted] = e_lookup(ladder, y, i, perm_rank(x.g[i]));
    (void)defaulted;
    if (pair.first != y.f[i] || pair.second != y.g[i]) return false;
  }
  return true;
}

HistorySeq empty_history(Support u) {
  validate_support(u);
  HistorySeq xs;
  xs.u = std::move(u);
  return xs;
}

void validate_history(const Ladder& ladder, const HistorySeq& xs) {
  validate_support(xs.u);
  for (unsigned j = 0; j < xs.length(); ++j) {
    const auto& x = xs.entries[j];
    require(x.level == j, "HistorySeq: entry level mismatch");
    require(x.u == xs.u, "HistorySeq: entry support mismatch");
    validate_object(ladder, x);
    if (j > 0)
      require(is_successor(ladder, xs.entries[j - 1], x), "HistorySeq: entry not a successor");
  }
}

HistorySeq suc_apply(const Ladder& ladder, const HistorySeq& xs, const PosFunc& h) {
  require(h.u == xs.u, "suc_apply: support mismatch");
  require(h.level == xs.length(), "suc_apply: possibility level mismatch");
  check_enum_cap(ladder, domain_size(ladder, xs.u, h.level), "suc_apply");
  Int keys = perm_count(ladder.width_below(h.level));
  const unsigned long kc = keys.get_ui();
  CreatureObject y;
  y.level = h.level;
  y.u = xs.u;
  y.f.reserve(xs.u.size());
  y.g.reserve(xs.u.size());
  y.e.resize(xs.u.size());
  for (std::size_t i = 0; i < xs.u.size(); ++i) {
    // The distinguished key is the current g one level down; at the base it
    // is the unique width-0 permutation.
    Int key = xs.length() == 0 ? Int(0) : perm_rank(xs.entries.back().g[i]);
    const PermPair& chosen = h.vals[i * kc + key.get_ui()];
    y.f.push_back(chosen.first);
    y.g.push_back(chosen.second);
    for (unsigned long k = 0; k < kc; ++k) y.e[i].emplace(Int(k), h.vals[i * kc + k]);
  }
  HistorySeq out = xs;
  out.entries.push_back(std::move(y));
  return out;
}

HistorySeq history_restrict(const HistorySeq& xs, const Support& w) {
  HistorySeq r;
  r.u = w;
  r.entries.reserve(xs.entries.size());
  for (const auto& x : xs.entries) r.entries.push_back(object_restrict(x, w));
  return r;
}

bool history_initial(const HistorySeq& shorter, const HistorySeq& longer) {
  if (shorter.u != longer.u || shorter.length() > longer.length()) return false;
  for (unsigned j = 0; j < shorter.length(); ++j)
    if (!(shorter.entries[j] == longer.entries[j])) return false;
  return true;
}

PosFunc step_of(const Ladder& ladder, const HistorySeq& xs, unsigned j) {
  require(j < xs.length(), "step_of: level out of range");
  const auto& x = xs.entries[j];
  Int keys = perm_count(ladder.width_below(j));
  PosFunc h;
  h.level = j;
  h.u = xs.u;
  h.vals.reserve(xs.u.size() * keys.get_ui());
  for (std::size_t i = 0; i < xs.u.size(); ++i)
    for (Int k = 0; k < keys; ++k) h.vals.push_back(e_lookup(ladder, x, i, k).first);
  validate_pos(ladder, h);
  // The chosen pair must be the object's own f/g; anything else means the
  // entry was not produced by a possibility.
  for (std::size_t i = 0; i < xs.u.size(); ++i) {
    Int ki = j == 0 ? Int(0) : perm_rank(xs.entries[j - 1].g[i]);
    const PermPair& chosen = pos_at(ladder, h, xs.u[i], ki);
    require(chosen.first == x.f[i] && chosen.second == x.g[i],
            "step_of: entry inconsistent with its extension table");
  }
  return h;
}

HistoryKey history_key(const Ladder& ladder, const HistorySeq& xs) {
  HistoryKey key;
  key.reserve(xs.length());
  for (unsigned j = 0; j < xs.length(); ++j) key.push_back(pos_rank(ladder, step_of(ladder, xs, j)));
  return key;
}

std::string key_str(const HistoryKey& key) {
  std::string s = "[";
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i) s += ',';
    s += key[i].get_str();
  }
  s += ']';
  return s;
}

Int reach_count(const Ladder& ladder, const Support& u, unsigned length) {
  Int total = 1;
  for (unsigned j = 0; j < length; ++j) total *= pos_count(ladder, u, j);
  return total;
}

std::vector<HistorySeq> enumerate_histories(const Ladder& ladder, const Support& u,
                                            unsigned length) {
  check_enum_cap(ladder, reach_count(ladder, u, length), "enumerate_histories");
  std::vector<HistorySeq> out;
  out.push_back(empty_history(u));
  for (unsigned j = 0; j < length; ++j) {
    Int count = pos_count(ladder, u, j);
    check_enum_cap(ladder, count, "enumerate_histories level");
    std::vector<HistorySeq> next;
    next.reserve(out.size() * count.get_ui());
    for (const auto& xs : out)
      for (Int r = 0; r < count; ++r) next.push_back(suc_apply(ladder, xs, pos_unrank(ladder, u, j, r)));
    out = std::move(next);
  }
  return out;
}

void for_each_history(const Ladder& ladder, const Support& u, unsigned length,
                      const std::function<void(const HistorySeq&)>& fn) {
  check_enum_cap(ladder, reach_count(ladder, u, length), "for_each_history");
  HistorySeq xs = empty_history(u);
  std::function<void(HistorySeq&, unsigned)> walk = [&](HistorySeq& cur, unsigned j) {
    if (j == length) {
      fn(cur);
      return;
    }
    Int count = pos_count(ladder, u, j);
    for (Int r = 0; r < count; ++r) {
      HistorySeq next = suc_apply(ladder, cur, pos_unrank(ladder, u, j, r));
      walk(next, j + 1);
    }
  };
  walk(xs, 0);
}

HistorySeq history_from_e(const Ladder& ladder, const Support& u,
                          std::vector<std::vector<std::map<Int, PermPair>>> e_tables) {
  HistorySeq xs = empty_history(u);
  for (unsigned j = 0; j < e_tables.size(); ++j) {
    require(e_tables[j].size() == u.size(), "history_from_e: table count mismatch");
    CreatureObject y;
    y.level = j;
    y.u = u;
    y.e = std::move(e_tables[j]);
    y.f.reserve(u.size());
    y.g.reserve(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      Int key = j == 0 ? Int(0) : perm_rank(xs.entries.back().g[i]);
      auto [pair, defaulted] = e_lookup(ladder, y, i, key);
      (void)defaulted;
      y.f.push_back(pair.first);
      y.g.push_back(pair.second);
    }
    xs.entries.push_back(std::move(y));
  }
  validate_history(ladder, xs);
  return xs;
}

std::vector<LevelPerm> kappa_of(const HistorySeq& xs, std::uint32_t alpha) {
  auto ai = support_index(xs.u, alpha);
  if (!ai) throw std::invalid_argument("kappa_of: coordinate outside support");
  std::vector<LevelPerm> r;
  r.reserve(xs.length());
  for (const auto& x : xs.entries) r.push_back(x.f[*ai]);
  return r;
}

namespace {

unsigned level_of_width(const Ladder& ladder, const HistorySeq& xs, unsigned width) {
  for (unsigned j = 0; j < xs.length(); ++j)
    if (ladder.width(j) == width) return j;
  throw std::invalid_argument("no history level has the node's width");
}

}  // namespace

bool tree_less(const Ladder& ladder, const HistorySeq& xs, std::uint32_t alpha, BitString eta,
               BitString nu) {
  auto ai = support_index(xs.u, alpha);
  if (!ai) throw std::invalid_argument("tree_less: coordinate outside support");
  unsigned i = level_of_width(ladder, xs, eta.width);
  unsigned j = level_of_width(ladder, xs, nu.width);
  if (i >= j) return false;
  return is_prefix(xs.entries[i].f[*ai].apply(eta), xs.entries[j].f[*ai].apply(nu));
}

ConeCheck cone_disjointness(const Ladder& ladder, const HistorySeq& xs, std::uint32_t alpha1,
                            std::uint32_t alpha2, unsigned level, BitString eta1, BitString eta2) {
  auto a1 = support_index(xs.u, alpha1);
  auto a2 = support_index(xs.u, alpha2);
  if (!a1 || !a2) throw std::invalid_argument("cone_disjointness: coordinate outside support");
  if (level >= xs.length()) throw std::invalid_argument("cone_disjointness: level out of range");
  if (eta1.width != ladder.width(level) || eta2.width != ladder.width(level))
    throw std::invalid_argument("cone_disjointness: node width mismatch");
  const auto& x = xs.entries[level];
  ConeCheck res;
  res.premise = compose(inverse(x.g[*a1]), x.f[*a1]).apply(eta1) !=
                compose(inverse(x.g[*a2]), x.f[*a2]).apply(eta2);
  res.disjoint = true;
  for (unsigned j = level + 1; j < xs.length() && res.disjoint; ++j) {
    check_enum_cap(ladder, Int(1) << ladder.width(j), "cone_disjointness nodes");
    for (std::uint64_t v = 0; v < (std::uint64_t(1) << ladder.width(j)); ++v) {
      BitString rho{ladder.width(j), v};
      if (tree_less(ladder, xs, alpha1, eta1, rho) && tree_less(ladder, xs, alpha2, eta2, rho)) {
        res.disjoint = false;
        break;
      }
    }
  }
  return res;
}

}  // namespace creatures
