#include "creatures/conditions.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "creatures/serialize.hpp"

namespace creatures {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void ensure(bool cond, const char* msg) {
  // Theorem-backed postconditions; a failure here is a defect, not bad input.
  if (!cond) throw std::logic_error(msg);
}

bool same_ladder(const LadderRef& a, const LadderRef& b) {
  return a && b && a->spec_string() == b->spec_string();
}

}  // namespace

const Creature& Condition::at_level(unsigned j) const {
  if (j < base_level() || j >= horizon) throw std::invalid_argument("Condition: level outside range");
  return creatures[j - base_level()];
}

Condition make_condition(LadderRef ladder, HistorySeq hist, std::vector<Creature> creatures,
                         unsigned horizon) {
  Condition p;
  p.ladder = std::move(ladder);
  p.hist = std::move(hist);
  p.creatures = std::move(creatures);
  p.horizon = horizon;
  validate_condition(p);
  return p;
}

void validate_condition(const Condition& p) {
  require(p.ladder != nullptr, "Condition: null ladder");
  require(p.horizon <= p.ladder->levels(), "Condition: horizon beyond the ladder");
  require(p.hist.length() <= p.horizon, "Condition: history past the horizon");
  validate_history(*p.ladder, p.hist);
  require(p.creatures.size() == p.horizon - p.hist.length(), "Condition: creature count mismatch");
  for (std::size_t t = 0; t < p.creatures.size(); ++t) {
    const Creature& c = p.creatures[t];
    require(c.F.level == p.hist.length() + t, "Condition: creature at the wrong level");
    require(c.F.u == p.hist.u, "Condition: creature support mismatch");
    require(same_ladder(c.F.ladder, p.ladder), "Condition: creature ladder mismatch");
    validate_weighted(c.F);
    require(c.m >= 0, "Condition: negative debt");
    require(in_underline_cr(c), "Condition: creature outside its class");
  }
}

bool condition_equal(const Condition& a, const Condition& b) {
  return same_ladder(a.ladder, b.ladder) && a.hist == b.hist && a.horizon == b.horizon &&
         a.creatures == b.creatures;
}

std::uint64_t condition_hash(const Condition& p) {
  CertWriter w;
  w.kv("ladder", p.ladder->spec_string());
  w.kv("horizon", p.horizon);
  w.open("hist");
  w.kv("u", support_str(p.hist.u));
  for (const auto& x : p.hist.entries) {
    w.open("entry");
    w.kv("level", x.level);
    for (std::size_t j = 0; j < x.f.size(); ++j) {
      w.kv("f", perm_rank(x.f[j]));
      w.kv("g", perm_rank(x.g[j]));
    }
    for (const auto& table : x.e) {
      w.open("e");
      for (const auto& [key, pair] : table) {
        w.kv("key", key);
        w.kv("ef", perm_rank(pair.first));
        w.kv("eg", perm_rank(pair.second));
      }
      w.close();
    }
    w.close();
  }
  w.close();
  w.open("creatures");
  for (const auto& c : p.creatures) {
    w.kv("F", hex64(weighted_hash(c.F)));
    w.kv("m", c.m);
  }
  w.close();
  return w.content_hash();
}

ProfileReport profile_report(const Condition& p) {
  ProfileReport out;
  out.nor2_values.reserve(p.creatures.size());
  for (const auto& c : p.creatures) out.nor2_values.push_back(nor2(c));
  for (std::size_t t = 1; t < out.nor2_values.size(); ++t)
    if (out.nor2_values[t] < out.nor2_values[t - 1] - 1e-9) out.nondecreasing = false;
  return out;
}

bool leq(const Condition& p, const Condition& q) {
  require(p.hist.u == q.hist.u, "leq: support mismatch");
  require(same_ladder(p.ladder, q.ladder), "leq: ladder mismatch");
  require(p.horizon == q.horizon, "leq: horizon mismatch");
  if (q.base_level() < p.base_level()) return false;
  if (!history_initial(p.hist, q.hist)) return false;
  for (unsigned j = p.base_level(); j < q.base_level(); ++j) {
    Int rank = pos_rank(*p.ladder, step_of(*p.ladder, q.hist, j));
    if (!p.at_level(j).F.weights.count(rank)) return false;
  }
  for (unsigned j = q.base_level(); j < q.horizon; ++j)
    if (!sigma_member(q.at_level(j), p.at_level(j))) return false;
  return true;
}

std::vector<HistorySeq> pos_of(const Condition& p, unsigned j) {
  require(j >= p.base_level() && j <= p.horizon, "pos_of: length outside range");
  Int total = 1;
  for (unsigned t = p.base_level(); t < j; ++t)
    total *= Int(static_cast<unsigned long>(p.at_level(t).F.weights.size()));
  check_enum_cap(*p.ladder, total, "pos_of");
  std::vector<HistorySeq> out{p.hist};
  for (unsigned t = p.base_level(); t < j; ++t) {
    std::vector<HistorySeq> next;
    next.reserve(out.size() * p.at_level(t).F.weights.size());
    for (const auto& xs : out)
      for (const auto& [rank, w] : p.at_level(t).F.weights)
        next.push_back(suc_apply(*p.ladder, xs, pos_unrank(*p.ladder, p.hist.u, t, rank)));
    out = std::move(next);
  }
  return out;
}

Condition lift(const Condition& p, const HistorySeq& xs) {
  require(xs.u == p.hist.u, "lift: support mismatch");
  require(xs.length() >= p.base_level() && xs.length() <= p.horizon, "lift: length outside range");
  require(history_initial(p.hist, xs), "lift: history does not extend the condition");
  for (unsigned j = p.base_level(); j < xs.length(); ++j) {
    Int rank = pos_rank(*p.ladder, step_of(*p.ladder, xs, j));
    require(p.at_level(j).F.weights.count(rank) > 0, "lift: unreachable history");
  }
  std::vector<Creature> rest(p.creatures.begin() + (xs.length() - p.base_level()),
                             p.creatures.end());
  return make_condition(p.ladder, xs, std::move(rest), p.horizon);
}

Condition project_condition(const Condition& q, const Support& u) {
  require(!u.empty(), "project_condition: empty support");
  require(support_subset(u, q.hist.u), "project_condition: not a sub-support");
  if (u == q.hist.u) return q;
  std::vector<Creature> cs;
  cs.reserve(q.creatures.size());
  for (const auto& c : q.creatures) cs.push_back(Creature{restrict_weighted(c.F, u), c.m});
  return make_condition(q.ladder, history_restrict(q.hist, u), std::move(cs), q.horizon);
}

Condition complete_lift(const Condition& q, const Condition& r) {
  const Support& u = r.hist.u;
  require(support_subset(u, q.hist.u), "complete_lift: target support not below");
  require(q.horizon == r.horizon, "complete_lift: horizon mismatch");
  if (u == q.hist.u) {
    require(leq(q, r), "complete_lift: not an extension of the projection");
    return r;
  }
  require(leq(project_condition(q, u), r), "complete_lift: not an extension of the projection");
  // Advance the committed history to match r, picking the lowest-rank
  // witness among the weighted possibilities that restrict correctly.
  HistorySeq xs = q.hist;
  for (unsigned j = q.base_level(); j < r.base_level(); ++j) {
    Int want = pos_rank(*q.ladder, step_of(*q.ladder, r.hist, j));
    bool found = false;
    for (const auto& [rank, w] : q.at_level(j).F.weights) {
      PosFunc h = pos_unrank(*q.ladder, q.hist.u, j, rank);
      if (pos_rank(*q.ladder, pos_restrict(*q.ladder, h, u)) == want) {
        xs = suc_apply(*q.ladder, xs, h);
        found = true;
        break;
      }
    }
    if (!found) throw std::runtime_error("complete_lift: no compatible history extension");
  }
  std::vector<Creature> cs;
  cs.reserve(q.horizon - r.base_level());
  for (unsigned j = r.base_level(); j < q.horizon; ++j)
    cs.push_back(Creature{extend_restriction(q.at_level(j).F, r.at_level(j).F), r.at_level(j).m});
  Condition out = make_condition(q.ladder, std::move(xs), std::move(cs), q.horizon);
  ensure(leq(q, out), "complete_lift: output does not extend the input");
  ensure(leq(r, project_condition(out, u)), "complete_lift: projection does not extend r");
  return out;
}

HistorySeq transfer_history(const HistorySeq& xs, const Support& target) {
  validate_support(target);
  require(target.size() == xs.u.size(), "transfer_history: size mismatch");
  HistorySeq out = xs;
  out.u = target;
  for (auto& x : out.entries) x.u = target;
  return out;
}

WeightedPos transfer_weighted(const WeightedPos& f, const Support& target) {
  validate_support(target);
  require(target.size() == f.u.size(), "transfer_weighted: size mismatch");
  WeightedPos out = f;
  out.u = target;
  return out;
}

Condition transfer(const Condition& p, const Support& target) {
  std::vector<Creature> cs;
  cs.reserve(p.creatures.size());
  for (const auto& c : p.creatures) cs.push_back(Creature{transfer_weighted(c.F, target), c.m});
  return make_condition(p.ladder, transfer_history(p.hist, target), std::move(cs), p.horizon);
}

Condition amalgamate(const Condition& p1, const Condition& p2, AmalgamationReport* report) {
  const Support& u1 = p1.hist.u;
  const Support& u2 = p2.hist.u;
  require(same_ladder(p1.ladder, p2.ladder), "amalgamate: ladder mismatch");
  require(is_delta_system(u1, u2) && u1 != u2, "amalgamate: supports are not a Delta-system pair");
  require(p1.horizon == p2.horizon, "amalgamate: horizon mismatch");
  require(p1.base_level() == p2.base_level(), "amalgamate: base level mismatch");
  require(condition_equal(transfer(p1, u2), p2), "amalgamate: second input is not a transferred copy");
  for (const auto& c : p1.creatures)
    require(nor1(c) >= 1.0 - 1e-9, "amalgamate: nor1 below 1");
  const Ladder& ladder = *p1.ladder;
  Support w = support_union(u1, u2);

  // Coordinate-wise union of the two histories; shared coordinates agree
  // because p2 is a transferred copy over a Delta-system pair.
  HistorySeq xs = empty_history(w);
  for (unsigned j = 0; j < p1.base_level(); ++j) {
    CreatureObject y;
    y.level = j;
    y.u = w;
    y.f.reserve(w.size());
    y.g.reserve(w.size());
    y.e.resize(w.size());
    for (std::size_t t = 0; t < w.size(); ++t) {
      std::uint32_t alpha = w[t];
      const CreatureObject* src = nullptr;
      std::size_t idx = 0;
      if (support_contains(u1, alpha)) {
        src = &p1.hist.entries[j];
        idx = *support_index(u1, alpha);
      } else {
        src = &p2.hist.entries[j];
        idx = *support_index(u2, alpha);
      }
      y.f.push_back(src->f[idx]);
      y.g.push_back(src->g[idx]);
      y.e[t] = src->e[idx];
    }
    xs.entries.push_back(std::move(y));
  }

  std::vector<Creature> cs;
  cs.reserve(p1.creatures.size());
  AmalgamationReport local;
  for (unsigned j = p1.base_level(); j < p1.horizon; ++j) {
    const Creature& c1 = p1.at_level(j);
    const Creature& c2 = p2.at_level(j);
    WeightedPos prod = product(c1.F, c2.F);
    AmalgamationLevel lvl;
    lvl.level = j;
    if (ladder.norm_base(j) >= 3) {
      lvl.checked = true;
      lvl.drop_ok = nor_drop_leq_general(ladder.norm_base(j), pos_size(prod), mass(prod),
                                         pos_size(c1.F), mass(c1.F), 1);
      ensure(lvl.drop_ok, "amalgamate: norm drop exceeded 1");
    }
    local.levels.push_back(lvl);
    cs.push_back(Creature{std::move(prod), c1.m});
  }
  Condition q = make_condition(p1.ladder, std::move(xs), std::move(cs), p1.horizon);
  ensure(leq(p1, project_condition(q, u1)), "amalgamate: projection misses the first input");
  ensure(leq(p2, project_condition(q, u2)), "amalgamate: projection misses the second input");
  if (report) *report = std::move(local);
  return q;
}

void validate_name(const Ladder& ladder, const LevelName& name) {
  validate_support(name.u);
  require(!name.u.empty(), "LevelName: empty support");
  for (const auto& [i, table] : name.tables) {
    auto wit = name.value_width.find(i);
    require(wit != name.value_width.end(), "LevelName: level without a declared width");
    require(i < ladder.levels(), "LevelName: level outside the ladder");
    std::map<HistoryKey, bool> reach;
    for_each_history(ladder, name.u, i + 1,
                     [&](const HistorySeq& xs) { reach.emplace(history_key(ladder, xs), true); });
    require(table.size() == reach.size(), "LevelName: table not total on its level");
    for (const auto& [key, value] : table) {
      require(reach.count(key) > 0, "LevelName: key outside the history space");
      require(value.width == wit->second, "LevelName: value width mismatch");
    }
  }
}

BitString decide(const Ladder& ladder, const LevelName& name, const HistorySeq& xs) {
  HistorySeq local;
  if (xs.u == name.u) {
    local = xs;
  } else {
    require(support_subset(name.u, xs.u), "decide: history support does not cover the name");
    local = history_restrict(xs, name.u);
  }
  require(local.length() >= 1, "decide: empty history");
  unsigned i = local.length() - 1;
  auto tit = name.tables.find(i);
  require(tit != name.tables.end(), "decide: level outside the declared range");
  auto vit = tit->second.find(history_key(ladder, local));
  require(vit != tit->second.end(), "decide: history outside the table");
  return vit->second;
}

bool proj_equal_trivial(const Creature& c1, const Creature& c2) {
  return c1.F.level == c2.F.level && c1.m == c2.m && density(c1.F) == density(c2.F);
}

std::optional<Condition> common_refinement(const Condition& a, const Condition& b) {
  require(a.hist.u == b.hist.u, "common_refinement: support mismatch");
  require(same_ladder(a.ladder, b.ladder), "common_refinement: ladder mismatch");
  require(a.horizon == b.horizon, "common_refinement: horizon mismatch");
  const Condition& lo = a.base_level() <= b.base_level() ? a : b;
  const Condition& hi = a.base_level() <= b.base_level() ? b : a;
  if (!history_initial(lo.hist, hi.hist)) return std::nullopt;
  for (unsigned j = lo.base_level(); j < hi.base_level(); ++j) {
    Int rank = pos_rank(*lo.ladder, step_of(*lo.ladder, hi.hist, j));
    if (!lo.at_level(j).F.weights.count(rank)) return std::nullopt;
  }
  std::vector<Creature> cs;
  for (unsigned j = hi.base_level(); j < hi.horizon; ++j) {
    const Creature& c1 = lo.at_level(j);
    const Creature& c2 = hi.at_level(j);
    std::map<Int, Rat> mins;
    for (const auto& [rank, w] : c1.F.weights) {
      auto it = c2.F.weights.find(rank);
      if (it != c2.F.weights.end()) mins.emplace(rank, std::min(w, it->second));
    }
    if (mins.empty()) return std::nullopt;
    Flavor flavor = c1.F.flavor == Flavor::vpos && c2.F.flavor == Flavor::vpos ? Flavor::vpos
                                                                               : Flavor::wpos;
    WeightedPos f = make_weighted(lo.ladder, lo.hist.u, j, flavor, std::move(mins));
    Rat m = std::max(c1.m, c2.m);
    if (!nor0_at_least_rat(f, m)) return std::nullopt;
    cs.push_back(Creature{std::move(f), m});
  }
  return make_condition(lo.ladder, hi.hist, std::move(cs), hi.horizon);
}

bool compatible(const Condition& a, const Condition& b) {
  return common_refinement(a, b).has_value();
}

Condition densify_condition(const Condition& p) {
  std::vector<Creature> cs;
  cs.reserve(p.creatures.size());
  for (const auto& c : p.creatures) cs.push_back(densify(c));
  return make_condition(p.ladder, p.hist, std::move(cs), p.horizon);
}

}  // namespace creatures
