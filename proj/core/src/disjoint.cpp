#include "creatures/disjoint.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <utility>

#include "creatures/serialize.hpp"

namespace creatures {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

void ensure(bool cond, const std::string& msg) {
  if (!cond) throw std::logic_error(msg);
}

bool same_ladder(const LadderRef& a, const LadderRef& b) {
  return a && b && (a == b || a->spec_string() == b->spec_string());
}

std::string labels_digest(const StepLabels& lab) {
  CertWriter w;
  w.kv("count", lab.label_count);
  for (const auto& [rank, m] : lab.at) w.kv(rank.get_str(), m);
  return hex64(w.content_hash());
}

Int core_rank_of(const Ladder& ladder, const PosFunc& h, const Support& w) {
  if (w.empty()) return Int(0);
  return pos_rank(ladder, pos_restrict(ladder, h, w));
}

void insert_reading(ReadingMap& m, ReadingKey key, const BitString& value, const char* what) {
  auto [it, fresh] = m.emplace(std::move(key), value);
  ensure(fresh || it->second == value, std::string(what) + ": readings collide");
}

}  // namespace

const char* step_mode_name(StepMode m) { return m == StepMode::differ ? "differ" : "agree"; }

DisjointifyStep disjointify_step(const WeightedPos& f1, const WeightedPos& f2,
                                 const StepLabels& lab1, const StepLabels& lab2) {
  require(same_ladder(f1.ladder, f2.ladder), "disjointify_step: ladder mismatch");
  require(f1.level == f2.level, "disjointify_step: level mismatch");
  validate_step_labels(lab1);
  validate_step_labels(lab2);
  require(lab1.label_count == lab2.label_count, "disjointify_step: label sets differ");
  Support w = support_intersect(f1.u, f2.u);
  Support s1 = support_diff(f1.u, f2.u);
  Support s2 = support_diff(f2.u, f1.u);
  require(!s1.empty() && s1.size() == s2.size(), "disjointify_step: support surplus mismatch");
  require(mass(f1) > 0 && mass(f2) > 0, "disjointify_step: zero mass");
  require(is_balanced(f1, f2), "disjointify_step: pair is not balanced");
  const Ladder& ladder = *f1.ladder;

  // Group each side by the rank of the restriction to the shared support.
  auto group = [&](const WeightedPos& f) {
    std::map<Int, std::vector<std::pair<Int, Rat>>> out;
    for (const auto& [rank, v] : f.weights) {
      PosFunc e = pos_unrank(ladder, f.u, f.level, rank);
      out[core_rank_of(ladder, e, w)].emplace_back(rank, v);
    }
    return out;
  };
  auto fib1 = group(f1);
  auto fib2 = group(f2);
  ensure(fib1.size() == fib2.size(), "disjointify_step: core fibers differ");

  DisjointifyStep out;
  out.sum_agree = 0;
  out.sum_differ = 0;
  std::map<Int, Rat> keep1, keep2;
  // Kept entries per fiber, so the losing class can be dropped at the end.
  struct FiberKeep {
    bool agree = false;
    std::uint64_t label = 0;
    std::vector<std::pair<Int, Rat>> w1, w2;
  };
  std::vector<FiberKeep> kept;
  kept.reserve(fib1.size());

  for (const auto& [core, side1] : fib1) {
    auto it2 = fib2.find(core);
    ensure(it2 != fib2.end(), "disjointify_step: core fiber missing on one side");
    const auto& side2 = it2->second;

    auto label_masses = [&](const std::vector<std::pair<Int, Rat>>& side, const StepLabels& lab,
                            const char* who) {
      std::map<std::uint64_t, Rat> by;
      Rat total = 0;
      for (const auto& [rank, v] : side) {
        auto lit = lab.at.find(rank);
        require(lit != lab.at.end(), std::string("disjointify_step: unlabeled possibility (") + who + ")");
        by[lit->second] += v;
        total += v;
      }
      return std::make_pair(std::move(by), std::move(total));
    };
    auto [by1, kg1] = label_masses(side1, lab1, "side 1");
    auto [by2, kg2] = label_masses(side2, lab2, "side 2");
    ensure(kg1 == kg2, "disjointify_step: fiber masses differ despite balance");
    const Rat& kg = kg1;

    // Minimal label whose cumulative mass reaches half the fiber.
    auto median = [&](const std::map<std::uint64_t, Rat>& by) {
      Rat cum = 0;
      for (const auto& [label, v] : by) {
        cum += v;
        if (2 * cum >= kg) return std::make_pair(label, v);
      }
      throw std::logic_error("disjointify_step: median not reached");
    };
    auto [m1, eq1] = median(by1);
    auto [m2, eq2] = median(by2);
    bool big1 = 4 * eq1 >= kg;
    bool big2 = 4 * eq2 >= kg;

    unsigned iota;
    std::function<bool(std::uint64_t)> pred1, pred2;
    if (big1 && big2) {
      iota = 1;
      pred1 = [m1 = m1](std::uint64_t l) { return l == m1; };
      pred2 = [m2 = m2](std::uint64_t l) { return l == m2; };
    } else if (big1) {
      iota = 2;
      pred1 = [m1 = m1](std::uint64_t l) { return l == m1; };
      pred2 = [m1 = m1](std::uint64_t l) { return l != m1; };
    } else if (big2) {
      iota = 3;
      pred1 = [m2 = m2](std::uint64_t l) { return l != m2; };
      pred2 = [m2 = m2](std::uint64_t l) { return l == m2; };
    } else if (m1 <= m2) {
      iota = 4;
      pred1 = [m1 = m1](std::uint64_t l) { return l < m1; };
      pred2 = [m1 = m1](std::uint64_t l) { return l >= m1; };
    } else {
      iota = 5;
      pred1 = [m2 = m2](std::uint64_t l) { return l >= m2; };
      pred2 = [m2 = m2](std::uint64_t l) { return l < m2; };
    }

    auto cut_mass = [&](const std::map<std::uint64_t, Rat>& by,
                        const std::function<bool(std::uint64_t)>& pred) {
      Rat m = 0;
      for (const auto& [label, v] : by)
        if (pred(label)) m += v;
      return m;
    };
    Rat cm1 = cut_mass(by1, pred1);
    Rat cm2 = cut_mass(by2, pred2);
    ensure(4 * cm1 >= kg && 4 * cm2 >= kg, "disjointify_step: quarter bound failed");
    Rat cg = std::min(cm1, cm2);
    Rat scale1 = cg / cm1;
    Rat scale2 = cg / cm2;

    FiberKeep fk;
    fk.agree = iota == 1 && m1 == m2;
    fk.label = m1;
    for (const auto& [rank, v] : side1)
      if (pred1(lab1.at.at(rank))) fk.w1.emplace_back(rank, v * scale1);
    for (const auto& [rank, v] : side2)
      if (pred2(lab2.at.at(rank))) fk.w2.emplace_back(rank, v * scale2);
    kept.push_back(std::move(fk));

    StepFiber rec;
    rec.core_rank = core;
    rec.k_g = kg;
    rec.m1 = m1;
    rec.m2 = m2;
    rec.iota = iota;
    rec.kept_mass = cg;
    rec.in_agree_class = kept.back().agree;
    (rec.in_agree_class ? out.sum_agree : out.sum_differ) += cg;
    out.fibers.push_back(std::move(rec));
  }

  bool keep_agree = out.sum_agree >= out.sum_differ;
  out.mode = keep_agree ? StepMode::agree : StepMode::differ;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    if (kept[j].agree != keep_agree) continue;
    for (auto& [rank, v] : kept[j].w1) keep1.emplace(rank, std::move(v));
    for (auto& [rank, v] : kept[j].w2) keep2.emplace(rank, std::move(v));
    if (keep_agree) out.agree_label.emplace(out.fibers[j].core_rank, kept[j].label);
  }
  out.f1 = make_weighted(f1.ladder, f1.u, f1.level, Flavor::wpos, std::move(keep1));
  out.f2 = make_weighted(f2.ladder, f2.u, f2.level, Flavor::wpos, std::move(keep2));
  out.f = product(out.f1, out.f2);

  ensure(weights_leq(out.f1, f1) && weights_leq(out.f2, f2),
         "disjointify_step: output exceeds the input");
  ensure(is_balanced(out.f1, out.f2), "disjointify_step: output pair unbalanced");
  ensure(8 * mass(out.f1) >= mass(f1) && 8 * mass(out.f2) >= mass(f2),
         "disjointify_step: eighth bound failed");
  for (const auto& [rank, v] : out.f.weights) {
    PosFunc h = pos_unrank(ladder, out.f.u, out.f.level, rank);
    std::uint64_t l1 = lab1.at.at(pos_rank(ladder, pos_restrict(ladder, h, f1.u)));
    std::uint64_t l2 = lab2.at.at(pos_rank(ladder, pos_restrict(ladder, h, f2.u)));
    if (out.mode == StepMode::differ) {
      ensure(l1 != l2, "disjointify_step: separated labels coincide");
    } else {
      ensure(l1 == l2, "disjointify_step: agreeing labels differ");
      ensure(l1 == out.agree_label.at(core_rank_of(ladder, h, w)),
             "disjointify_step: agreement does not factor through the core");
    }
  }

  CertWriter cw;
  cw.kv("op", "disjointify_step");
  cw.kv("f1", hex64(weighted_hash(f1)));
  cw.kv("f2", hex64(weighted_hash(f2)));
  cw.kv("labels1", labels_digest(lab1));
  cw.kv("labels2", labels_digest(lab2));
  for (const auto& fib : out.fibers) {
    cw.open("fiber");
    cw.kv("core", fib.core_rank);
    cw.kv("k_g", fib.k_g);
    cw.kv("m1", fib.m1);
    cw.kv("m2", fib.m2);
    cw.kv("iota", fib.iota);
    cw.kv("kept", fib.kept_mass);
    cw.kv("agree", fib.in_agree_class);
    cw.close();
  }
  cw.kv("sum_agree", out.sum_agree);
  cw.kv("sum_differ", out.sum_differ);
  cw.kv("mode", step_mode_name(out.mode));
  cw.kv("out1", mass(out.f1));
  cw.kv("out2", mass(out.f2));
  cw.kv("product", mass(out.f));
  out.certificate = cw.str();
  return out;
}

DisjointifyLevel disjointify_level(const WeightedPos& F1, const WeightedPos& F2,
                                   const BranchLabeling& H1, const BranchLabeling& H2) {
  require(same_ladder(F1.ladder, F2.ladder) && same_ladder(F1.ladder, H1.ladder) &&
              same_ladder(F1.ladder, H2.ladder),
          "disjointify_level: ladder mismatch");
  unsigned level = F1.level;
  require(level >= 1, "disjointify_level: level must be positive");
  require(F2.level == level && H1.level == level && H2.level == level,
          "disjointify_level: level mismatch");
  require(H1.u == F1.u && H2.u == F2.u, "disjointify_level: labeling support mismatch");
  validate_labeling(H1);
  validate_labeling(H2);
  Support s1 = support_diff(F1.u, F2.u);
  Support s2 = support_diff(F2.u, F1.u);
  require(!s1.empty() && s1.size() == s2.size(), "disjointify_level: support surplus mismatch");
  require(mass(F1) > 0 && mass(F2) > 0, "disjointify_level: zero mass");
  require(is_balanced(F1, F2), "disjointify_level: pair is not balanced");

  const Ladder& ladder = *F1.ladder;
  const Support& u1 = F1.u;
  const Support& u2 = F2.u;
  Support u = support_union(u1, u2);
  Support w = support_intersect(u1, u2);
  Int reach = reach_count(ladder, u, level);
  check_enum_cap(ladder, reach, "disjointify_level");
  unsigned n_i = ladder.width(level);
  std::uint64_t label_count = std::uint64_t(1) << n_i;

  DisjointifyLevel out;
  out.steps = reach.get_ui();
  out.input_density = density(F1);
  WeightedPos cur1 = F1, cur2 = F2;

  CertWriter cw;
  cw.kv("op", "disjointify_level");
  cw.kv("f1", hex64(weighted_hash(F1)));
  cw.kv("f2", hex64(weighted_hash(F2)));
  cw.kv("H1", hex64(labeling_hash(H1)));
  cw.kv("H2", hex64(labeling_hash(H2)));
  cw.kv("k_star", out.steps);

  std::uint64_t k = 0;
  for_each_history(ladder, u, level, [&](const HistorySeq& xbar) {
    HistorySeq xr1 = history_restrict(xbar, u1);
    HistorySeq xr2 = history_restrict(xbar, u2);
    auto induced = [&](const WeightedPos& f, const HistorySeq& xr, const BranchLabeling& H) {
      StepLabels lab{label_count, {}};
      for (const auto& [rank, v] : f.weights) {
        HistorySeq ys = suc_apply(ladder, xr, pos_unrank(ladder, f.u, level, rank));
        lab.at.emplace(rank, label_of(H, ys).value);
      }
      return lab;
    };
    DisjointifyStep st = disjointify_step(cur1, cur2, induced(cur1, xr1, H1), induced(cur2, xr2, H2));
    out.modes.push_back(st.mode);
    if (st.mode == StepMode::agree) {
      HistoryKey key1 = history_key(ladder, xr1);
      HistoryKey key2 = history_key(ladder, xr2);
      HistorySeq xw = history_restrict(xbar, w);
      for (const auto& fib : st.fibers) {
        if (!fib.in_agree_class || !(fib.k_g > 0)) continue;
        HistoryKey core = history_key(
            ladder, suc_apply(ladder, xw, pos_unrank(ladder, w, level, fib.core_rank)));
        BitString val = make_bits(n_i, st.agree_label.at(fib.core_rank));
        insert_reading(out.h1, {key1, core}, val, "disjointify_level");
        insert_reading(out.h2, {key2, core}, val, "disjointify_level");
      }
    }
    cw.open("step");
    cw.kv("k", k);
    cw.kv("mode", step_mode_name(st.mode));
    cw.kv("cert", hex64(fnv1a64(st.certificate)));
    cw.close();
    cur1 = std::move(st.f1);
    cur2 = std::move(st.f2);
    ++k;
  });

  out.f1 = std::move(cur1);
  out.f2 = std::move(cur2);
  out.f = product(out.f1, out.f2);

  Rat pow8(Int(1) << static_cast<unsigned long>(3 * out.steps));
  out.mass_ok = mass(out.f1) * pow8 >= mass(F1) && mass(out.f2) * pow8 >= mass(F2);
  ensure(out.mass_ok, "disjointify_level: mass bound failed");
  Rat powd(Int(1) << static_cast<unsigned long>(9 * out.steps + 3));
  Rat a3 = out.input_density * out.input_density * out.input_density;
  out.density_ok = density(out.f) * powd >= a3;
  ensure(out.density_ok, "disjointify_level: density bound failed");

  // Replay every history against the final product: separated steps must
  // separate, agreeing steps must read through the recorded functions.
  out.gamma_ok = true;
  out.delta_ok = true;
  std::uint64_t idx = 0;
  for_each_history(ladder, u, level, [&](const HistorySeq& xbar) {
    StepMode mode = out.modes[idx++];
    HistoryKey key1 = history_key(ladder, history_restrict(xbar, u1));
    HistoryKey key2 = history_key(ladder, history_restrict(xbar, u2));
    for (const auto& [rank, v] : out.f.weights) {
      HistorySeq ys = suc_apply(ladder, xbar, pos_unrank(ladder, u, level, rank));
      BitString l1 = label_of(H1, history_restrict(ys, u1));
      BitString l2 = label_of(H2, history_restrict(ys, u2));
      if (mode == StepMode::differ) {
        if (l1 == l2) out.delta_ok = false;
        continue;
      }
      if (l1 != l2) {
        out.delta_ok = false;
        continue;
      }
      HistoryKey core = history_key(ladder, history_restrict(ys, w));
      auto i1 = out.h1.find({key1, core});
      auto i2 = out.h2.find({key2, core});
      if (i1 == out.h1.end() || i2 == out.h2.end() || i1->second != l1 || i2->second != l1)
        out.gamma_ok = false;
    }
  });
  ensure(out.delta_ok, "disjointify_level: agreement pattern broke");
  ensure(out.gamma_ok, "disjointify_level: readings do not factor the agreement");

  cw.kv("out1", mass(out.f1));
  cw.kv("out2", mass(out.f2));
  cw.kv("product_density", density(out.f));
  cw.kv("mass_ok", out.mass_ok);
  cw.kv("density_ok", out.density_ok);
  cw.kv("gamma_ok", out.gamma_ok);
  cw.kv("delta_ok", out.delta_ok);
  cw.kv("readings1", out.h1.size());
  cw.kv("readings2", out.h2.size());
  out.certificate = cw.str();
  return out;
}

CoincidenceReport coincidence_fraction(const Ladder& ladder, unsigned level, const Support& u,
                                       std::uint32_t alpha, const HistorySeq& xbar,
                                       const ReadingRule& rule1, const ReadingRule& rule2) {
  require(level >= 1 && level < ladder.levels(), "coincidence_fraction: level out of range");
  require(xbar.u == u, "coincidence_fraction: history support mismatch");
  require(xbar.length() == level, "coincidence_fraction: history length mismatch");
  auto ai = support_index(u, alpha);
  require(ai.has_value(), "coincidence_fraction: coordinate outside support");
  validate_history(ladder, xbar);
  unsigned n_i = ladder.width(level);
  unsigned n_below = ladder.width_below(level);
  unsigned delta = n_i - n_below;
  for (const auto* rule : {&rule1, &rule2})
    for (const auto& [rank, v] : *rule)
      require(v.width == n_i, "coincidence_fraction: rule value width mismatch");

  Support rest = support_diff(u, Support{alpha});
  Int rest_count = pos_count(ladder, rest, level);
  check_enum_cap(ladder, rest_count, "coincidence_fraction");

  CoincidenceReport rep;
  rep.fiber_bound = Rat(Int(1), Int(1) << delta);
  rep.within_bound = true;
  rep.exhaustive = pos_count(ladder, u, level) <= Int(ladder.enum_cap());

  Support just_alpha{alpha};
  Int alpha_count = pos_count(ladder, just_alpha, level);

  Rat total = 0;
  for (Int r0 = 0; r0 < rest_count; ++r0) {
    auto i1 = rule1.find(r0);
    auto i2 = rule2.find(r0);
    Rat frac = 0;
    if (i1 != rule1.end() && i2 != rule2.end()) {
      const BitString& eta1 = i1->second;
      const BitString& eta2 = i2->second;
      // The transported comparison collapses one level down, so the
      // coincidence needs matching initial segments and then pins the
      // distinguished image, one choice in a fiber of size 2^delta.
      if (restrict_bits(eta1, n_below) == restrict_bits(eta2, n_below)) frac = rep.fiber_bound;
      if (rep.exhaustive) {
        PosFunc h0 = pos_unrank(ladder, rest, level, r0);
        Int hits = 0;
        for (Int ra = 0; ra < alpha_count; ++ra) {
          PosFunc h = pos_merge(ladder, h0, pos_unrank(ladder, just_alpha, level, ra));
          HistorySeq ys = suc_apply(ladder, xbar, h);
          const CreatureObject& y = ys.entries.back();
          if (y.f[*ai].apply(eta1) == y.g[*ai].apply(eta2)) ++hits;
        }
        Rat counted(hits, alpha_count);
        counted.canonicalize();
        ensure(counted == frac, "coincidence_fraction: closed form disagrees with enumeration");
      }
    }
    if (frac > rep.fiber_bound) rep.within_bound = false;
    total += frac;
  }
  ensure(rep.within_bound, "coincidence_fraction: fiber bound exceeded");
  rep.overall = total / Rat(rest_count);
  return rep;
}

ReductionRules coincidence_reduction(const Ladder& ladder, unsigned level, const Support& u,
                                     std::uint32_t alpha1, std::uint32_t alpha2,
                                     const HistorySeq& xbar, const Support& w,
                                     const std::map<HistoryKey, BitString>& core_rule1,
                                     const std::map<HistoryKey, BitString>& core_rule2) {
  require(alpha1 != alpha2, "coincidence_reduction: coordinates coincide");
  require(support_contains(u, alpha1) && support_contains(u, alpha2),
          "coincidence_reduction: coordinate outside support");
  require(!support_contains(w, alpha1) && !support_contains(w, alpha2),
          "coincidence_reduction: coordinate inside the core");
  require(support_subset(w, u), "coincidence_reduction: core not below the support");
  require(xbar.u == u && xbar.length() == level && level >= 1,
          "coincidence_reduction: history shape mismatch");

  Support rest = support_diff(u, Support{alpha1});
  Int rest_count = pos_count(ladder, rest, level);
  check_enum_cap(ladder, rest_count, "coincidence_reduction");
  HistorySeq xrest = history_restrict(xbar, rest);
  auto a2 = support_index(rest, alpha2);

  ReductionRules out;
  for (Int re = 0; re < rest_count; ++re) {
    PosFunc e = pos_unrank(ladder, rest, level, re);
    HistorySeq ys = suc_apply(ladder, xrest, e);
    HistoryKey core = history_key(ladder, history_restrict(ys, w));
    auto q1 = core_rule1.find(core);
    auto q2 = core_rule2.find(core);
    if (q1 != core_rule1.end()) out.rule1.emplace(re, q1->second);
    if (q2 != core_rule2.end()) {
      const CreatureObject& y = ys.entries.back();
      out.rule2.emplace(re, inverse(y.g[*a2]).apply(y.f[*a2].apply(q2->second)));
    }
  }
  return out;
}

ObstructionVerdict nor_zero_obstruction(const Creature& c, const ObstructionWitness& wit) {
  const WeightedPos& F = c.F;
  unsigned level = F.level;
  require(level >= 1, "nor_zero_obstruction: level must be positive");
  require(wit.xbar.u == F.u && wit.xbar.length() == level,
          "nor_zero_obstruction: witness history shape mismatch");
  auto ai = support_index(F.u, wit.alpha);
  require(ai.has_value(), "nor_zero_obstruction: coordinate outside support");
  require(mass(F) > 0, "nor_zero_obstruction: zero mass");
  const Ladder& ladder = *F.ladder;

  Support rest = support_diff(F.u, Support{wit.alpha});
  ObstructionVerdict v;
  v.hypothesis_holds = true;
  for (const auto& [rank, weight] : F.weights) {
    PosFunc h = pos_unrank(ladder, F.u, level, rank);
    Int r0 = core_rank_of(ladder, h, rest);
    auto i1 = wit.rule1.find(r0);
    auto i2 = wit.rule2.find(r0);
    if (i1 == wit.rule1.end() || i2 == wit.rule2.end()) {
      v.hypothesis_holds = false;
      break;
    }
    HistorySeq ys = suc_apply(ladder, wit.xbar, h);
    const CreatureObject& y = ys.entries.back();
    if (y.f[*ai].apply(i1->second) != y.g[*ai].apply(i2->second)) {
      v.hypothesis_holds = false;
      break;
    }
  }

  unsigned k = ladder.norm_base(level);
  unsigned delta = ladder.width(level) - ladder.width_below(level);
  Int exp = int_pow(3, k) - 1;
  // Regime test, exact: widths stop at 63 bits, so an exponent past delta
  // already overshoots the fiber count.
  if (exp > delta) {
    v.threshold_regime = false;
  } else {
    v.threshold_regime = (Int(1) << delta) >= int_pow(k, exp.get_ui());
  }

  CoincidenceReport rep =
      coincidence_fraction(ladder, level, F.u, wit.alpha, wit.xbar, wit.rule1, wit.rule2);
  v.fraction = rep.overall;
  v.density = density(F);
  v.exact_zero = nor0(F).exact_zero;

  CertWriter cw;
  cw.kv("op", "nor_zero_obstruction");
  cw.kv("F", hex64(weighted_hash(F)));
  cw.kv("alpha", wit.alpha);
  cw.kv("xbar", key_str(history_key(ladder, wit.xbar)));
  cw.kv("rules1", wit.rule1.size());
  cw.kv("rules2", wit.rule2.size());
  cw.kv("hypothesis", v.hypothesis_holds);
  cw.kv("norm_base", k);
  cw.kv("delta", delta);
  cw.kv("regime", v.threshold_regime);
  cw.kv("fraction", v.fraction);
  cw.kv("density", v.density);
  cw.kv("exact_zero", v.exact_zero);
  v.certificate = cw.str();

  if (v.hypothesis_holds && v.threshold_regime)
    ensure(v.exact_zero, "nor_zero_obstruction: forced zero branch did not fire");
  return v;
}

namespace {

// Labels transported through the top pair at a separated coordinate, with a
// canonical default where the reading was never recorded.
BranchLabeling derived_labeling(const LadderRef& ladder, const Support& u, unsigned level,
                                std::uint32_t alpha, const Support& w, const ReadingMap& readings,
                                std::uint64_t* defaults) {
  std::size_t idx = *support_index(u, alpha);
  unsigned n_i = ladder->width(level);
  std::map<HistoryKey, BitString> table;
  for_each_history(*ladder, u, level + 1, [&](const HistorySeq& ys) {
    HistoryKey full = history_key(*ladder, ys);
    HistoryKey below(full.begin(), full.end() - 1);
    HistoryKey core = history_key(*ladder, history_restrict(ys, w));
    auto it = readings.find({below, core});
    BitString val = make_bits(n_i, 0);
    if (it != readings.end())
      val = it->second;
    else
      ++*defaults;
    const CreatureObject& y = ys.entries.back();
    table.emplace(std::move(full), inverse(y.g[idx]).apply(y.f[idx].apply(val)));
  });
  return make_labeling(ladder, u, level, std::move(table));
}

}  // namespace

CreatureDisjointReport disjointify_creatures(const Creature& c1, const Creature& c2,
                                             const BranchLabeling& H1, const BranchLabeling& H2,
                                             std::uint32_t alpha1, std::uint32_t alpha2) {
  const WeightedPos& F1 = c1.F;
  const WeightedPos& F2 = c2.F;
  require(same_ladder(F1.ladder, F2.ladder), "disjointify_creatures: ladder mismatch");
  unsigned level = F1.level;
  require(level >= 2, "disjointify_creatures: level must exceed 1");
  require(F2.level == level, "disjointify_creatures: level mismatch");
  const Support& u1 = F1.u;
  const Support& u2 = F2.u;
  Support u = support_union(u1, u2);
  Support w = support_intersect(u1, u2);
  Support s1 = support_diff(u1, u2);
  Support s2 = support_diff(u2, u1);
  require(!s1.empty() && s1.size() == s2.size(), "disjointify_creatures: support surplus mismatch");
  require(support_contains(s1, alpha1), "disjointify_creatures: alpha1 not in the first surplus");
  require(support_contains(s2, alpha2), "disjointify_creatures: alpha2 not in the second surplus");
  require(in_underline_cr(c1) && in_underline_cr(c2),
          "disjointify_creatures: not in the rational creature class");
  bool proj_pre = w.empty() ? proj_equal_trivial(c1, c2)
                            : (c1.m == c2.m && restrict_weighted(F1, w).weights ==
                                                   restrict_weighted(F2, w).weights);
  require(proj_pre, "disjointify_creatures: core projections differ");
  ensure(is_balanced(F1, F2), "disjointify_creatures: projections agree but pair unbalanced");

  const Ladder& ladder = *F1.ladder;
  bool width_side = u.size() < ladder.width_below(level);
  double nor_in1 = nor2(c1), nor_in2 = nor2(c2);
  bool norms_big = nor_in1 > 2.0 && nor_in2 > 2.0;
  if (ladder.paper_scale())
    require(norms_big, "disjointify_creatures: norms must exceed 2");

  CreatureDisjointReport rep;
  rep.nor2_in1 = nor_in1;
  rep.nor2_in2 = nor_in2;
  rep.pass1 = disjointify_level(F1, F2, H1, H2);

  rep.default_labels = 0;
  BranchLabeling H1p =
      derived_labeling(F1.ladder, u1, level, alpha1, w, rep.pass1.h1, &rep.default_labels);
  BranchLabeling H2p =
      derived_labeling(F2.ladder, u2, level, alpha2, w, rep.pass1.h2, &rep.default_labels);
  rep.pass2 = disjointify_level(rep.pass1.f1, rep.pass1.f2, H1p, H2p);

  rep.d1 = Creature{rep.pass2.f1, c1.m};
  rep.d2 = Creature{rep.pass2.f2, c2.m};
  rep.f = rep.pass2.f;

  rep.proj_equal = w.empty() ? proj_equal_trivial(rep.d1, rep.d2)
                             : (rep.d1.m == rep.d2.m &&
                                restrict_weighted(rep.d1.F, w).weights ==
                                    restrict_weighted(rep.d2.F, w).weights);
  ensure(rep.proj_equal, "disjointify_creatures: output projections differ");

  rep.nor2_out1 = nor2(rep.d1);
  rep.nor2_out2 = nor2(rep.d2);
  rep.drop_ok = rep.nor2_out1 >= nor_in1 - 1.0 - 1e-9 && rep.nor2_out2 >= nor_in2 - 1.0 - 1e-9;

  // Audit every second-pass step that still agrees: by construction its
  // survivors realize the transported coincidence, so the counting
  // obstruction applies verbatim; at a wide ladder that forces norm zero,
  // which is exactly why such steps cannot survive there.
  std::uint64_t idx = 0;
  for_each_history(ladder, u, level, [&](const HistorySeq& xbar) {
    StepMode mode = rep.pass2.modes[idx++];
    if (mode != StepMode::agree) return;
    ++rep.pass2_agree;
    HistoryKey key1 = history_key(ladder, history_restrict(xbar, u1));
    HistoryKey key2 = history_key(ladder, history_restrict(xbar, u2));
    HistorySeq xw = history_restrict(xbar, w);
    std::map<HistoryKey, BitString> q1, q2;
    unsigned n_i = ladder.width(level);
    for (const auto& [rank, v] : rep.f.weights) {
      PosFunc h = pos_unrank(ladder, u, level, rank);
      Int cr = core_rank_of(ladder, h, w);
      HistoryKey core =
          history_key(ladder, suc_apply(ladder, xw, pos_unrank(ladder, w, level, cr)));
      auto fill = [&](std::map<HistoryKey, BitString>& q, const ReadingMap& readings,
                      const HistoryKey& key) {
        auto it = readings.find({key, core});
        q.emplace(core, it != readings.end() ? it->second : make_bits(n_i, 0));
      };
      fill(q1, rep.pass1.h1, key1);
      fill(q2, rep.pass1.h2, key2);
    }
    ReductionRules red =
        coincidence_reduction(ladder, level, u, alpha1, alpha2, xbar, w, q1, q2);
    ObstructionVerdict verdict =
        nor_zero_obstruction(Creature{rep.f, c1.m}, {xbar, alpha1, red.rule1, red.rule2});
    ensure(verdict.hypothesis_holds, "disjointify_creatures: agree step without coincidence");
    rep.agree_obstructions.push_back(std::move(verdict));
  });
  if (ladder.paper_scale())
    ensure(rep.pass2_agree == 0,
           "disjointify_creatures: agreement survived where separation is forced");

  // Final separation audit against the original labelings.
  auto iu1 = support_index(u, alpha1);
  auto iu2 = support_index(u, alpha2);
  for_each_history(ladder, u, level, [&](const HistorySeq& xbar) {
    for (const auto& [rank, v] : rep.f.weights) {
      HistorySeq ys = suc_apply(ladder, xbar, pos_unrank(ladder, u, level, rank));
      BitString e1 = label_of(H1, history_restrict(ys, u1));
      BitString e2 = label_of(H2, history_restrict(ys, u2));
      if (e1 != e2) {
        ++rep.gamma_vacuous;
        continue;
      }
      const CreatureObject& y = ys.entries.back();
      BitString t1 = inverse(y.g[*iu1]).apply(y.f[*iu1].apply(e1));
      BitString t2 = inverse(y.g[*iu2]).apply(y.f[*iu2].apply(e2));
      if (t1 != t2)
        ++rep.gamma_satisfied;
      else
        ++rep.gamma_violated;
    }
  });
  rep.gamma_ok = rep.gamma_violated == 0;
  rep.guaranteed = ladder.paper_scale() && width_side && norms_big;
  if (rep.guaranteed) {
    ensure(rep.gamma_ok, "disjointify_creatures: separation failed at a guaranteed ladder");
    ensure(rep.drop_ok, "disjointify_creatures: norm drop exceeded 1 at a guaranteed ladder");
  }

  CertWriter cw;
  cw.kv("op", "disjointify_creatures");
  cw.kv("c1", hex64(weighted_hash(F1)));
  cw.kv("c2", hex64(weighted_hash(F2)));
  cw.kv("m", c1.m);
  cw.kv("H1", hex64(labeling_hash(H1)));
  cw.kv("H2", hex64(labeling_hash(H2)));
  cw.kv("alpha1", alpha1);
  cw.kv("alpha2", alpha2);
  cw.kv("width_side", width_side);
  cw.kv("norms_big", norms_big);
  cw.kv("pass1", hex64(fnv1a64(rep.pass1.certificate)));
  cw.kv("pass2", hex64(fnv1a64(rep.pass2.certificate)));
  cw.kv("default_labels", rep.default_labels);
  cw.kv("pass2_agree", rep.pass2_agree);
  cw.kv("proj_equal", rep.proj_equal);
  cw.kv("nor2_in1", rep.nor2_in1);
  cw.kv("nor2_in2", rep.nor2_in2);
  cw.kv("nor2_out1", rep.nor2_out1);
  cw.kv("nor2_out2", rep.nor2_out2);
  cw.kv("drop_ok", rep.drop_ok);
  cw.kv("gamma_vacuous", rep.gamma_vacuous);
  cw.kv("gamma_satisfied", rep.gamma_satisfied);
  cw.kv("gamma_violated", rep.gamma_violated);
  cw.kv("guaranteed", rep.guaranteed);
  rep.certificate = cw.str();
  return rep;
}

NormalFormReport reading_normal_form(const Condition& p1, const Condition& p2,
                                     const std::vector<NamePair>& names,
                                     const std::vector<unsigned>& schedule) {
  NormalFormReport rep;
  rep.structural = true;
  rep.norm_floors = true;
  auto flag = [&](bool ok, bool* target, const std::string& msg) {
    if (!ok) {
      *target = false;
      rep.issues.push_back(msg);
    }
    return ok;
  };

  if (!flag(same_ladder(p1.ladder, p2.ladder), &rep.structural, "ladder mismatch")) return rep;
  const Support& u1 = p1.hist.u;
  const Support& u2 = p2.hist.u;
  flag(p1.horizon == p2.horizon, &rep.structural, "horizon mismatch");
  flag(p1.base_level() == p2.base_level(), &rep.structural, "base level mismatch");
  flag(is_delta_system(u1, u2) && u1 != u2, &rep.structural, "supports are not a Delta-system pair");
  if (!rep.structural) return rep;
  flag(condition_equal(transfer(p1, u2), p2), &rep.structural,
       "second input is not a transferred copy");

  Support w = support_intersect(u1, u2);
  if (w.empty()) {
    for (unsigned i = p1.base_level(); i < p1.horizon; ++i)
      flag(proj_equal_trivial(p1.at_level(i), p2.at_level(i)), &rep.structural,
           "trivial projections differ at level " + std::to_string(i));
  } else {
    flag(condition_equal(project_condition(p1, w), project_condition(p2, w)), &rep.structural,
         "core projections differ");
  }

  flag(schedule.size() == names.size(), &rep.structural, "schedule and name counts differ");
  for (std::size_t j = 0; j + 1 < schedule.size(); ++j)
    flag(schedule[j] < schedule[j + 1], &rep.structural, "schedule not strictly increasing");
  if (!schedule.empty()) {
    flag(schedule.front() >= std::max(p1.base_level(), 2u), &rep.structural,
         "schedule starts below the working range");
    flag(schedule.back() < p1.horizon, &rep.structural, "schedule passes the horizon");
    if (p1.ladder->paper_scale())
      for (std::size_t j = 0; j + 1 < schedule.size(); ++j)
        flag(schedule[j + 1] > schedule[j] + 10, &rep.structural, "schedule gaps too small");
  }

  for (std::size_t kk = 0; kk < names.size() && rep.structural; ++kk) {
    const NamePair& nm = names[kk];
    std::string tag = "name " + std::to_string(kk) + ": ";
    flag(support_contains(u1, nm.alpha1) && !support_contains(u2, nm.alpha1), &rep.structural,
         tag + "first coordinate not exclusive to the first support");
    flag(support_contains(u2, nm.alpha2) && !support_contains(u1, nm.alpha2), &rep.structural,
         tag + "second coordinate not exclusive to the second support");
    for (unsigned i = schedule[kk]; i < p1.horizon && rep.structural; ++i) {
      auto it = nm.readings.find(i);
      if (!flag(it != nm.readings.end(), &rep.structural, tag + "no reading at level " + std::to_string(i)))
        break;
      const auto& [r1, r2] = it->second;
      flag(r1.u == u1 && r1.level == i && r2.u == u2 && r2.level == i, &rep.structural,
           tag + "reading shape mismatch at level " + std::to_string(i));
    }
  }

  if (!rep.structural) return rep;
  for (std::size_t j = 0; j < schedule.size(); ++j)
    for (unsigned i = schedule[j]; i < p1.horizon; ++i) {
      double need = 2.0 * double(j) + 2.0;
      if (!(nor2(p1.at_level(i)) > need + 1e-9 && nor2(p2.at_level(i)) > need + 1e-9)) {
        rep.norm_floors = false;
        rep.issues.push_back("norm floor " + std::to_string(need) + " missed at level " +
                             std::to_string(i));
      }
    }
  return rep;
}

namespace {

HistorySeq union_history(const Condition& p1, const Condition& p2, const Support& w) {
  const Support& u1 = p1.hist.u;
  const Support& u2 = p2.hist.u;
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
  return xs;
}

}  // namespace

DisjointAmalgam amalgamate_disjoint(const Condition& p1, const Condition& p2,
                                    const std::vector<NamePair>& names,
                                    const std::vector<unsigned>& schedule) {
  NormalFormReport nf = reading_normal_form(p1, p2, names, schedule);
  require(nf.structural,
          nf.issues.empty() ? std::string("amalgamate_disjoint: malformed inputs")
                            : "amalgamate_disjoint: " + nf.issues.front());
  if (p1.ladder->paper_scale())
    require(nf.norm_floors, "amalgamate_disjoint: norm floors missed");

  DisjointAmalgam out;
  CertWriter cw;
  cw.kv("op", "amalgamate_disjoint");
  cw.kv("p1", hex64(condition_hash(p1)));
  cw.kv("p2", hex64(condition_hash(p2)));
  cw.kv("names", names.size());
  cw.kv("norm_floors", nf.norm_floors);

  if (names.empty()) {
    out.q = amalgamate(p1, p2);
    out.project_dominates = true;
    out.forced_disjoint = true;
    out.guaranteed = p1.ladder->paper_scale() && nf.norm_floors;
    cw.kv("reduction", "amalgamate");
    cw.kv("q", hex64(condition_hash(out.q)));
    out.certificate = cw.str();
    return out;
  }

  const Ladder& ladder = *p1.ladder;
  const Support& u1 = p1.hist.u;
  const Support& u2 = p2.hist.u;
  Support u = support_union(u1, u2);
  HistorySeq xs = union_history(p1, p2, u);

  std::vector<Creature> cs;
  cs.reserve(p1.horizon - p1.base_level());
  bool steps_guaranteed = true;
  for (unsigned i = p1.base_level(); i < p1.horizon; ++i) {
    std::size_t active = 0;
    while (active < schedule.size() && schedule[active] <= i) ++active;
    Creature cur1 = p1.at_level(i);
    Creature cur2 = p2.at_level(i);
    if (active == 0) {
      WeightedPos prod = product(cur1.F, cur2.F);
      if (ladder.norm_base(i) >= 3)
        ensure(nor_drop_leq_general(ladder.norm_base(i), pos_size(prod), mass(prod),
                                    pos_size(cur1.F), mass(cur1.F), 1),
               "amalgamate_disjoint: norm drop exceeded 1 at an inactive level");
      cs.push_back(Creature{std::move(prod), cur1.m});
      continue;
    }
    for (std::size_t m = 0; m < active; ++m) {
      const NamePair& nm = names[m];
      const auto& reading = nm.readings.at(i);
      CreatureDisjointReport r =
          disjointify_creatures(cur1, cur2, reading.first, reading.second, nm.alpha1, nm.alpha2);
      cur1 = r.d1;
      cur2 = r.d2;
      steps_guaranteed = steps_guaranteed && r.guaranteed;
      cw.open("step");
      cw.kv("level", i);
      cw.kv("name", m);
      cw.kv("cert", hex64(fnv1a64(r.certificate)));
      cw.close();
      out.steps.push_back(DisjointAmalgamStep{i, m, std::move(r)});
    }
    cs.push_back(Creature{product(cur1.F, cur2.F), cur1.m});
  }
  out.q = make_condition(p1.ladder, std::move(xs), std::move(cs), p1.horizon);

  out.project_dominates =
      leq(p1, project_condition(out.q, u1)) && leq(p2, project_condition(out.q, u2));
  ensure(out.project_dominates, "amalgamate_disjoint: projections miss the inputs");

  // Bounded-intersection sweep: walk the deepest reachable histories; at
  // each active level an agreement of the two readings must sit on nodes
  // whose cones stay apart from there to the horizon.
  for (const auto& zeta : pos_of(out.q, out.q.horizon)) {
    for (std::size_t kk = 0; kk < names.size(); ++kk) {
      const NamePair& nm = names[kk];
      for (unsigned i = schedule[kk]; i < out.q.horizon; ++i) {
        HistorySeq prefix{zeta.u,
                          std::vector<CreatureObject>(zeta.entries.begin(),
                                                      zeta.entries.begin() + i + 1)};
        const auto& reading = nm.readings.at(i);
        BitString e1 = label_of(reading.first, history_restrict(prefix, u1));
        BitString e2 = label_of(reading.second, history_restrict(prefix, u2));
        if (e1 != e2) continue;
        ++out.agreements_checked;
        ConeCheck cc = cone_disjointness(ladder, zeta, nm.alpha1, nm.alpha2, i, e1, e2);
        if (!cc.premise) ++out.premise_failures;
        if (!cc.disjoint) ++out.cone_failures;
      }
    }
  }
  out.forced_disjoint = out.premise_failures == 0 && out.cone_failures == 0;
  out.guaranteed = ladder.paper_scale() && nf.norm_floors && steps_guaranteed;
  if (out.guaranteed)
    ensure(out.forced_disjoint, "amalgamate_disjoint: cones met at a guaranteed ladder");

  cw.kv("q", hex64(condition_hash(out.q)));
  cw.kv("project_dominates", out.project_dominates);
  cw.kv("agreements", out.agreements_checked);
  cw.kv("premise_failures", out.premise_failures);
  cw.kv("cone_failures", out.cone_failures);
  cw.kv("forced_disjoint", out.forced_disjoint);
  cw.kv("guaranteed", out.guaranteed);
  out.certificate = cw.str();
  return out;
}

}  // namespace creatures
