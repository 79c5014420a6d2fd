#include "creatures/fusion.hpp"

#include <algorithm>
#include <map>
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

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  require(!s.empty() && s.find_first_not_of("0123456789") == std::string::npos,
          what + ": expected a number, got '" + s + "'");
  return std::stoull(s);
}

Condition oracle_advance(const Condition& p) {
  if (p.base_level() >= p.horizon) return p;
  const Creature& c = p.at_level(p.base_level());
  require(!c.F.weights.empty(), "advance: empty base creature");
  Int rank = c.F.weights.begin()->first;
  HistorySeq hist = suc_apply(*p.ladder, p.hist, pos_unrank(*p.ladder, c.F.u, c.F.level, rank));
  std::vector<Creature> cs(p.creatures.begin() + 1, p.creatures.end());
  return make_condition(p.ladder, std::move(hist), std::move(cs), p.horizon);
}

Condition oracle_halve(const Condition& p, unsigned j) {
  if (j < p.base_level() || j >= p.horizon) return p;
  std::vector<Creature> cs = p.creatures;
  cs[j - p.base_level()] = halve(cs[j - p.base_level()]);
  return make_condition(p.ladder, p.hist, std::move(cs), p.horizon);
}

}  // namespace

OracleFn resolve_oracle(const std::string& id) {
  if (id == "noop") return [](const Condition& p) { return p; };
  if (id == "advance") return oracle_advance;
  if (id == "densify") return [](const Condition& p) { return densify_condition(p); };
  if (id.rfind("halve:", 0) == 0) {
    unsigned j = static_cast<unsigned>(parse_u64(id.substr(6), "halve"));
    return [j](const Condition& p) { return oracle_halve(p, j); };
  }
  throw std::invalid_argument("unknown oracle '" + id + "'");
}

std::vector<std::string> oracle_names() { return {"noop", "advance", "halve:<j>", "densify"}; }

BranchLabeling resolve_labeling(const std::string& rule, LadderRef ladder, Support u,
                                unsigned level) {
  require(ladder != nullptr, "resolve_labeling: null ladder");
  unsigned w = ladder->width(level);
  std::uint64_t mask = w == 0 ? 0 : ~std::uint64_t(0) >> (64 - w);
  if (rule.rfind("constant:", 0) == 0) {
    std::uint64_t v = parse_u64(rule.substr(9), "constant");
    return labeling_constant(std::move(ladder), std::move(u), level, make_bits(w, v & mask));
  }
  if (rule.rfind("seeded:", 0) == 0) {
    std::uint64_t s = parse_u64(rule.substr(7), "seeded");
    return labeling_seeded(std::move(ladder), std::move(u), level, s);
  }
  if (rule.rfind("follow:", 0) == 0) {
    std::string body = rule.substr(7);
    auto sep = body.find(':');
    require(sep != std::string::npos, "follow rule needs '<alpha>:<v>'");
    auto alpha = static_cast<std::uint32_t>(parse_u64(body.substr(0, sep), "follow alpha"));
    std::uint64_t v = parse_u64(body.substr(sep + 1), "follow probe");
    return labeling_follow(std::move(ladder), std::move(u), level, alpha, make_bits(w, v & mask));
  }
  throw std::invalid_argument("unknown labeling rule '" + rule + "'");
}

void validate_plan(const FusionPlan& plan) {
  require(plan.ladder != nullptr, "plan: null ladder");
  require(plan.root.ladder && plan.root.ladder->spec_string() == plan.ladder->spec_string(),
          "plan: root ladder mismatch");
  require(plan.root.hist.u == Support{0}, "plan: root support must be {0}");
  require(plan.depth <= 63, "plan: depth exceeds the node coding width");
  require(plan.splits.size() == plan.depth, "plan: one split rank per level expected");
  for (unsigned i = 0; i < plan.depth; ++i)
    require(plan.splits[i] <= i, "plan: split rank exceeds the level width");
  std::map<std::pair<unsigned, std::string>, unsigned> seen;
  for (const auto& o : plan.oracles) {
    require(o.level <= plan.depth, "plan: oracle level beyond the depth");
    resolve_oracle(o.id);
    require(++seen[{o.level, o.id}] == 1, "plan: duplicate oracle per level");
  }
  std::map<unsigned, unsigned> last_activation;
  for (const auto& nm : plan.names) {
    require(nm.tree_level < plan.depth, "plan: name beyond the bottom step");
    require(nm.activation >= 2 && nm.activation < plan.root.horizon,
            "plan: activation outside the working range");
    auto it = last_activation.find(nm.tree_level);
    require(it == last_activation.end() || it->second < nm.activation,
            "plan: activations at one tree level must increase");
    last_activation[nm.tree_level] = nm.activation;
  }
}

Support split_image(unsigned level, std::uint32_t split, unsigned ell) {
  require(split <= level, "split_image: split rank exceeds the level width");
  require(ell < 2, "split_image: two children only");
  Support u;
  u.reserve(level + 1);
  for (std::uint32_t t = 0; t <= level + 1; ++t)
    if (t != split + 1 - ell) u.push_back(t);
  return u;
}

namespace {

std::string plan_digest(const FusionPlan& plan) {
  CertWriter w;
  w.kv("ladder", plan.ladder->spec_string());
  w.kv("depth", plan.depth);
  w.kv("root", hex64(condition_hash(plan.root)));
  for (auto s : plan.splits) w.kv("split", s);
  for (const auto& o : plan.oracles) {
    w.open("oracle");
    w.kv("level", o.level);
    w.kv("id", o.id);
    w.kv("width", o.width);
    w.close();
  }
  for (const auto& nm : plan.names) {
    w.open("name");
    w.kv("tree_level", nm.tree_level);
    w.kv("rule1", nm.rule1);
    w.kv("rule2", nm.rule2);
    w.kv("activation", nm.activation);
    w.close();
  }
  return hex64(w.content_hash());
}

}  // namespace

FusionTree build_fusion(const FusionPlan& plan) {
  validate_plan(plan);
  FusionTree tree;
  tree.plan = plan;
  tree.levels.resize(plan.depth + 1);

  CertWriter cw;
  cw.kv("op", "build_fusion");
  cw.kv("plan", plan_digest(plan));

  auto refine = [&](unsigned level) {
    FusionLevelRecord& rec = tree.levels[level];
    for (const auto& o : plan.oracles) {
      if (o.level != level) continue;
      if (o.width != 0 && o.width != level + 1) {
        ++tree.oracles_skipped;
        tree.skipped.push_back("level " + std::to_string(level) + ": " + o.id + " wants width " +
                               std::to_string(o.width) + ", level has " +
                               std::to_string(level + 1));
        continue;
      }
      Condition out = resolve_oracle(o.id)(rec.cond);
      require(leq(rec.cond, out), "build_fusion: oracle '" + o.id + "' returned a non-extension");
      rec.cond = std::move(out);
      ++tree.oracles_applied;
      cw.open("oracle");
      cw.kv("level", level);
      cw.kv("id", o.id);
      cw.kv("cond", hex64(condition_hash(rec.cond)));
      cw.close();
    }
  };

  tree.levels[0].nodes = {make_bits(0, 0)};
  tree.levels[0].cond = plan.root;
  refine(0);

  for (unsigned i = 0; i < plan.depth; ++i) {
    FusionLevelRecord& cur = tree.levels[i];
    FusionLevelRecord& next = tree.levels[i + 1];
    std::uint32_t s = plan.splits[i];
    cur.split = s;

    next.nodes.reserve(cur.nodes.size() + 1);
    for (std::uint32_t t = 0; t < cur.nodes.size(); ++t) {
      const BitString& node = cur.nodes[t];
      next.nodes.push_back(make_bits(node.width + 1, node.value << 1));
      if (t == s) next.nodes.push_back(make_bits(node.width + 1, (node.value << 1) | 1));
    }

    Support u0 = split_image(i, s, 0);
    Support u1 = split_image(i, s, 1);
    Condition q0 = transfer(cur.cond, u0);
    Condition q1 = transfer(cur.cond, u1);

    std::vector<NamePair> pairs;
    std::vector<unsigned> schedule;
    for (const auto& nm : plan.names) {
      if (nm.tree_level != i) continue;
      NamePair np;
      np.alpha1 = s;
      np.alpha2 = s + 1;
      for (unsigned L = nm.activation; L < q0.horizon; ++L)
        np.readings.emplace(L, std::make_pair(resolve_labeling(nm.rule1, plan.ladder, u0, L),
                                              resolve_labeling(nm.rule2, plan.ladder, u1, L)));
      pairs.push_back(std::move(np));
      schedule.push_back(nm.activation);
    }

    if (pairs.empty()) {
      next.cond = amalgamate(q0, q1);
    } else {
      DisjointAmalgam run = amalgamate_disjoint(q0, q1, pairs, schedule);
      next.cond = run.q;
      cw.open("separation");
      cw.kv("tree_level", i);
      cw.kv("cert", hex64(fnv1a64(run.certificate)));
      cw.close();
      tree.name_runs.push_back(std::move(run));
    }
    cw.open("step");
    cw.kv("to_level", i + 1);
    cw.kv("split", s);
    cw.kv("cond", hex64(condition_hash(next.cond)));
    cw.close();
    refine(i + 1);
  }

  tree.clause_extension = true;
  for (unsigned i = 0; i < plan.depth; ++i) {
    std::uint32_t s = plan.splits[i];
    for (unsigned ell = 0; ell < 2; ++ell) {
      Support img = split_image(i, s, ell);
      if (!leq(transfer(tree.levels[i].cond, img),
               project_condition(tree.levels[i + 1].cond, img)))
        tree.clause_extension = false;
    }
  }
  ensure(tree.clause_extension, "build_fusion: a transferred parent escaped its child");

  for (unsigned i = 0; i <= plan.depth; ++i) {
    cw.open("level");
    cw.kv("i", i);
    cw.kv("nodes", tree.levels[i].nodes.size());
    cw.kv("cond", hex64(condition_hash(tree.levels[i].cond)));
    cw.close();
  }
  cw.kv("clause_extension", tree.clause_extension);
  cw.kv("oracles_applied", tree.oracles_applied);
  cw.kv("oracles_skipped", tree.oracles_skipped);
  tree.certificate = cw.str();
  return tree;
}

KappaSeq kappa_of(LadderRef ladder, const HistorySeq& xs, std::uint32_t alpha) {
  require(ladder != nullptr, "kappa_of: null ladder");
  auto idx = support_index(xs.u, alpha);
  require(idx.has_value(), "kappa_of: coordinate outside support");
  std::vector<LevelPerm> perms;
  perms.reserve(xs.entries.size());
  for (const auto& y : xs.entries) perms.push_back(y.f[*idx]);
  return make_kappa(std::move(ladder), std::move(perms));
}

BranchExtract extract_branch(const FusionTree& tree, BitString leaf) {
  require(!tree.levels.empty(), "extract_branch: empty tree");
  const FusionLevelRecord& bottom = tree.levels.back();
  require(leaf.width == tree.plan.depth, "extract_branch: leaf width must equal the depth");
  auto it = std::find(bottom.nodes.begin(), bottom.nodes.end(), leaf);
  require(it != bottom.nodes.end(), "extract_branch: leaf not in the tree");

  BranchExtract out;
  out.leaf_coord = static_cast<std::uint32_t>(it - bottom.nodes.begin());
  out.prefix = bottom.cond.hist;
  const Support& u = bottom.cond.hist.u;
  out.kappas.reserve(u.size());
  for (std::uint32_t alpha : u) out.kappas.push_back(kappa_of(tree.plan.ladder, out.prefix, alpha));

  CertWriter cw;
  cw.kv("op", "extract_branch");
  cw.kv("leaf", bits_str(leaf));
  cw.kv("coord", out.leaf_coord);
  cw.kv("prefix", key_str(history_key(*tree.plan.ladder, out.prefix)));
  for (const auto& k : out.kappas) cw.kv("kappa", hex64(kappa_hash(k)));
  out.certificate = cw.str();
  return out;
}

}  // namespace creatures
