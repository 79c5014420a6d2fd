#include "creatures/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace creatures {

namespace {

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument("io: " + what); }

struct Line {
  std::size_t depth = 0;
  std::string key, value;
  bool block = false;
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> out;
  std::istringstream in(text);
  std::string raw;
  while (std::getline(in, raw)) {
    std::size_t spaces = 0;
    while (spaces < raw.size() && raw[spaces] == ' ') ++spaces;
    if (spaces == raw.size()) continue;
    if (spaces % 2) bad("odd indentation");
    std::string body = raw.substr(spaces);
    Line ln;
    ln.depth = spaces / 2;
    auto sep = body.find(": ");
    if (sep != std::string::npos) {
      ln.key = body.substr(0, sep);
      ln.value = body.substr(sep + 2);
    } else if (body.back() == ':') {
      ln.key = body.substr(0, body.size() - 1);
      ln.block = true;
    } else {
      bad("line is neither 'key: value' nor a block opener: '" + body + "'");
    }
    if (ln.key.empty()) bad("empty key");
    out.push_back(std::move(ln));
  }
  return out;
}

std::vector<TextNode> parse_children(const std::vector<Line>& lines, std::size_t& pos,
                                     std::size_t depth) {
  std::vector<TextNode> out;
  while (pos < lines.size() && lines[pos].depth == depth) {
    const Line& ln = lines[pos++];
    TextNode n;
    n.key = ln.key;
    n.value = ln.value;
    if (ln.block) n.children = parse_children(lines, pos, depth + 1);
    if (pos < lines.size() && lines[pos].depth > depth) bad("indentation under a scalar line");
    out.push_back(std::move(n));
  }
  return out;
}

std::string join_u32(const std::vector<std::uint32_t>& xs) {
  if (xs.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(xs[i]);
  }
  return s;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& s) {
  std::vector<std::uint32_t> out;
  if (s == "-") return out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::uint64_t v = parse_u64(tok);
    if (v > std::numeric_limits<std::uint32_t>::max()) bad("list entry out of range: " + tok);
    out.push_back(static_cast<std::uint32_t>(v));
  }
  if (out.empty()) bad("empty list: '" + s + "'");
  return out;
}

std::string perms_str(const std::vector<LevelPerm>& ps) {
  if (ps.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ';';
    s += perm_str(ps[i]);
  }
  return s;
}

std::vector<LevelPerm> parse_perms(const std::string& s) {
  std::vector<LevelPerm> out;
  if (s == "-") return out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ';')) out.push_back(parse_perm(tok));
  return out;
}

PermPair parse_pair(const std::string& s) {
  auto bar = s.find('|');
  if (bar == std::string::npos) bad("permutation pair without separator: '" + s + "'");
  return {parse_perm(s.substr(0, bar)), parse_perm(s.substr(bar + 1))};
}

std::string pair_str(const PermPair& pr) {
  return perm_str(pr.first) + "|" + perm_str(pr.second);
}

LadderRef ladder_of_block(LadderRef outer, const TextNode& node, const char* what) {
  const TextNode* spec = node.find("ladder");
  if (spec == nullptr) {
    if (outer == nullptr) bad(std::string(what) + " block without a ladder");
    return outer;
  }
  Ladder parsed = Ladder::parse(spec->value);
  if (outer != nullptr) {
    if (!(*outer == parsed)) bad(std::string(what) + " block ladder mismatch");
    return outer;
  }
  return std::make_shared<const Ladder>(std::move(parsed));
}

void expect_header(const TextNode& root, const char* kind) {
  if (root.field("format") != kFormatVersion) bad("unsupported format '" + root.field("format") + "'");
  if (root.field("kind") != kind) bad("expected a " + std::string(kind) + " file, found '" + root.field("kind") + "'");
}

void write_condition_fields(CertWriter& cw, const Condition& p) {
  cw.kv("ladder", p.ladder->spec_string());
  cw.kv("u", support_str(p.hist.u));
  cw.kv("base", p.base_level());
  cw.kv("horizon", p.horizon);
  cw.open("history");
  write_history(cw, p.hist);
  cw.close();
  for (const auto& c : p.creatures) {
    cw.open("creature");
    cw.kv("level", c.F.level);
    write_creature(cw, c);
    cw.close();
  }
}

Condition read_condition_fields(const TextNode& node) {
  LadderRef lad = ladder_of_block(nullptr, node, "condition");
  Support u = parse_support(node.field("u"));
  unsigned base = parse_unsigned(node.field("base"));
  unsigned horizon = parse_unsigned(node.field("horizon"));
  HistorySeq hist = read_history(lad, node.at("history"));
  if (hist.u != u) bad("condition support disagrees with its history");
  if (hist.length() != base) bad("condition base disagrees with its history");
  std::vector<Creature> creatures;
  for (const TextNode* cn : node.all("creature")) {
    Creature c = read_creature(lad, *cn);
    if (c.F.level != parse_unsigned(cn->field("level"))) bad("creature level field mismatch");
    creatures.push_back(std::move(c));
  }
  return make_condition(lad, std::move(hist), std::move(creatures), horizon);
}

void write_oracle_spec(CertWriter& cw, const OracleSpec& o) {
  cw.open("oracle");
  cw.kv("level", o.level);
  cw.kv("id", o.id);
  cw.kv("width", o.width);
  cw.close();
}

OracleSpec read_oracle_spec(const TextNode& node) {
  OracleSpec o;
  o.level = parse_unsigned(node.field("level"));
  o.id = node.field("id");
  o.width = parse_unsigned(node.field("width"));
  return o;
}

void write_name_spec(CertWriter& cw, const FusionNameSpec& n) {
  cw.open("name");
  cw.kv("tree_level", n.tree_level);
  cw.kv("rule1", n.rule1);
  cw.kv("rule2", n.rule2);
  cw.kv("activation", n.activation);
  cw.close();
}

FusionNameSpec read_name_spec(const TextNode& node) {
  FusionNameSpec n;
  n.tree_level = parse_unsigned(node.field("tree_level"));
  n.rule1 = node.field("rule1");
  n.rule2 = node.field("rule2");
  n.activation = parse_unsigned(node.field("activation"));
  return n;
}

std::string join_nodes(const std::vector<BitString>& nodes) {
  if (nodes.empty()) return "-";
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += ';';
    s += bits_str(nodes[i]);
  }
  return s;
}

std::vector<BitString> parse_nodes(const std::string& s) {
  std::vector<BitString> out;
  if (s == "-") return out;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ';')) out.push_back(parse_bits(tok));
  return out;
}

}  // namespace

const TextNode* TextNode::find(const std::string& k) const {
  for (const auto& c : children)
    if (c.key == k) return &c;
  return nullptr;
}

const TextNode& TextNode::at(const std::string& k) const {
  const TextNode* n = find(k);
  if (n == nullptr) bad("missing field '" + k + "' under '" + (key.empty() ? "<root>" : key) + "'");
  return *n;
}

std::vector<const TextNode*> TextNode::all(const std::string& k) const {
  std::vector<const TextNode*> out;
  for (const auto& c : children)
    if (c.key == k) out.push_back(&c);
  return out;
}

const std::string& TextNode::field(const std::string& k) const { return at(k).value; }

TextNode parse_text(const std::string& text) {
  std::vector<Line> lines = split_lines(text);
  std::size_t pos = 0;
  TextNode root;
  root.children = parse_children(lines, pos, 0);
  if (pos != lines.size()) bad("top-level indentation is malformed");
  return root;
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty()) bad("empty number");
  for (char c : s)
    if (c < '0' || c > '9') bad("not a number: '" + s + "'");
  errno = 0;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) bad("number out of range: '" + s + "'");
  return v;
}

unsigned parse_unsigned(const std::string& s) {
  std::uint64_t v = parse_u64(s);
  if (v > std::numeric_limits<unsigned>::max()) bad("number out of range: '" + s + "'");
  return static_cast<unsigned>(v);
}

BitString parse_bits(const std::string& s) {
  if (s.size() < 4 || s.front() != '(' || s.back() != ')') bad("bad bit string '" + s + "'");
  std::string body = s.substr(1, s.size() - 2);
  auto comma = body.find(',');
  if (comma == std::string::npos) bad("bad bit string '" + s + "'");
  unsigned w = parse_unsigned(body.substr(0, comma));
  std::string digits = body.substr(comma + 1);
  if (w == 0) {
    if (digits != "-") bad("bad empty bit string '" + s + "'");
    return make_bits(0, 0);
  }
  if (w > 63 || digits.size() != w) bad("bit string width mismatch '" + s + "'");
  std::uint64_t v = 0;
  for (unsigned j = 0; j < w; ++j) {
    if (digits[j] == '1')
      v |= std::uint64_t(1) << (w - 1 - j);
    else if (digits[j] != '0')
      bad("bad bit string digit '" + s + "'");
  }
  return make_bits(w, v);
}

Support parse_support(const std::string& s) {
  if (s.size() < 2 || s.front() != '{' || s.back() != '}') bad("bad support '" + s + "'");
  Support u;
  std::string body = s.substr(1, s.size() - 2);
  if (body.empty()) return u;
  for (std::uint32_t v : parse_u32_list(body)) {
    if (!u.empty() && v <= u.back()) bad("support not strictly increasing: '" + s + "'");
    u.push_back(v);
  }
  return u;
}

HistoryKey parse_key(const std::string& s) {
  if (s.size() < 2 || s.front() != '[' || s.back() != ']') bad("bad history key '" + s + "'");
  HistoryKey key;
  std::string body = s.substr(1, s.size() - 2);
  if (body.empty()) return key;
  std::istringstream in(body);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) bad("empty rank in history key '" + s + "'");
    key.emplace_back(tok);
  }
  return key;
}

std::string perm_str(const LevelPerm& p) { return join_u32(p.img); }

LevelPerm parse_perm(const std::string& s) {
  LevelPerm p;
  p.img = parse_u32_list(s);
  unsigned w = 0;
  while ((std::size_t(1) << w) < p.img.size()) ++w;
  if ((std::size_t(1) << w) != p.img.size()) bad("permutation image size is not a power of two");
  p.width = w;
  if (!p.is_valid()) bad("image array is not a permutation: '" + s + "'");
  return p;
}

void write_weighted(CertWriter& cw, const WeightedPos& f) {
  cw.kv("ladder", f.ladder->spec_string());
  cw.kv("level", f.level);
  cw.kv("u", support_str(f.u));
  cw.kv("flavor", flavor_name(f.flavor));
  cw.kv("entries", f.weights.size());
  for (const auto& [rank, weight] : f.weights) {
    cw.open("entry");
    cw.kv("rank", rank);
    PosFunc h = pos_unrank(*f.ladder, f.u, f.level, rank);
    cw.open("pos");
    for (const auto& pr : h.vals) cw.kv("val", pair_str(pr));
    cw.close();
    cw.kv("weight", weight);
    cw.close();
  }
}

WeightedPos read_weighted(LadderRef ladder, const TextNode& node) {
  LadderRef lad = ladder_of_block(ladder, node, "weighted");
  unsigned level = parse_unsigned(node.field("level"));
  Support u = parse_support(node.field("u"));
  Flavor flavor = flavor_parse(node.field("flavor"));
  auto entries = node.all("entry");
  if (entries.size() != parse_u64(node.field("entries"))) bad("weighted entry count mismatch");
  std::map<Int, Rat> weights;
  for (const TextNode* e : entries) {
    Int rank(e->field("rank"));
    PosFunc h;
    h.level = level;
    h.u = u;
    for (const TextNode* v : e->at("pos").all("val")) h.vals.push_back(parse_pair(v->value));
    validate_pos(*lad, h);
    if (pos_rank(*lad, h) != rank) bad("entry rank does not match its possibility");
    if (!weights.emplace(rank, rat_parse(e->field("weight"))).second) bad("duplicate entry rank");
  }
  return make_weighted(lad, std::move(u), level, flavor, std::move(weights));
}

void write_creature(CertWriter& cw, const Creature& c) {
  cw.kv("m", c.m);
  cw.open("weighted");
  write_weighted(cw, c.F);
  cw.close();
}

Creature read_creature(LadderRef ladder, const TextNode& node) {
  Creature c;
  c.m = rat_parse(node.field("m"));
  c.F = read_weighted(ladder, node.at("weighted"));
  return c;
}

void write_history(CertWriter& cw, const HistorySeq& xs) {
  cw.kv("u", support_str(xs.u));
  cw.kv("length", xs.length());
  for (const auto& x : xs.entries) {
    cw.open("object");
    cw.kv("level", x.level);
    cw.kv("f", perms_str(x.f));
    cw.kv("g", perms_str(x.g));
    std::size_t slots = 0;
    for (const auto& t : x.e) slots += t.size();
    cw.kv("slots", slots);
    for (std::size_t i = 0; i < x.e.size(); ++i) {
      for (const auto& [key, pr] : x.e[i]) {
        cw.open("slot");
        cw.kv("coord", i);
        cw.kv("key", key);
        cw.kv("pair", pair_str(pr));
        cw.close();
      }
    }
    cw.close();
  }
}

HistorySeq read_history(LadderRef ladder, const TextNode& node) {
  if (ladder == nullptr) bad("history block needs a ladder");
  HistorySeq xs;
  xs.u = parse_support(node.field("u"));
  auto objects = node.all("object");
  if (objects.size() != parse_u64(node.field("length"))) bad("history length mismatch");
  for (const TextNode* on : objects) {
    CreatureObject x;
    x.level = parse_unsigned(on->field("level"));
    x.u = xs.u;
    x.f = parse_perms(on->field("f"));
    x.g = parse_perms(on->field("g"));
    x.e.resize(xs.u.size());
    auto slots = on->all("slot");
    if (slots.size() != parse_u64(on->field("slots"))) bad("object slot count mismatch");
    for (const TextNode* sn : slots) {
      std::size_t coord = parse_u64(sn->field("coord"));
      if (coord >= x.e.size()) bad("slot coordinate out of range");
      Int key(sn->field("key"));
      if (!x.e[coord].emplace(key, parse_pair(sn->field("pair"))).second)
        bad("duplicate extension slot");
    }
    xs.entries.push_back(std::move(x));
  }
  validate_history(*ladder, xs);
  return xs;
}

std::string condition_text(const Condition& p) {
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "condition");
  cw.kv("hash", hex64(condition_hash(p)));
  write_condition_fields(cw, p);
  return cw.str();
}

Condition read_condition(const std::string& text) {
  TextNode root = parse_text(text);
  expect_header(root, "condition");
  Condition p = read_condition_fields(root);
  if (root.field("hash") != hex64(condition_hash(p))) bad("condition hash mismatch");
  return p;
}

std::string condition_file_name(const Condition& p) {
  return "cond-" + hex64(condition_hash(p)) + ".txt";
}

std::string labeling_text(const BranchLabeling& h) {
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "labeling");
  cw.kv("ladder", h.ladder->spec_string());
  cw.kv("u", support_str(h.u));
  cw.kv("level", h.level);
  cw.kv("rows", h.table.size());
  for (const auto& [key, label] : h.table) {
    cw.open("row");
    cw.kv("key", key_str(key));
    cw.kv("label", bits_str(label));
    cw.close();
  }
  return cw.str();
}

BranchLabeling read_labeling(const std::string& text) {
  TextNode root = parse_text(text);
  expect_header(root, "labeling");
  LadderRef lad = ladder_of_block(nullptr, root, "labeling");
  Support u = parse_support(root.field("u"));
  unsigned level = parse_unsigned(root.field("level"));
  auto rows = root.all("row");
  if (rows.size() != parse_u64(root.field("rows"))) bad("labeling row count mismatch");
  std::map<HistoryKey, BitString> table;
  for (const TextNode* rn : rows) {
    HistoryKey key = parse_key(rn->field("key"));
    if (!table.emplace(std::move(key), parse_bits(rn->field("label"))).second)
      bad("duplicate labeling row");
  }
  return make_labeling(lad, std::move(u), level, std::move(table));
}

std::string plan_text(const FusionPlan& plan) {
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "fusion-plan");
  cw.kv("ladder", plan.ladder->spec_string());
  cw.kv("depth", plan.depth);
  cw.kv("splits", join_u32(plan.splits));
  cw.open("root");
  write_condition_fields(cw, plan.root);
  cw.close();
  for (const auto& o : plan.oracles) write_oracle_spec(cw, o);
  for (const auto& n : plan.names) write_name_spec(cw, n);
  return cw.str();
}

FusionPlan read_plan(const std::string& text) {
  TextNode root = parse_text(text);
  expect_header(root, "fusion-plan");
  FusionPlan plan;
  plan.depth = parse_unsigned(root.field("depth"));
  plan.splits = parse_u32_list(root.field("splits"));
  plan.root = read_condition_fields(root.at("root"));
  if (plan.root.ladder->spec_string() != root.field("ladder")) bad("plan root ladder mismatch");
  plan.ladder = plan.root.ladder;
  for (const TextNode* on : root.all("oracle")) plan.oracles.push_back(read_oracle_spec(*on));
  for (const TextNode* nn : root.all("name")) plan.names.push_back(read_name_spec(*nn));
  validate_plan(plan);
  return plan;
}

std::string tree_text(const FusionTree& tree) {
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "fusion-tree");
  cw.open("plan");
  cw.kv("ladder", tree.plan.ladder->spec_string());
  cw.kv("depth", tree.plan.depth);
  cw.kv("splits", join_u32(tree.plan.splits));
  cw.kv("root", hex64(condition_hash(tree.plan.root)));
  for (const auto& o : tree.plan.oracles) write_oracle_spec(cw, o);
  for (const auto& n : tree.plan.names) write_name_spec(cw, n);
  cw.close();
  for (const auto& lv : tree.levels) {
    cw.open("level");
    cw.kv("nodes", join_nodes(lv.nodes));
    cw.kv("split", lv.split);
    cw.kv("cond", hex64(condition_hash(lv.cond)));
    cw.close();
  }
  cw.kv("clause_extension", tree.clause_extension);
  cw.kv("oracles_applied", tree.oracles_applied);
  cw.kv("oracles_skipped", tree.oracles_skipped);
  for (const auto& s : tree.skipped) cw.kv("skip", s);
  cw.kv("name_runs", tree.name_runs.size());
  return cw.str();
}

FusionTree read_tree(const std::string& text,
                     const std::function<std::string(const std::string&)>& load) {
  if (!load) bad("tree reader needs a condition loader");
  TextNode root = parse_text(text);
  expect_header(root, "fusion-tree");
  const TextNode& pn = root.at("plan");
  FusionTree tree;
  tree.plan.depth = parse_unsigned(pn.field("depth"));
  tree.plan.splits = parse_u32_list(pn.field("splits"));
  for (const TextNode* on : pn.all("oracle")) tree.plan.oracles.push_back(read_oracle_spec(*on));
  for (const TextNode* nn : pn.all("name")) tree.plan.names.push_back(read_name_spec(*nn));
  auto fetch = [&](const std::string& hash) {
    Condition p = read_condition(load(hash));
    if (hex64(condition_hash(p)) != hash) bad("loaded condition hash mismatch for " + hash);
    return p;
  };
  tree.plan.root = fetch(pn.field("root"));
  if (tree.plan.root.ladder->spec_string() != pn.field("ladder")) bad("tree plan ladder mismatch");
  tree.plan.ladder = tree.plan.root.ladder;
  auto levels = root.all("level");
  if (levels.size() != std::size_t(tree.plan.depth) + 1) bad("tree dump level count mismatch");
  for (const TextNode* ln : levels) {
    FusionLevelRecord rec;
    rec.nodes = parse_nodes(ln->field("nodes"));
    rec.split = static_cast<std::uint32_t>(parse_u64(ln->field("split")));
    rec.cond = fetch(ln->field("cond"));
    tree.levels.push_back(std::move(rec));
  }
  tree.clause_extension = root.field("clause_extension") == "true";
  tree.oracles_applied = parse_u64(root.field("oracles_applied"));
  tree.oracles_skipped = parse_u64(root.field("oracles_skipped"));
  for (const TextNode* sn : root.all("skip")) tree.skipped.push_back(sn->value);
  return tree;
}

std::string a_kappa_text(const KappaSeq& kappa, std::uint64_t bound) {
  std::set<std::uint64_t> members = a_kappa(kappa, bound);
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "a-kappa");
  cw.kv("ladder", kappa.ladder->spec_string());
  cw.kv("kappa", hex64(kappa_hash(kappa)));
  cw.kv("length", kappa.length());
  cw.kv("bound", bound);
  cw.kv("size", members.size());
  for (std::uint64_t m : members) cw.kv("member", m);
  return cw.str();
}

std::string branch_text(const Branch& b) {
  CertWriter cw;
  cw.kv("format", kFormatVersion);
  cw.kv("kind", "branch");
  cw.kv("ladder", b.kappa.ladder->spec_string());
  cw.kv("kappa", hex64(kappa_hash(b.kappa)));
  cw.kv("length", b.kappa.length());
  for (const auto& p : b.kappa.perms) cw.kv("perm", perm_str(p));
  cw.kv("nodes", b.nodes.size());
  for (std::size_t j = 0; j < b.nodes.size(); ++j) {
    cw.open("node");
    cw.kv("level", j);
    cw.kv("code", code_node(*b.kappa.ladder, b.nodes[j]));
    cw.close();
  }
  return cw.str();
}

Branch read_branch(const std::string& text) {
  TextNode root = parse_text(text);
  expect_header(root, "branch");
  LadderRef lad = ladder_of_block(nullptr, root, "branch");
  std::vector<LevelPerm> perms;
  for (const TextNode* pn : root.all("perm")) perms.push_back(parse_perm(pn->value));
  if (perms.size() != parse_u64(root.field("length"))) bad("branch permutation count mismatch");
  Branch b;
  b.kappa = make_kappa(lad, std::move(perms));
  if (root.field("kappa") != hex64(kappa_hash(b.kappa))) bad("branch kappa hash mismatch");
  auto nodes = root.all("node");
  if (nodes.size() != parse_u64(root.field("nodes"))) bad("branch node count mismatch");
  for (const TextNode* nn : nodes) {
    BitString rho = decode_node(*lad, parse_u64(nn->field("code")));
    if (parse_u64(nn->field("level")) != b.nodes.size()) bad("branch node levels out of order");
    b.nodes.push_back(rho);
  }
  validate_branch(b);
  return b;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("io: cannot open '" + tmp + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("io: short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("io: cannot move '" + tmp + "' into place");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("io: cannot open '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace creatures
