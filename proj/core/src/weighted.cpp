#include "creatures/weighted.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "creatures/serialize.hpp"

namespace creatures {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool dyadic_flavor(Flavor f) { return f == Flavor::vpos || f == Flavor::xpos; }
bool zero_allowed(Flavor f) { return f == Flavor::ypos || f == Flavor::xpos; }

double log2_int(const Int& v) { return log_of(v) / M_LN2; }
double log2_rat(const Rat& v) { return log_of(v) / M_LN2; }

// Exact-threshold guard: the fallback materializes k^(3^k - 1), which is
// only sane while 3^k stays modest.
constexpr unsigned long kExactExpCap = 1ul << 26;

Int three_pow(unsigned e) { return int_pow(3, e); }

// Sign of |pos| * den(m) - num(m) * k^(3^e - 1): float prescreen with a
// wide band, exact fallback when the band is too tight.
int pos_threshold_sign(const Int& p, const Rat& m, unsigned k, unsigned e, const char* what) {
  double lhs = log2_int(p);
  double rhs = log2_rat(m) + (std::pow(3.0, double(e)) - 1.0) * std::log2(double(k));
  if (!std::isfinite(rhs)) return -1;  // astronomically large threshold
  if (std::abs(lhs - rhs) > 0.5) return lhs > rhs ? 1 : -1;
  Int t3 = three_pow(e) - 1;
  if (!t3.fits_ulong_p() || t3.get_ui() > kExactExpCap)
    throw std::length_error(std::string(what) + ": exact threshold out of reach");
  Int thr = int_pow(k, t3.get_ui());
  return cmp(p * m.get_den(), m.get_num() * thr);
}

}  // namespace

const char* flavor_name(Flavor f) {
  switch (f) {
    case Flavor::wpos: return "wpos";
    case Flavor::vpos: return "vpos";
    case Flavor::ypos: return "ypos";
    case Flavor::xpos: return "xpos";
  }
  return "?";
}

Flavor flavor_parse(const std::string& s) {
  if (s == "wpos") return Flavor::wpos;
  if (s == "vpos") return Flavor::vpos;
  if (s == "ypos") return Flavor::ypos;
  if (s == "xpos") return Flavor::xpos;
  throw std::invalid_argument("flavor_parse: unknown flavor " + s);
}

WeightedPos make_weighted(LadderRef ladder, Support u, unsigned level, Flavor flavor,
                          std::map<Int, Rat> weights) {
  require(ladder != nullptr, "make_weighted: null ladder");
  WeightedPos f;
  f.ladder = std::move(ladder);
  f.level = level;
  f.u = std::move(u);
  f.flavor = flavor;
  for (auto it = weights.begin(); it != weights.end();) {
    if (it->second == 0)
      it = weights.erase(it);
    else
      ++it;
  }
  f.weights = std::move(weights);
  validate_weighted(f);
  return f;
}

void validate_weighted(const WeightedPos& f) {
  require(f.ladder != nullptr, "WeightedPos: null ladder");
  require(f.level < f.ladder->levels(), "WeightedPos: level out of range");
  validate_support(f.u);
  require(!f.u.empty(), "WeightedPos: empty support");
  Int p = pos_size(f);
  unsigned grid = f.ladder->width(f.level);
  for (const auto& [rank, w] : f.weights) {
    require(rank >= 0 && rank < p, "WeightedPos: rank outside the space");
    require(w > 0 && w <= 1, "WeightedPos: weight outside (0,1]");
    if (dyadic_flavor(f.flavor))
      require(on_dyadic_grid(w, grid), "WeightedPos: weight off the dyadic grid");
  }
  if (!zero_allowed(f.flavor)) require(!f.weights.empty(), "WeightedPos: flavor forbids zero");
}

Int pos_size(const WeightedPos& f) { return pos_count(*f.ladder, f.u, f.level); }

Rat mass(const WeightedPos& f) {
  Rat total = 0;
  for (const auto& [rank, w] : f.weights) total += w;
  return total;
}

Rat density(const WeightedPos& f) { return mass(f) / Rat(pos_size(f)); }

std::vector<Int> set_of(const WeightedPos& f) {
  std::vector<Int> out;
  out.reserve(f.weights.size());
  for (const auto& [rank, w] : f.weights) out.push_back(rank);
  return out;
}

std::uint64_t weighted_hash(const WeightedPos& f) {
  CertWriter w;
  w.kv("ladder", f.ladder->spec_string());
  w.kv("level", f.level);
  w.kv("u", support_str(f.u));
  w.kv("flavor", flavor_name(f.flavor));
  w.open("weights");
  for (const auto& [rank, v] : f.weights) w.kv(rank.get_str(), v);
  w.close();
  return w.content_hash();
}

namespace {

void require_same_space(const WeightedPos& a, const WeightedPos& b, const char* what) {
  require(a.level == b.level && a.u == b.u, what);
  require(a.ladder->spec_string() == b.ladder->spec_string(), what);
}

}  // namespace

bool weights_leq(const WeightedPos& lo, const WeightedPos& hi) {
  require_same_space(lo, hi, "weights_leq: space mismatch");
  for (const auto& [rank, w] : lo.weights) {
    auto it = hi.weights.find(rank);
    if (it == hi.weights.end() || w > it->second) return false;
  }
  return true;
}

WeightedPos add_weighted(const WeightedPos& a, const WeightedPos& b) {
  require_same_space(a, b, "add_weighted: space mismatch");
  std::map<Int, Rat> sum = a.weights;
  for (const auto& [rank, w] : b.weights) sum[rank] += w;
  Flavor flavor = sum.empty() ? Flavor::ypos
                  : dyadic_flavor(a.flavor) && dyadic_flavor(b.flavor) ? Flavor::vpos
                                                                       : Flavor::wpos;
  return make_weighted(a.ladder, a.u, a.level, flavor, std::move(sum));
}

WeightedPos uniform_weighted(LadderRef ladder, Support u, unsigned level) {
  require(ladder != nullptr, "uniform_weighted: null ladder");
  Int p = pos_count(*ladder, u, level);
  check_enum_cap(*ladder, p, "uniform_weighted");
  std::map<Int, Rat> w;
  for (Int r = 0; r < p; ++r) w.emplace(r, 1);
  return make_weighted(std::move(ladder), std::move(u), level, Flavor::vpos, std::move(w));
}

WeightedPos indicator_weighted(LadderRef ladder, Support u, unsigned level,
                               const std::vector<Int>& ranks) {
  std::map<Int, Rat> w;
  for (const auto& r : ranks) w.emplace(r, 1);
  Flavor flavor = w.empty() ? Flavor::xpos : Flavor::vpos;
  return make_weighted(std::move(ladder), std::move(u), level, flavor, std::move(w));
}

Nor0 nor0(const WeightedPos& f) {
  Rat m = mass(f);
  require(m > 0, "nor0: zero function");
  Int p = pos_size(f);
  unsigned k = f.ladder->norm_base(f.level);
  Nor0 out;
  out.exact_zero = pos_threshold_sign(p, m, k, k, "nor0") >= 0;
  if (out.exact_zero) {
    out.value = 0.0;
    return out;
  }
  // k - log3(log_k(k |pos| / mass)), evaluated through natural logs.
  double inner = (std::log(double(k)) + log_of(p) - log_of(m)) / std::log(double(k));
  double value = double(k) - std::log(inner) / std::log(3.0);
  out.value = std::max(value, 0.0);
  return out;
}

bool nor0_at_least(const WeightedPos& f, unsigned r) {
  if (r == 0) return true;
  Rat m = mass(f);
  require(m > 0, "nor0_at_least: zero function");
  unsigned k = f.ladder->norm_base(f.level);
  if (r > k) return false;  // weights <= 1 keep nor0 <= k, with equality only at density 1
  // nor0 >= r  iff  k |pos| / mass <= k^(3^(k-r))  iff  |pos| den <= num k^(3^(k-r) - 1).
  return pos_threshold_sign(pos_size(f), m, k, k - r, "nor0_at_least") <= 0;
}

bool nor0_at_least_rat(const WeightedPos& f, const Rat& m) {
  if (m <= 0) return true;
  if (m.get_den() == 1 && m.get_num().fits_ulong_p())
    return nor0_at_least(f, static_cast<unsigned>(m.get_num().get_ui()));
  Nor0 n = nor0(f);
  if (n.exact_zero) return false;
  return n.value >= m.get_d() - 1e-9;
}

bool nor_drop_leq(const WeightedPos& fnew, const WeightedPos& fold, unsigned delta) {
  require_same_space(fnew, fold, "nor_drop_leq: space mismatch");
  Rat mn = mass(fnew), mo = mass(fold);
  require(mn > 0 && mo > 0, "nor_drop_leq: zero function");
  require(!nor0(fold).exact_zero, "nor_drop_leq: reference norm is zero");
  Int p = pos_size(fold);
  return nor_drop_leq_general(fold.ladder->norm_base(fold.level), p, mn, p, mo, delta);
}

bool nor_drop_leq_general(unsigned k, const Int& p_new, const Rat& mass_new, const Int& p_old,
                          const Rat& mass_old, unsigned delta) {
  require(mass_old > 0, "nor_drop_leq_general: zero reference mass");
  if (mass_new == 0) return false;
  Int e3 = three_pow(delta);
  require(e3.fits_ulong_p(), "nor_drop_leq_general: delta too large");
  Rat base = Rat(Int(k) * p_old) / mass_old;
  // Keep the exact power from exploding: bits(base) * 3^delta stays bounded.
  unsigned long bits = mpz_sizeinbase(base.get_num().get_mpz_t(), 2) +
                       mpz_sizeinbase(base.get_den().get_mpz_t(), 2);
  if (Int(bits) * e3 > Int(1) << 27)
    throw std::length_error("nor_drop_leq_general: exact power out of reach");
  Rat lhs = Rat(Int(k) * p_new) / mass_new;
  return lhs <= rat_pow(base, e3.get_ui());
}

double nor1(const Creature& c) {
  Nor0 n = nor0(c.F);
  return n.value - c.m.get_d();
}

double nor2(const Creature& c) {
  double n1 = nor1(c);
  if (n1 < 1.0) return 0.0;
  return std::log(n1) / std::log(double(c.F.ladder->log_base(c.F.level)));
}

bool in_cr(const Creature& c) {
  return c.F.flavor == Flavor::vpos && !c.F.weights.empty() && c.m >= 0 &&
         nor0_at_least_rat(c.F, c.m);
}

bool in_underline_cr(const Creature& c) {
  // The dyadic class sits inside the rational one, so vpos qualifies too.
  return (c.F.flavor == Flavor::wpos || c.F.flavor == Flavor::vpos) && !c.F.weights.empty() &&
         c.m >= 0 && nor0_at_least_rat(c.F, c.m);
}

WeightedPos round_dyadic(const WeightedPos& f) {
  unsigned grid = f.ladder->width(f.level);
  std::map<Int, Rat> w;
  for (const auto& [rank, v] : f.weights) {
    Rat r = floor_to_dyadic(v, grid);
    if (r > 0) w.emplace(rank, r);
  }
  Flavor flavor = w.empty() ? Flavor::xpos : Flavor::vpos;
  return make_weighted(f.ladder, f.u, f.level, flavor, std::move(w));
}

Creature densify(const Creature& c) {
  require(nor1(c) > 1.0, "densify: nor1 must exceed 1");
  return Creature{round_dyadic(c.F), c.m};
}

WeightedPos restrict_weighted(const WeightedPos& f, const Support& w) {
  if (w == f.u) return f;
  require(!w.empty(), "restrict_weighted: empty target support");
  require(support_subset(w, f.u), "restrict_weighted: target not inside the support");
  Support rest = support_diff(f.u, w);
  Int denom = pos_count(*f.ladder, rest, f.level);
  std::map<Int, Rat> acc;
  for (const auto& [rank, v] : f.weights) {
    PosFunc e = pos_unrank(*f.ladder, f.u, f.level, rank);
    acc[pos_rank(*f.ladder, pos_restrict(*f.ladder, e, w))] += v;
  }
  for (auto& [rank, v] : acc) v /= Rat(denom);
  // Averaging leaves the dyadic grid in general, hence the rational flavors.
  Flavor flavor = acc.empty() || zero_allowed(f.flavor) ? Flavor::ypos : Flavor::wpos;
  return make_weighted(f.ladder, w, f.level, flavor, std::move(acc));
}

WeightedPos extend_restriction(const WeightedPos& f1, const WeightedPos& f2) {
  require(f1.level == f2.level, "extend_restriction: level mismatch");
  require(support_subset(f2.u, f1.u) && f2.u != f1.u,
          "extend_restriction: the restricted support must be a proper subset");
  WeightedPos base = restrict_weighted(f1, f2.u);
  require(weights_leq(f2, base), "extend_restriction: domination violated");
  std::map<Int, Rat> w;
  for (const auto& [rank, v] : f1.weights) {
    PosFunc e = pos_unrank(*f1.ladder, f1.u, f1.level, rank);
    Int down = pos_rank(*f1.ladder, pos_restrict(*f1.ladder, e, f2.u));
    auto target = f2.weights.find(down);
    if (target == f2.weights.end()) continue;
    const Rat& d = base.weights.at(down);  // positive: it dominates f2 here
    Rat out = v * target->second / d;
    if (out > 0) w.emplace(rank, out);
  }
  Flavor flavor = w.empty() ? Flavor::ypos : Flavor::wpos;
  return make_weighted(f1.ladder, f1.u, f1.level, flavor, std::move(w));
}

WeightedPos product(const WeightedPos& f1, const WeightedPos& f2) {
  require(f1.level == f2.level, "product: level mismatch");
  require(f1.ladder->spec_string() == f2.ladder->spec_string(), "product: ladder mismatch");
  Support u0 = support_intersect(f1.u, f2.u);
  Support u3 = support_union(f1.u, f2.u);
  const Ladder& ladder = *f1.ladder;
  // Group each side by its restriction to the common support, then merge
  // only agreeing pairs.
  std::map<Int, std::vector<std::pair<Int, Rat>>> left, right;
  for (const auto& [rank, v] : f1.weights) {
    PosFunc e = pos_unrank(ladder, f1.u, f1.level, rank);
    Int key = u0.empty() ? Int(0) : pos_rank(ladder, pos_restrict(ladder, e, u0));
    left[key].emplace_back(rank, v);
  }
  for (const auto& [rank, v] : f2.weights) {
    PosFunc e = pos_unrank(ladder, f2.u, f2.level, rank);
    Int key = u0.empty() ? Int(0) : pos_rank(ladder, pos_restrict(ladder, e, u0));
    right[key].emplace_back(rank, v);
  }
  Int pairs = 0;
  for (const auto& [key, ls] : left) {
    auto it = right.find(key);
    if (it != right.end())
      pairs += Int(static_cast<unsigned long>(ls.size())) *
               Int(static_cast<unsigned long>(it->second.size()));
  }
  check_enum_cap(ladder, pairs, "product");
  std::map<Int, Rat> w;
  for (const auto& [key, ls] : left) {
    auto it = right.find(key);
    if (it == right.end()) continue;
    for (const auto& [r1, v1] : ls) {
      PosFunc e1 = pos_unrank(ladder, f1.u, f1.level, r1);
      for (const auto& [r2, v2] : it->second) {
        PosFunc e2 = pos_unrank(ladder, f2.u, f2.level, r2);
        PosFunc merged = pos_merge(ladder, e1, e2);
        w.emplace(pos_rank(ladder, merged), v1 * v2);
      }
    }
  }
  Flavor flavor = w.empty() ? Flavor::ypos : Flavor::wpos;
  return make_weighted(f1.ladder, u3, f1.level, flavor, std::move(w));
}

bool is_balanced(const WeightedPos& f1, const WeightedPos& f2) {
  if (f1.level != f2.level) return false;
  if (f1.ladder->spec_string() != f2.ladder->spec_string()) return false;
  if (density(f1) != density(f2)) return false;
  Support u0 = support_intersect(f1.u, f2.u);
  if (u0.empty()) return true;
  return restrict_weighted(f1, u0).weights == restrict_weighted(f2, u0).weights;
}

bool is_strongly_balanced(const WeightedPos& f1, const WeightedPos& f2) {
  if (!is_balanced(f1, f2)) return false;
  Support d1 = support_diff(f1.u, f2.u);
  Support d2 = support_diff(f2.u, f1.u);
  return !d1.empty() && d1.size() == d2.size();
}

namespace {

// Cylinder lift over fresh coordinates: every possibility on the enlarged
// support inherits the weight of its restriction.
WeightedPos cylinder_pad(const WeightedPos& f, const Support& fresh) {
  if (fresh.empty()) return f;
  const Ladder& ladder = *f.ladder;
  Int block = pos_count(ladder, fresh, f.level);
  check_enum_cap(ladder, block * Int(static_cast<unsigned long>(f.weights.size())),
                 "pad_to_strong");
  Support bigger = support_union(f.u, fresh);
  std::map<Int, Rat> w;
  for (const auto& [rank, v] : f.weights) {
    PosFunc e = pos_unrank(ladder, f.u, f.level, rank);
    for (Int r = 0; r < block; ++r) {
      PosFunc filler = pos_unrank(ladder, fresh, f.level, r);
      w.emplace(pos_rank(ladder, pos_merge(ladder, e, filler)), v);
    }
  }
  return make_weighted(f.ladder, bigger, f.level, f.flavor, std::move(w));
}

}  // namespace

std::pair<WeightedPos, WeightedPos> pad_to_strong(const WeightedPos& f1, const WeightedPos& f2) {
  require(is_balanced(f1, f2), "pad_to_strong: pair is not balanced");
  if (is_strongly_balanced(f1, f2)) return {f1, f2};
  std::size_t d1 = support_diff(f1.u, f2.u).size();
  std::size_t d2 = support_diff(f2.u, f1.u).size();
  std::uint32_t next = 0;
  for (auto a : f1.u) next = std::max(next, a + 1);
  for (auto a : f2.u) next = std::max(next, a + 1);
  Support fresh1, fresh2;
  if (d1 == d2) {
    // Equal supports: one fresh coordinate on each side.
    fresh1.push_back(next);
    fresh2.push_back(next + 1);
  } else if (d1 < d2) {
    for (std::size_t j = 0; j < d2 - d1; ++j) fresh1.push_back(next + static_cast<std::uint32_t>(j));
  } else {
    for (std::size_t j = 0; j < d1 - d2; ++j) fresh2.push_back(next + static_cast<std::uint32_t>(j));
  }
  return {cylinder_pad(f1, fresh1), cylinder_pad(f2, fresh2)};
}

ProductBound balanced_product_bound(const WeightedPos& f1, const WeightedPos& f2) {
  require(is_balanced(f1, f2), "balanced_product_bound: pair is not balanced");
  ProductBound out;
  out.a = density(f1);
  require(out.a > 0, "balanced_product_bound: zero density");
  out.lhs = density(product(f1, f2));
  out.verdict = out.lhs >= rat_pow(out.a, 3) / 8;
  return out;
}

bool sigma_member(const Creature& d, const Creature& c) {
  if (d.F.level != c.F.level || d.F.u != c.F.u) return false;
  return weights_leq(d.F, c.F) && d.m >= c.m;
}

std::size_t bigness_select(const Creature& c, const std::vector<WeightedPos>& parts) {
  require(!parts.empty(), "bigness_select: no parts");
  require(parts.size() <= c.F.ladder->norm_base(c.F.level), "bigness_select: too many parts");
  require(nor1(c) >= 1.0 - 1e-9, "bigness_select: nor1 below 1");
  std::map<Int, Rat> sum;
  for (const auto& part : parts) {
    require(part.level == c.F.level && part.u == c.F.u, "bigness_select: space mismatch");
    for (const auto& [rank, v] : part.weights) sum[rank] += v;
  }
  require(sum == c.F.weights, "bigness_select: parts do not sum to the creature");
  std::size_t best = 0;
  Rat best_mass = mass(parts[0]);
  for (std::size_t j = 1; j < parts.size(); ++j) {
    Rat mj = mass(parts[j]);
    if (mj > best_mass) {
      best = j;
      best_mass = mj;
    }
  }
  return best;
}

Creature halve(const Creature& c, HalveInfo* info) {
  Nor0 n = nor0(c.F);
  double mid = (n.value + c.m.get_d()) / 2.0;
  // Round upward onto the 2^-32 grid; the halving guarantee survives a
  // larger debt.
  double scaled = std::ceil(mid * 4294967296.0);
  require(scaled < 9.007199254740992e15, "halve: midpoint out of range");
  Rat rounded(Int(scaled), Int(1) << 32);
  rounded.canonicalize();
  if (rounded < 0) rounded = 0;
  if (info) {
    info->midpoint = mid;
    info->rounded = rounded;
  }
  return Creature{c.F, rounded};
}

Creature unhalve(const Creature& dprime, const Creature& c) {
  require(sigma_member(dprime, halve(c)), "unhalve: input does not refine the halving");
  require(nor1(dprime) >= 1.0 - 1e-9, "unhalve: nor1 below 1");
  return Creature{dprime.F, c.m};
}

}  // namespace creatures
