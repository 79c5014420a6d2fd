#include "creatures/suites.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "creatures/bits.hpp"
#include "creatures/coding.hpp"
#include "creatures/conditions.hpp"
#include "creatures/disjoint.hpp"
#include "creatures/fusion.hpp"
#include "creatures/io.hpp"
#include "creatures/labeling.hpp"
#include "creatures/ladder.hpp"
#include "creatures/objects.hpp"
#include "creatures/perm.hpp"
#include "creatures/rational.hpp"
#include "creatures/serialize.hpp"
#include "creatures/support.hpp"
#include "creatures/weighted.hpp"

namespace creatures {

namespace {

Rat ratio(const Int& num, const Int& den) {
  Rat r(num, den);
  r.canonicalize();
  return r;
}

Rat dyadic(std::uint64_t num, unsigned bits) {
  Int den = Int(1) << bits;
  return ratio(Int(num), den);
}

// Closed-form float norm, recomputed independently of the engine.
double norm_float(unsigned k, double pos, double m) {
  double inner = std::log(double(k) * pos / m) / std::log(double(k));
  return double(k) - std::log(inner) / std::log(3.0);
}

// Collects clauses and the certificate in lock step. The suite verdict is
// the conjunction of the asserted clauses; reported clauses only document.
struct SuiteBuilder {
  SuiteResult res;
  CertWriter cw;
  std::uint64_t instances = 0;

  SuiteBuilder(std::string name, std::uint64_t seed, std::uint64_t cap) {
    res.name = std::move(name);
    cw.kv("format", kFormatVersion);
    cw.kv("kind", "suite-certificate");
    cw.kv("suite", res.name);
    cw.kv("seed", seed);
    cw.kv("cap", cap);
  }

  void check(std::string clause, bool passed, bool asserted, std::string detail = "") {
    cw.open("check");
    cw.kv("clause", clause);
    cw.kv("asserted", asserted);
    cw.kv("passed", passed);
    if (!detail.empty()) cw.kv("detail", detail);
    cw.close();
    res.checks.push_back(SuiteCheck{std::move(clause), asserted, passed, std::move(detail)});
  }

  SuiteResult finish() {
    res.passed = true;
    for (const SuiteCheck& c : res.checks)
      if (c.asserted && !c.passed) res.passed = false;
    res.instances = instances;
    cw.kv("instances", instances);
    cw.kv("passed", res.passed);
    res.certificate = cw.str();
    return std::move(res);
  }
};

LadderRef two_level(std::uint64_t cap) { return make_ladder({0, 1}, {3, 3}, {2, 2}, cap); }
LadderRef three_level(std::uint64_t cap) {
  return make_ladder({0, 1, 2}, {3, 3, 3}, {2, 2, 2}, cap);
}
LadderRef wide_step(std::uint64_t cap) { return make_ladder({0, 8}, {2, 2}, {2, 2}, cap); }
LadderRef mixed_three(std::uint64_t cap) {
  return make_ladder({0, 1, 2}, {2, 3, 3}, {2, 2, 2}, cap);
}

HistorySeq canonical_history(const Ladder& ladder, const Support& u, unsigned len) {
  HistorySeq xs = empty_history(u);
  for (unsigned j = 0; j < len; ++j) xs = suc_apply(ladder, xs, pos_unrank(ladder, u, j, Int(0)));
  return xs;
}

// Unit weights at the set bits of the mask.
WeightedPos mask_weighted(const LadderRef& ladder, Support u, unsigned level, std::uint64_t mask) {
  std::map<Int, Rat> w;
  for (unsigned j = 0; j < 64; ++j)
    if (mask & (std::uint64_t(1) << j)) w.emplace(Int(j), 1);
  return make_weighted(ladder, std::move(u), level, Flavor::wpos, std::move(w));
}

WeightedPos ranks_weighted(const LadderRef& ladder, Support u, unsigned level,
                           const std::vector<Int>& ranks) {
  std::map<Int, Rat> w;
  for (const Int& r : ranks) w.emplace(r, 1);
  return make_weighted(ladder, std::move(u), level, Flavor::wpos, std::move(w));
}

// Hand-rolled shuffle so certificates do not depend on library internals.
std::vector<std::uint64_t> draw_order(std::mt19937_64& rng, std::uint64_t space) {
  std::vector<std::uint64_t> pool(space);
  std::iota(pool.begin(), pool.end(), std::uint64_t(0));
  for (std::size_t j = pool.size(); j > 1; --j) std::swap(pool[j - 1], pool[rng() % j]);
  return pool;
}

std::vector<Int> draw_ranks(std::mt19937_64& rng, std::uint64_t space, std::uint64_t count) {
  std::vector<std::uint64_t> order = draw_order(rng, space);
  std::vector<Int> out;
  out.reserve(count);
  for (std::uint64_t j = 0; j < count && j < order.size(); ++j) out.emplace_back(order[j]);
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Fn>
bool throws_input_error(Fn&& fn) {
  try {
    fn();
  } catch (const std::invalid_argument&) {
    return true;
  } catch (...) {
    return false;
  }
  return false;
}

// ---------------------------------------------------------------------------
// norm-axioms

SuiteResult suite_norm_axioms(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("norm-axioms", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);
  LadderRef B = three_level(cap);

  {
    bool ok = true;
    std::uint64_t cases = 0;
    for (const LadderRef& lad : {A, B})
      for (unsigned lvl = 0; lvl < lad->levels(); ++lvl)
        for (const Support& u : {Support{0}, Support{0, 1}}) {
          WeightedPos full = uniform_weighted(lad, u, lvl);
          Nor0 n = nor0(full);
          ok = ok && !n.exact_zero && std::abs(n.value - double(lad->norm_base(lvl))) <= 1e-9;
          ++cases;
        }
    sb.instances += cases;
    sb.check("full-space-norm-is-base", ok, true, std::to_string(cases) + " spaces");
  }

  {
    bool ok = true;
    std::uint64_t pairs = 0;
    for (const LadderRef& lad : {A, B}) {
      // All weight vectors over {0, 1/2, 1}^4, the zero vector excluded.
      std::vector<std::map<Int, Rat>> grid;
      for (unsigned code = 1; code < 81; ++code) {
        std::map<Int, Rat> w;
        unsigned c = code;
        for (unsigned r = 0; r < 4; ++r, c /= 3)
          if (c % 3) w.emplace(Int(r), ratio(Int(c % 3), Int(2)));
        grid.push_back(std::move(w));
      }
      for (const auto& lo : grid)
        for (const auto& hi : grid) {
          bool dom = true;
          for (const auto& [r, v] : lo) {
            auto it = hi.find(r);
            if (it == hi.end() || it->second < v) {
              dom = false;
              break;
            }
          }
          if (!dom) continue;
          WeightedPos flo = make_weighted(lad, Support{0}, 1, Flavor::wpos, lo);
          WeightedPos fhi = make_weighted(lad, Support{0}, 1, Flavor::wpos, hi);
          ok = ok && nor_drop_leq(fhi, flo, 0);
          ++pairs;
        }
    }
    sb.instances += pairs;
    sb.check("monotone-under-domination", ok, true, std::to_string(pairs) + " ordered pairs");
  }

  {
    bool ok = true;
    std::uint64_t pairs = 0;
    auto chain_pairs = [&](const LadderRef& lad, Support u, unsigned lvl, std::uint64_t space,
                           const std::vector<std::uint64_t>& sizes) {
      std::vector<std::uint64_t> order = draw_order(rng, space);
      std::vector<WeightedPos> chain;
      for (std::uint64_t size : sizes) {
        std::vector<Int> ranks;
        for (std::uint64_t j = 0; j < size; ++j) ranks.emplace_back(order[j]);
        chain.push_back(ranks_weighted(lad, u, lvl, ranks));
      }
      for (std::size_t a = 0; a < chain.size(); ++a)
        for (std::size_t b = a + 1; b < chain.size(); ++b) {
          ok = ok && nor_drop_leq(chain[b], chain[a], 0);
          ++pairs;
        }
    };
    chain_pairs(B, Support{0}, 2, 256, {1, 2, 4, 8, 16, 32, 64, 128, 256});
    std::vector<std::uint64_t> all16(16);
    std::iota(all16.begin(), all16.end(), std::uint64_t(1));
    chain_pairs(A, Support{0, 1}, 1, 16, all16);
    sb.instances += pairs;
    sb.check("monotone-nested-indicators", ok, true, std::to_string(pairs) + " nested pairs");
  }

  {
    bool ok_sign = true, ok_floor = true;
    std::uint64_t cases = 0;
    auto probe = [&](const LadderRef& lad, const Support& u, unsigned lvl, const Rat& weight,
                     bool spread) {
      std::uint64_t space = pos_count(*lad, u, lvl).get_ui();
      std::map<Int, Rat> w;
      if (spread)
        for (std::uint64_t r = 0; r < space; ++r) w.emplace(Int(r), weight);
      else
        w.emplace(Int(0), weight);
      WeightedPos F = make_weighted(lad, u, lvl, Flavor::wpos, std::move(w));
      unsigned k = lad->norm_base(lvl);
      Nor0 n = nor0(F);
      double val = norm_float(k, double(space), mass(F).get_d());
      ok_sign = ok_sign && (n.exact_zero ? val <= 1e-9 : val >= -1e-9);
      for (unsigned r = 1; r <= k; ++r) {
        bool ex = nor0_at_least(F, r);
        ok_floor = ok_floor && (ex ? n.value >= double(r) - 1e-6 : n.value <= double(r) + 1e-6);
      }
      ++cases;
    };
    for (unsigned j = 0; j <= 40; ++j) probe(B, Support{0}, 2, dyadic(1, j), false);
    for (unsigned j = 0; j <= 20; j += 2) probe(B, Support{0}, 2, dyadic(1, j + 8), true);
    for (unsigned j = 0; j <= 30; ++j) probe(A, Support{0, 1}, 1, dyadic(1, j), false);
    // The exact zero boundary of the 256-point level-2 space, and one
    // 2^-20 step to either side of it.
    Int pow326 = int_pow(Int(3), 26);
    Rat edge = ratio(Int(256), pow326);
    Int grid = Int(1) << 20;
    probe(B, Support{0}, 2, edge, false);
    probe(B, Support{0}, 2, edge * ratio(grid + 1, grid), false);
    probe(B, Support{0}, 2, edge * ratio(grid - 1, grid), false);
    sb.instances += cases;
    sb.check("zero-threshold-sign-agreement", ok_sign, true, std::to_string(cases) + " masses");
    sb.check("integral-floor-agreement", ok_floor, true);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// bigness-halving

SuiteResult suite_bigness_halving(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("bigness-halving", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);

  auto subset = [&](std::uint64_t mask) { return mask_weighted(A, Support{0}, 1, mask); };

  {
    bool ok = true;
    for (std::uint64_t m = 1; m < 16; ++m) {
      WeightedPos F = subset(m);
      ok = ok && bigness_select(Creature{F, Rat(0)}, {F}) == 0 && nor_drop_leq(F, F, 1);
      ++sb.instances;
    }
    sb.check("trivial-partition", ok, true, "15 sets");
  }

  {
    bool ok_pick = true, ok_drop = true;
    std::uint64_t cases = 0;
    for (std::uint64_t m = 1; m < 16; ++m) {
      if (std::popcount(m) < 2) continue;
      for (std::uint64_t a = 1; a < 16; ++a) {
        if ((a & m) != a || a == m) continue;
        std::uint64_t b = m & ~a;
        WeightedPos F = subset(m), Fa = subset(a), Fb = subset(b);
        std::size_t pick = bigness_select(Creature{F, Rat(0)}, {Fa, Fb});
        std::size_t expect = mass(Fa) >= mass(Fb) ? 0 : 1;
        ok_pick = ok_pick && pick == expect;
        ok_drop = ok_drop && nor_drop_leq(pick == 0 ? Fa : Fb, F, 1);
        ++cases;
        ++sb.instances;
      }
    }
    sb.check("binary-partition-argmax", ok_pick, true, std::to_string(cases) + " splits");
    sb.check("binary-partition-drop", ok_drop, true);
  }

  {
    bool ok = true;
    std::uint64_t cases = 0;
    for (std::uint64_t m = 1; m < 16; ++m) {
      if (std::popcount(m) < 3) continue;
      for (unsigned x = 0; x < 4; ++x)
        for (unsigned y = 0; y < 4; ++y) {
          if (x == y || !(m & (1u << x)) || !(m & (1u << y))) continue;
          std::uint64_t rest = m & ~(1u << x) & ~(1u << y);
          WeightedPos F = subset(m);
          std::vector<WeightedPos> parts = {subset(std::uint64_t(1) << x),
                                            subset(std::uint64_t(1) << y), subset(rest)};
          std::size_t pick = bigness_select(Creature{F, Rat(0)}, parts);
          std::size_t expect = 0;
          for (std::size_t j = 1; j < parts.size(); ++j)
            if (mass(parts[j]) > mass(parts[expect])) expect = j;
          ok = ok && pick == expect && nor_drop_leq(parts[pick], F, 1);
          ++cases;
          ++sb.instances;
        }
    }
    sb.check("ternary-partition-argmax", ok, true, std::to_string(cases) + " splits");
  }

  {
    bool ok_id = true, ok_grid = true, ok_floor = true, ok_sigma = true;
    std::uint64_t cases = 0;
    const double grid_step = 1.0 / 4294967296.0;
    for (std::uint64_t j = 0; j < 1000; ++j) {
      Support u = (j % 2 == 0) ? Support{0} : Support{0, 1};
      std::uint64_t space = (j % 2 == 0) ? 4 : 16;
      std::optional<WeightedPos> made;
      for (int tries = 0; tries < 200 && !made; ++tries) {
        std::map<Int, Rat> w;
        for (std::uint64_t r = 0; r < space; ++r) {
          std::uint64_t t = rng() % 33;
          if (t) w.emplace(Int(r), dyadic(t, 5));
        }
        if (w.empty()) continue;
        WeightedPos cand = make_weighted(A, u, 1, Flavor::wpos, std::move(w));
        // The halving undo needs a norm of at least 2 to clear its own gate.
        if (nor0_at_least(cand, 2)) made = std::move(cand);
      }
      if (!made) continue;
      Creature c{*made, Rat(0)};
      HalveInfo hi;
      Creature d = halve(c, &hi);
      Nor0 n = nor0(c.F);
      ok_id = ok_id && d.F == c.F && d.m == hi.rounded && unhalve(d, c) == c;
      double gap = d.m.get_d() - hi.midpoint;
      ok_grid = ok_grid && std::abs(hi.midpoint - n.value / 2) <= 1e-12 && gap >= -1e-12 &&
                gap <= grid_step + 1e-12;
      ok_floor = ok_floor && nor1(d) >= nor1(c) / 2 - 1e-6;
      ok_sigma = ok_sigma && sigma_member(d, c) && !sigma_member(c, d);
      ++cases;
      ++sb.instances;
    }
    sb.check("halving-identity", ok_id, true, std::to_string(cases) + " creatures");
    sb.check("halving-debt-grid", ok_grid, true);
    sb.check("halving-norm-floor", ok_floor, true);
    sb.check("halving-sigma-order", ok_sigma, true);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// restriction-extension

SuiteResult suite_restriction_extension(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("restriction-extension", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);
  Support u{0, 1};

  auto core_map = [&](const Support& w) {
    std::vector<Int> cm(16);
    for (std::uint64_t r = 0; r < 16; ++r)
      cm[std::size_t(r)] = pos_rank(*A, pos_restrict(*A, pos_unrank(*A, u, 1, Int(r)), w));
    return cm;
  };

  auto sweep = [&](const Support& w, std::uint64_t hi, bool& ok_avg, bool& ok_density,
                   bool& ok_inverse, bool& ok_scaled) {
    std::vector<Int> cm = core_map(w);
    Rat rest(pos_count(*A, support_diff(u, w), 1));
    for (std::uint64_t mask = 1; mask < hi; ++mask) {
      WeightedPos F = mask_weighted(A, u, 1, mask);
      WeightedPos R = restrict_weighted(F, w);
      std::map<Int, Rat> expect;
      for (const auto& [rank, v] : F.weights) expect[cm[rank.get_ui()]] += v / rest;
      ok_avg = ok_avg && R.weights == expect && R.u == w && R.flavor == Flavor::wpos;
      ok_density = ok_density && density(R) == density(F);
      ok_inverse = ok_inverse && extend_restriction(F, R) == F;
      std::map<Int, Rat> half;
      for (const auto& [cr, v] : expect) half.emplace(cr, v / 2);
      WeightedPos R2 = make_weighted(A, w, 1, Flavor::wpos, std::move(half));
      WeightedPos G2 = extend_restriction(F, R2);
      bool each = weights_leq(G2, F) && restrict_weighted(G2, w).weights == R2.weights;
      for (const auto& [rank, v] : G2.weights) each = each && v * 2 == F.weights.at(rank);
      ok_scaled = ok_scaled && each;
      ++sb.instances;
    }
  };

  {
    bool a1 = true, a2 = true, a3 = true, a4 = true;
    sweep(Support{0}, 65536, a1, a2, a3, a4);
    sb.check("averaged-restriction-exact", a1, true, "65535 functions, first coordinate");
    sb.check("restriction-preserves-density", a2, true);
    sb.check("extension-inverts-restriction", a3, true);
    sb.check("scaled-extension-round-trip", a4, true);
  }

  {
    bool b1 = true, b2 = true, b3 = true, b4 = true;
    sweep(Support{1}, 256, b1, b2, b3, b4);
    sb.check("second-coordinate-restriction", b1 && b2 && b3 && b4, true, "255 functions");
  }

  {
    bool ok = true;
    for (int t = 0; t < 100; ++t) {
      std::uint64_t mask = 1 + rng() % 65535;
      WeightedPos F = mask_weighted(A, u, 1, mask);
      ok = ok && restrict_weighted(F, u) == F &&
           throws_input_error([&] { restrict_weighted(F, Support{}); });
      ++sb.instances;
    }
    sb.check("degenerate-cores", ok, true, "100 seeded masks");
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// balanced-product

SuiteResult suite_balanced_product(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("balanced-product", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);
  LadderRef B = three_level(cap);

  {
    bool ok_balance = true, ok_bound = true, ok_strong = true;
    for (std::uint64_t m1 = 1; m1 < 16; ++m1)
      for (std::uint64_t m2 = 1; m2 < 16; ++m2) {
        WeightedPos F1 = mask_weighted(A, Support{0}, 1, m1);
        WeightedPos F2 = mask_weighted(A, Support{1}, 1, m2);
        int s1 = std::popcount(m1), s2 = std::popcount(m2);
        bool bal = is_balanced(F1, F2);
        ok_balance = ok_balance && bal == (s1 == s2);
        if (bal) {
          ok_strong = ok_strong && is_strongly_balanced(F1, F2);
          ProductBound pb = balanced_product_bound(F1, F2);
          Rat a = ratio(Int(s1), Int(4));
          Rat lhs = ratio(Int(s1 * s2), Int(16));
          ok_bound = ok_bound && pb.a == a && pb.lhs == lhs && pb.verdict &&
                     pb.verdict == (lhs >= rat_pow(a, 3) / 8);
        }
        ++sb.instances;
      }
    sb.check("balance-is-density-equality", ok_balance, true, "225 pairs");
    sb.check("disjoint-product-bound", ok_bound, true);
    sb.check("singleton-surplus-strong", ok_strong, true);
  }

  {
    bool ok = true;
    std::uint64_t cases = 0;
    Support u1{0, 1}, u2{1, 2}, shared{1};
    std::vector<Int> core1(16), core2(16);
    std::map<Int, std::vector<std::uint64_t>> class2;
    for (std::uint64_t r = 0; r < 16; ++r) {
      core1[std::size_t(r)] =
          pos_rank(*B, pos_restrict(*B, pos_unrank(*B, u1, 1, Int(r)), shared));
      core2[std::size_t(r)] =
          pos_rank(*B, pos_restrict(*B, pos_unrank(*B, u2, 1, Int(r)), shared));
      class2[core2[std::size_t(r)]].push_back(r);
    }
    for (int t = 0; t < 250; ++t) {
      std::uint64_t mask1 = 1 + rng() % 65535;
      // Match the fiber count of every shared-coordinate class, so the
      // averaged restrictions coincide exactly.
      std::map<Int, unsigned> need;
      for (unsigned r = 0; r < 16; ++r)
        if (mask1 & (1u << r)) ++need[core1[r]];
      std::uint64_t mask2 = 0;
      Int agree = 0;
      for (const auto& [c, cnt] : need) {
        std::vector<std::uint64_t> pool = class2[c];
        for (unsigned pick = 0; pick < cnt; ++pick) {
          std::size_t at = std::size_t(rng() % pool.size());
          mask2 |= std::uint64_t(1) << pool[at];
          pool.erase(pool.begin() + at);
        }
        agree += Int(cnt) * Int(cnt);
      }
      WeightedPos F1 = mask_weighted(B, u1, 1, mask1);
      WeightedPos F2 = mask_weighted(B, u2, 1, mask2);
      ok = ok && is_balanced(F1, F2) && is_strongly_balanced(F1, F2);
      ProductBound pb = balanced_product_bound(F1, F2);
      WeightedPos p = product(F1, F2);
      ok = ok && mass(p) == Rat(agree) && pb.lhs == ratio(agree, Int(64)) &&
           pb.a == ratio(Int(std::popcount(mask1)), Int(16)) &&
           pb.verdict == (pb.lhs >= rat_pow(pb.a, 3) / 8) && pb.verdict &&
           p.u == Support{0, 1, 2} && density(p) == pb.lhs;
      ++cases;
      ++sb.instances;
    }
    sb.check("overlap-product-mass", ok, true, std::to_string(cases) + " matched pairs");
  }

  {
    bool ok = true;
    const std::pair<std::uint64_t, std::uint64_t> bad[] = {{1, 3}, {7, 1}, {15, 3}, {1, 15}, {5, 7}};
    for (auto [m1, m2] : bad) {
      WeightedPos F1 = mask_weighted(A, Support{0}, 1, m1);
      WeightedPos F2 = mask_weighted(A, Support{1}, 1, m2);
      ok = ok && !is_balanced(F1, F2) &&
           throws_input_error([&] { balanced_product_bound(F1, F2); });
      ++sb.instances;
    }
    sb.check("unbalanced-rejected", ok, true, "5 pairs");
  }

  {
    bool ok = true;
    for (int t = 0; t < 15; ++t) {
      std::uint64_t mask = 1 + rng() % 15;
      WeightedPos F = mask_weighted(A, Support{0}, 1, mask);
      auto [g1, g2] = pad_to_strong(F, F);
      ok = ok && is_strongly_balanced(g1, g2) && restrict_weighted(g1, Support{0}) == F &&
           restrict_weighted(g2, Support{0}) == F;
      ++sb.instances;
    }
    for (int t = 0; t < 15; ++t) {
      std::uint64_t s = 1 + rng() % 3;
      WeightedPos F1 = ranks_weighted(A, Support{0, 1}, 1, draw_ranks(rng, 16, 4 * s));
      WeightedPos F2 = ranks_weighted(A, Support{2}, 1, draw_ranks(rng, 4, s));
      ok = ok && is_balanced(F1, F2) && !is_strongly_balanced(F1, F2);
      auto [g1, g2] = pad_to_strong(F1, F2);
      ok = ok && is_strongly_balanced(g1, g2) && g1 == F1 &&
           restrict_weighted(g2, Support{2}) == F2;
      ++sb.instances;
    }
    sb.check("padding-reaches-strong-balance", ok, true, "30 pairs");
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// projection

SuiteResult suite_projection(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("projection", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);
  Support u{0, 1, 2}, v{0, 1};

  std::vector<std::uint64_t> proj(64);
  for (std::uint64_t R = 0; R < 64; ++R)
    proj[std::size_t(R)] =
        pos_rank(*A, pos_restrict(*A, pos_unrank(*A, u, 1, Int(R)), v)).get_ui();

  auto cond_over = [&](const Support& s, std::uint64_t mask) {
    std::vector<Creature> cs;
    cs.push_back(
        Creature{make_weighted(A, s, 0, Flavor::wpos, {{Int(0), Rat(1)}}), Rat(0)});
    cs.push_back(Creature{mask_weighted(A, s, 1, mask), Rat(0)});
    return make_condition(A, empty_history(s), std::move(cs), 2);
  };

  {
    bool ok = true;
    for (std::uint64_t rmask = 1; rmask < 65536; ++rmask) {
      std::uint64_t qmask = 0;
      for (std::uint64_t R = 0; R < 64; ++R)
        if (rmask & (std::uint64_t(1) << proj[std::size_t(R)])) qmask |= std::uint64_t(1) << R;
      Condition q = cond_over(u, qmask);
      Condition r = cond_over(v, rmask);
      ok = ok && condition_equal(project_condition(q, v), r);
      ++sb.instances;
    }
    sb.check("cylinder-projection-surjective", ok, true, "65535 targets");
  }

  {
    bool ok = true;
    for (int t = 0; t < 300; ++t) {
      std::uint64_t m1 = rng();
      if (!m1) m1 = 1;
      std::uint64_t m2 = m1 | rng();
      Condition qs = cond_over(u, m1), qb = cond_over(u, m2);
      ok = ok && leq(qb, qs) && leq(project_condition(qb, v), project_condition(qs, v));
      ++sb.instances;
    }
    sb.check("projection-monotone", ok, true, "300 seeded pairs");
  }

  {
    bool ok_leq = true, ok_exact = true;
    for (int t = 0; t < 200; ++t) {
      std::uint64_t m = rng();
      if (!m) m = 1;
      Condition q = cond_over(u, m);
      Condition r = project_condition(q, v);
      std::vector<Creature> halved;
      for (const Creature& c : r.creatures) {
        std::map<Int, Rat> w;
        for (const auto& [rank, wt] : c.F.weights) w.emplace(rank, wt / 2);
        halved.push_back(
            Creature{make_weighted(A, v, c.F.level, Flavor::wpos, std::move(w)), c.m});
      }
      Condition r2 = make_condition(A, r.hist, std::move(halved), r.horizon);
      Condition cc = complete_lift(q, r2);
      ok_leq = ok_leq && leq(q, cc) && leq(r2, project_condition(cc, v));
      ok_exact = ok_exact && condition_equal(project_condition(cc, v), r2);
      ++sb.instances;
    }
    sb.check("complete-lift-dominates", ok_leq, true, "200 lifts");
    sb.check("complete-lift-exact-fiber-scaling", ok_exact, false);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// amalgamation

SuiteResult suite_amalgamation(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("amalgamation", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap), B = three_level(cap);
  Support u1{0, 1}, u2{0, 2};

  auto seeded_level = [&](const LadderRef& lad, unsigned lvl, std::uint64_t space,
                          std::uint64_t size) {
    for (;;) {
      WeightedPos F = ranks_weighted(lad, u1, lvl, draw_ranks(rng, space, size));
      if (nor0_at_least(F, 1)) return F;
    }
  };

  bool ok_prj = true, ok_levels = true;
  std::uint64_t done = 0;
  auto run_family = [&](const LadderRef& lad, unsigned horizon, std::uint64_t count,
                        const std::function<WeightedPos(unsigned)>& level_fn) {
    for (std::uint64_t t = 0; t < count; ++t) {
      std::vector<Creature> cs;
      for (unsigned lvl = 0; lvl < horizon; ++lvl) cs.push_back(Creature{level_fn(lvl), Rat(0)});
      Condition p1 = make_condition(lad, empty_history(u1), std::move(cs), horizon);
      Condition p2 = transfer(p1, u2);
      AmalgamationReport rep;
      Condition q = amalgamate(p1, p2, &rep);
      ok_prj = ok_prj && q.hist.u == Support{0, 1, 2} && q.horizon == horizon &&
               leq(p1, project_condition(q, u1)) && leq(p2, project_condition(q, u2));
      for (const AmalgamationLevel& lv : rep.levels)
        ok_levels = ok_levels && lv.checked == (lad->norm_base(lv.level) >= 3) &&
                    (!lv.checked || lv.drop_ok);
      ++done;
      ++sb.instances;
    }
  };

  run_family(A, 2, 50, [&](unsigned lvl) {
    return lvl == 0 ? uniform_weighted(A, u1, 0) : seeded_level(A, 1, 16, 4 + rng() % 13);
  });
  run_family(B, 3, 50, [&](unsigned lvl) {
    if (lvl == 0) return uniform_weighted(B, u1, 0);
    if (lvl == 1) return seeded_level(B, 1, 16, 4 + rng() % 13);
    return seeded_level(B, 2, 65536, 256);
  });
  sb.check("projections-dominate-inputs", ok_prj, true,
           std::to_string(done) + " amalgamations");
  sb.check("norm-drop-within-one", ok_levels, true);

  {
    std::vector<Creature> cs;
    cs.push_back(Creature{uniform_weighted(A, u1, 0), Rat(0)});
    cs.push_back(Creature{mask_weighted(A, u1, 1, 0x0f0f), Rat(0)});
    Condition p1 = make_condition(A, empty_history(u1), std::move(cs), 2);
    bool ok = throws_input_error([&] { amalgamate(p1, p1); });
    std::vector<Creature> other;
    other.push_back(Creature{uniform_weighted(A, u2, 0), Rat(0)});
    other.push_back(Creature{mask_weighted(A, u2, 1, 0xf0f0), Rat(0)});
    Condition p2b = make_condition(A, empty_history(u2), std::move(other), 2);
    ok = ok && throws_input_error([&] { amalgamate(p1, p2b); });
    sb.instances += 2;
    sb.check("non-transfer-pairs-rejected", ok, true);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// disjoint-step

// Mirror of the engine's per-fiber cut, recomputed from the raw weights.
struct StepOracle {
  Rat kg;
  std::uint64_t m1 = 0, m2 = 0;
  unsigned iota = 0;
  Rat cm1, cm2, cg;
  bool agree = false;
  std::function<bool(std::uint64_t)> pred1, pred2;
};

StepOracle replay_single_fiber(const std::map<Int, Rat>& w1, const std::map<Int, Rat>& w2,
                               const StepLabels& lab1, const StepLabels& lab2) {
  StepOracle o;
  std::map<std::uint64_t, Rat> by1, by2;
  for (const auto& [r, v] : w1) by1[lab1.at.at(r)] += v;
  for (const auto& [r, v] : w2) by2[lab2.at.at(r)] += v;
  for (const auto& [l, v] : by1) o.kg += v;
  auto median = [&](const std::map<std::uint64_t, Rat>& by) {
    Rat cum = 0;
    for (const auto& [label, v] : by) {
      cum += v;
      if (2 * cum >= o.kg) return std::make_pair(label, v);
    }
    throw std::logic_error("replay: median not reached");
  };
  auto [m1, eq1] = median(by1);
  auto [m2, eq2] = median(by2);
  o.m1 = m1;
  o.m2 = m2;
  bool big1 = 4 * eq1 >= o.kg;
  bool big2 = 4 * eq2 >= o.kg;
  if (big1 && big2) {
    o.iota = 1;
    o.pred1 = [m1](std::uint64_t l) { return l == m1; };
    o.pred2 = [m2](std::uint64_t l) { return l == m2; };
  } else if (big1) {
    o.iota = 2;
    o.pred1 = [m1](std::uint64_t l) { return l == m1; };
    o.pred2 = [m1](std::uint64_t l) { return l != m1; };
  } else if (big2) {
    o.iota = 3;
    o.pred1 = [m2](std::uint64_t l) { return l != m2; };
    o.pred2 = [m2](std::uint64_t l) { return l == m2; };
  } else if (m1 <= m2) {
    o.iota = 4;
    o.pred1 = [m1](std::uint64_t l) { return l < m1; };
    o.pred2 = [m1](std::uint64_t l) { return l >= m1; };
  } else {
    o.iota = 5;
    o.pred1 = [m2](std::uint64_t l) { return l >= m2; };
    o.pred2 = [m2](std::uint64_t l) { return l < m2; };
  }
  for (const auto& [l, v] : by1)
    if (o.pred1(l)) o.cm1 += v;
  for (const auto& [l, v] : by2)
    if (o.pred2(l)) o.cm2 += v;
  o.cg = std::min(o.cm1, o.cm2);
  o.agree = o.iota == 1 && o.m1 == o.m2;
  return o;
}

SuiteResult suite_disjoint_step(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("disjoint-step", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef A = two_level(cap);
  Support u1{0}, u2{1};

  bool ok_fiber = true, ok_out = true, ok_mass = true, ok_product = true, ok_labels = true;
  std::map<unsigned, std::uint64_t> iota_seen;

  auto run_case = [&](const std::map<Int, Rat>& w1, const StepLabels& lab1,
                      const std::map<Int, Rat>& w2, const StepLabels& lab2) {
    WeightedPos F1 = make_weighted(A, u1, 1, Flavor::wpos, w1);
    WeightedPos F2 = make_weighted(A, u2, 1, Flavor::wpos, w2);
    DisjointifyStep st = disjointify_step(F1, F2, lab1, lab2);
    StepOracle o = replay_single_fiber(w1, w2, lab1, lab2);
    ++iota_seen[o.iota];
    const StepFiber& fb = st.fibers.at(0);
    ok_fiber = ok_fiber && st.fibers.size() == 1 && fb.core_rank == 0 && fb.k_g == o.kg &&
               fb.m1 == o.m1 && fb.m2 == o.m2 && fb.iota == o.iota && fb.kept_mass == o.cg &&
               fb.in_agree_class == o.agree && (st.mode == StepMode::agree) == o.agree;
    std::map<Int, Rat> k1, k2;
    if (o.agree || st.mode == StepMode::differ) {
      for (const auto& [r, v] : w1)
        if (o.pred1(lab1.at.at(r))) k1.emplace(r, v * o.cg / o.cm1);
      for (const auto& [r, v] : w2)
        if (o.pred2(lab2.at.at(r))) k2.emplace(r, v * o.cg / o.cm2);
    }
    ok_out = ok_out && st.f1.weights == k1 && st.f2.weights == k2 && weights_leq(st.f1, F1) &&
             weights_leq(st.f2, F2);
    ok_mass = ok_mass && 8 * mass(st.f1) >= mass(F1) && 8 * mass(st.f2) >= mass(F2) &&
              mass(st.f1) == mass(st.f2);
    ok_product = ok_product && st.f == product(st.f1, st.f2);
    bool lbl = true;
    for (const auto& [rank, v] : st.f.weights) {
      PosFunc h = pos_unrank(*A, st.f.u, 1, rank);
      std::uint64_t l1 = lab1.at.at(pos_rank(*A, pos_restrict(*A, h, u1)));
      std::uint64_t l2 = lab2.at.at(pos_rank(*A, pos_restrict(*A, h, u2)));
      lbl = lbl && (st.mode == StepMode::differ
                        ? l1 != l2
                        : l1 == l2 && l1 == st.agree_label.at(Int(0)));
    }
    ok_labels = ok_labels && lbl;
    ++sb.instances;
  };

  // Exhaustive sweep: one- and two-point sides with every binary labeling.
  for (unsigned s = 1; s <= 2; ++s) {
    std::vector<std::uint64_t> masks;
    for (std::uint64_t m = 1; m < 16; ++m)
      if (std::popcount(m) == int(s)) masks.push_back(m);
    auto cases_of = [&](std::uint64_t mask, std::uint64_t asg) {
      std::map<Int, Rat> w;
      StepLabels lab{2, {}};
      unsigned pos = 0;
      for (unsigned r = 0; r < 4; ++r)
        if (mask & (std::uint64_t(1) << r)) {
          w.emplace(Int(r), 1);
          lab.at.emplace(Int(r), (asg >> pos) & 1);
          ++pos;
        }
      return std::make_pair(std::move(w), std::move(lab));
    };
    for (std::uint64_t mask1 : masks)
      for (std::uint64_t a1 = 0; a1 < (std::uint64_t(1) << s); ++a1)
        for (std::uint64_t mask2 : masks)
          for (std::uint64_t a2 = 0; a2 < (std::uint64_t(1) << s); ++a2) {
            auto [w1, lab1] = cases_of(mask1, a1);
            auto [w2, lab2] = cases_of(mask2, a2);
            run_case(w1, lab1, w2, lab2);
          }
  }
  std::uint64_t exhaustive_cases = sb.instances;

  // Crafted fibers covering every cut case of the median split.
  {
    auto side = [&](std::initializer_list<std::pair<unsigned, std::uint64_t>> ranks_labels,
                    std::initializer_list<Rat> weights) {
      std::map<Int, Rat> w;
      StepLabels lab{4, {}};
      auto wit = weights.begin();
      for (auto [r, l] : ranks_labels) {
        w.emplace(Int(r), *wit++);
        lab.at.emplace(Int(r), l);
      }
      return std::make_pair(std::move(w), std::move(lab));
    };
    Rat q7_16 = ratio(Int(7), Int(16)), q3_16 = ratio(Int(3), Int(16)),
        q3_8 = ratio(Int(3), Int(8)), q1_2 = ratio(Int(1), Int(2));
    // Concentrated against concentrated: case 1, agreeing and differing.
    auto [cw1, cl1] = side({{0, 0}, {1, 0}}, {q1_2, q1_2});
    auto [cw2, cl2] = side({{0, 0}, {1, 0}}, {q1_2, q1_2});
    run_case(cw1, cl1, cw2, cl2);
    auto [cw3, cl3] = side({{0, 1}, {1, 1}}, {q1_2, q1_2});
    run_case(cw1, cl1, cw3, cl3);
    // Concentrated against spread: cases 2 and 3.
    auto [sw1, sl1] = side({{0, 0}, {1, 3}}, {q1_2, q1_2});
    auto [sw2, sl2] = side({{0, 0}, {1, 1}, {2, 2}}, {q7_16, q3_16, q3_8});
    run_case(sw1, sl1, sw2, sl2);
    run_case(sw2, sl2, sw1, sl1);
    // Spread against spread: cases 4 and 5.
    auto [sw3, sl3] = side({{0, 0}, {1, 2}, {2, 3}}, {q7_16, q3_16, q3_8});
    run_case(sw2, sl2, sw3, sl3);
    run_case(sw3, sl3, sw2, sl2);
  }

  // Seeded volume with four labels and mixed dyadic weights.
  {
    std::uint64_t built = 0;
    for (int t = 0; t < 2000 && built < 1200; ++t) {
      auto draw_side = [&](const Rat* target) -> std::optional<std::pair<std::map<Int, Rat>, StepLabels>> {
        std::uint64_t size = 1 + rng() % 4;
        std::vector<Int> ranks = draw_ranks(rng, 4, size);
        std::map<Int, Rat> w;
        StepLabels lab{4, {}};
        Rat total = 0;
        for (std::uint64_t j = 0; j < ranks.size(); ++j) {
          if (target && j + 1 == ranks.size()) {
            Rat last = *target - total;
            if (last <= 0 || last > 1) return std::nullopt;
            w.emplace(ranks[std::size_t(j)], last);
          } else {
            Rat v = dyadic(1 + rng() % 32, 5);
            w.emplace(ranks[std::size_t(j)], v);
            total += v;
          }
          lab.at.emplace(ranks[std::size_t(j)], rng() % 4);
        }
        if (target && total >= *target && ranks.size() > 1) return std::nullopt;
        return std::make_pair(std::move(w), std::move(lab));
      };
      auto one = draw_side(nullptr);
      if (!one) continue;
      Rat m1 = 0;
      for (const auto& [r, v] : one->first) m1 += v;
      auto two = draw_side(&m1);
      if (!two) continue;
      run_case(one->first, one->second, two->first, two->second);
      ++built;
    }
    sb.cw.kv("seeded_steps", built);
  }

  sb.check("fiber-replay-exact", ok_fiber, true,
           std::to_string(sb.instances) + " steps, " + std::to_string(exhaustive_cases) +
               " exhaustive");
  sb.check("kept-classes-exact", ok_out, true);
  sb.check("eighth-bound-and-mass-equality", ok_mass, true);
  sb.check("product-consistency", ok_product, true);
  sb.check("label-separation-or-factoring", ok_labels, true);
  {
    bool cover = true;
    std::string detail;
    for (unsigned i = 1; i <= 5; ++i) {
      cover = cover && iota_seen[i] > 0;
      detail += (i > 1 ? " " : "") + std::to_string(i) + ":" + std::to_string(iota_seen[i]);
    }
    sb.check("all-cut-cases-covered", cover, true, detail);
  }

  {
    bool ok = true;
    WeightedPos F1 = mask_weighted(A, u1, 1, 0x1);
    WeightedPos F2 = mask_weighted(A, u2, 1, 0x3);
    StepLabels one{2, {{Int(0), 0}}};
    StepLabels two{2, {{Int(0), 0}, {Int(1), 1}}};
    ok = ok && throws_input_error([&] { disjointify_step(F1, F2, one, two); });
    WeightedPos E2 = mask_weighted(A, u2, 1, 0x1);
    StepLabels wide{4, {{Int(0), 0}}};
    ok = ok && throws_input_error([&] { disjointify_step(F1, E2, one, wide); });
    StepLabels empty{2, {}};
    ok = ok && throws_input_error([&] { disjointify_step(F1, E2, one, empty); });
    sb.instances += 3;
    sb.check("invalid-steps-rejected", ok, true);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// disjoint-level

SuiteResult suite_disjoint_level(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("disjoint-level", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef B = three_level(cap);
  Support u1{0}, u2{1};

  bool ok_shape = true, ok_flags = true, ok_mass = true, ok_density = true, ok_dom = true;
  std::uint64_t agree_hist = 0, differ_hist = 0;
  Int scale = int_pow(Int(8), 16);
  Rat denom(Int(1) << (9 * 16 + 3));

  for (int t = 0; t < 100; ++t) {
    std::uint64_t size = 8 + rng() % 25;
    Rat wgt = (t % 5 == 0) ? ratio(Int(1), Int(2)) : Rat(1);
    std::map<Int, Rat> w1m, w2m;
    for (const Int& r : draw_ranks(rng, 256, size)) w1m.emplace(r, wgt);
    for (const Int& r : draw_ranks(rng, 256, size)) w2m.emplace(r, wgt);
    WeightedPos F1 = make_weighted(B, u1, 2, Flavor::wpos, std::move(w1m));
    WeightedPos F2 = make_weighted(B, u2, 2, Flavor::wpos, std::move(w2m));
    BranchLabeling H1 = labeling_seeded(B, u1, 2, rng());
    BranchLabeling H2 = labeling_seeded(B, u2, 2, rng());
    DisjointifyLevel dl = disjointify_level(F1, F2, H1, H2);
    ok_shape = ok_shape && dl.steps == 16 && dl.modes.size() == 16 &&
               dl.f == product(dl.f1, dl.f2) && dl.input_density == density(F1);
    ok_flags = ok_flags && dl.mass_ok && dl.density_ok && dl.gamma_ok && dl.delta_ok;
    ok_mass = ok_mass && scale * mass(dl.f1) >= mass(F1) && scale * mass(dl.f2) >= mass(F2) &&
              mass(dl.f1) == mass(dl.f2);
    Rat a = density(F1);
    ok_density = ok_density && density(dl.f) >= rat_pow(a, 3) / denom;
    ok_dom = ok_dom && weights_leq(dl.f1, F1) && weights_leq(dl.f2, F2);
    for (StepMode m : dl.modes) (m == StepMode::agree ? agree_hist : differ_hist)++;
    ++sb.instances;
  }

  sb.check("level-loop-shape", ok_shape, true, "100 seeded pairs, 16 histories each");
  sb.check("certified-flags", ok_flags, true);
  sb.check("mass-eighth-per-step", ok_mass, true);
  sb.check("density-cube-bound", ok_density, true);
  sb.check("outputs-refine-inputs", ok_dom, true);
  sb.check("modes-observed", agree_hist + differ_hist == 1600, true,
           std::to_string(agree_hist) + " agree, " + std::to_string(differ_hist) + " differ");

  return sb.finish();
}

// ---------------------------------------------------------------------------
// counting-obstruction

SuiteResult suite_counting_obstruction(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("counting-obstruction", seed, cap);
  LadderRef B = three_level(cap);
  LadderRef W = wide_step(cap);

  {
    // Constant rules over two coordinates: the exact fraction is 1/2 when
    // the rule values share their leading bit, and 0 otherwise.
    Support u{0, 1};
    HistorySeq xbar = canonical_history(*B, u, 2);
    bool ok = true;
    for (std::uint64_t v1 = 0; v1 < 4; ++v1)
      for (std::uint64_t v2 = 0; v2 < 4; ++v2) {
        ReadingRule r1, r2;
        for (std::uint64_t c = 0; c < 256; ++c) {
          r1.emplace(Int(c), make_bits(2, v1));
          r2.emplace(Int(c), make_bits(2, v2));
        }
        CoincidenceReport rep = coincidence_fraction(*B, 2, u, 1, xbar, r1, r2);
        Rat expect = (v1 >> 1) == (v2 >> 1) ? Rat(1, 2) : Rat(0);
        ok = ok && rep.overall == expect && rep.exhaustive && rep.within_bound &&
             rep.fiber_bound == Rat(1, 2);
        ++sb.instances;
      }
    sb.check("constant-rule-fraction-exact", ok, true, "16 value pairs");
  }

  {
    Support u{0, 1};
    HistorySeq xbar = canonical_history(*B, u, 2);
    HistoryKey zeros{Int(0), Int(0), Int(0)};
    bool ok = true;
    const std::pair<std::uint64_t, std::uint64_t> picks[] = {{0, 0}, {1, 2}};
    for (auto [v1, v2] : picks) {
      std::map<HistoryKey, BitString> c1{{zeros, make_bits(2, v1)}};
      std::map<HistoryKey, BitString> c2{{zeros, make_bits(2, v2)}};
      ReductionRules red = coincidence_reduction(*B, 2, u, 0, 1, xbar, Support{}, c1, c2);
      ok = ok && red.rule1.size() == 256 && red.rule2.size() == 256;
      CoincidenceReport rep = coincidence_fraction(*B, 2, u, 0, xbar, red.rule1, red.rule2);
      ok = ok && rep.exhaustive && rep.within_bound && rep.overall <= rep.fiber_bound;
      ++sb.instances;
    }
    sb.check("reduction-feeds-one-coordinate-form", ok, true, "2 transported pairs");
  }

  {
    // One wide step: growth 2^8 meets the threshold 2^(3^2-1) exactly, and
    // the trapped single-point creature is forced to norm zero.
    Support u{0};
    HistorySeq xbar = canonical_history(*W, u, 1);
    ReadingRule r1{{Int(0), make_bits(8, 0)}}, r2{{Int(0), make_bits(8, 0)}};
    WeightedPos F = make_weighted(W, u, 1, Flavor::wpos, {{Int(0), Rat(1)}});
    ObstructionVerdict v = nor_zero_obstruction(Creature{F, Rat(0)}, {xbar, 0, r1, r2});
    Nor0 n = nor0(F);
    bool ok = v.hypothesis_holds && v.threshold_regime && v.exact_zero &&
              v.fraction == Rat(1, 256) && n.exact_zero && n.value == 0.0;
    ++sb.instances;
    sb.check("wide-step-zero-norm-fires", ok, true);
  }

  {
    // Narrow growth: the same trap leaves the norm strictly positive.
    Support u{0};
    HistorySeq xbar = canonical_history(*B, u, 2);
    ReadingRule r1{{Int(0), make_bits(2, 0)}}, r2{{Int(0), make_bits(2, 0)}};
    WeightedPos F = make_weighted(B, u, 2, Flavor::wpos, {{Int(0), Rat(1)}});
    ObstructionVerdict v = nor_zero_obstruction(Creature{F, Rat(0)}, {xbar, 0, r1, r2});
    bool ok = v.hypothesis_holds && !v.threshold_regime && !v.exact_zero &&
              v.fraction == Rat(1, 2) && !nor0(F).exact_zero;
    ++sb.instances;
    sb.check("narrow-step-stays-positive", ok, true);
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------
// creature-disjoint

SuiteResult suite_creature_disjoint(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("creature-disjoint", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef B = three_level(cap);

  bool ok_core = true, ok_passes = true, ok_recount = true, ok_obstr = true, ok_const = true;
  std::uint64_t gamma_true = 0, drop_true = 0, total = 0;

  auto gamma_replay = [&](const CreatureDisjointReport& rep, const BranchLabeling& H1,
                          const BranchLabeling& H2, std::uint32_t a1, std::uint32_t a2) {
    std::uint64_t vac = 0, sat = 0, vio = 0;
    const Ladder& lad = *rep.f.ladder;
    std::size_t i1 = *support_index(rep.f.u, a1);
    std::size_t i2 = *support_index(rep.f.u, a2);
    for_each_history(lad, rep.f.u, rep.f.level, [&](const HistorySeq& xbar) {
      for (const auto& [rank, wv] : rep.f.weights) {
        HistorySeq ys = suc_apply(lad, xbar, pos_unrank(lad, rep.f.u, rep.f.level, rank));
        BitString e1 = label_of(H1, history_restrict(ys, H1.u));
        BitString e2 = label_of(H2, history_restrict(ys, H2.u));
        if (e1 != e2) {
          ++vac;
          continue;
        }
        const CreatureObject& y = ys.entries.back();
        BitString t1 = inverse(y.g[i1]).apply(y.f[i1].apply(e1));
        BitString t2 = inverse(y.g[i2]).apply(y.f[i2].apply(e2));
        (t1 == t2 ? vio : sat)++;
      }
    });
    return std::tuple<std::uint64_t, std::uint64_t, std::uint64_t>{vac, sat, vio};
  };

  auto run_instance = [&](const Creature& c1, const Creature& c2, const BranchLabeling& H1,
                          const BranchLabeling& H2, std::uint32_t a1, std::uint32_t a2,
                          bool vacuous_labels) {
    CreatureDisjointReport rep = disjointify_creatures(c1, c2, H1, H2, a1, a2);
    ok_core = ok_core && rep.proj_equal && weights_leq(rep.d1.F, c1.F) &&
              weights_leq(rep.d2.F, c2.F) && rep.f == product(rep.d1.F, rep.d2.F) &&
              rep.d1.m == c1.m && rep.d2.m == c2.m;
    for (const DisjointifyLevel* dl : {&rep.pass1, &rep.pass2})
      ok_passes = ok_passes && dl->mass_ok && dl->density_ok && dl->gamma_ok && dl->delta_ok;
    auto [vac, sat, vio] = gamma_replay(rep, H1, H2, a1, a2);
    ok_recount = ok_recount && vac == rep.gamma_vacuous && sat == rep.gamma_satisfied &&
                 vio == rep.gamma_violated && rep.gamma_ok == (vio == 0);
    for (const ObstructionVerdict& ov : rep.agree_obstructions)
      ok_obstr = ok_obstr && ov.hypothesis_holds && !ov.threshold_regime;
    if (vacuous_labels)
      ok_const = ok_const && rep.gamma_satisfied == 0 && rep.gamma_violated == 0 &&
                 rep.gamma_ok && rep.gamma_vacuous > 0;
    gamma_true += rep.gamma_ok ? 1 : 0;
    drop_true += rep.drop_ok ? 1 : 0;
    ++total;
    ++sb.instances;
  };

  Support s0{0}, s1{1};
  {
    // Transferred copy against itself, fresh seeded labelings.
    Creature c1{ranks_weighted(B, s0, 2, draw_ranks(rng, 256, 64)), Rat(0)};
    Creature c2{transfer_weighted(c1.F, s1), Rat(0)};
    run_instance(c1, c2, labeling_seeded(B, s0, 2, rng()), labeling_seeded(B, s1, 2, rng()), 0,
                 1, false);
  }
  {
    // Independent equal-size sides.
    Creature c1{ranks_weighted(B, s0, 2, draw_ranks(rng, 256, 48)), Rat(0)};
    Creature c2{ranks_weighted(B, s1, 2, draw_ranks(rng, 256, 48)), Rat(0)};
    run_instance(c1, c2, labeling_seeded(B, s0, 2, rng()), labeling_seeded(B, s1, 2, rng()), 0,
                 1, false);
  }
  {
    // Distinct constant labels never agree, so the separation audit is
    // vacuous at every reachable history.
    Creature c1{ranks_weighted(B, s0, 2, draw_ranks(rng, 256, 32)), Rat(0)};
    Creature c2{transfer_weighted(c1.F, s1), Rat(0)};
    run_instance(c1, c2, labeling_constant(B, s0, 2, make_bits(2, 1)),
                 labeling_constant(B, s1, 2, make_bits(2, 2)), 0, 1, true);
  }
  {
    // Shared coordinate: two-point supports glued along their core.
    Support u1{0, 1}, u2{0, 2};
    Creature c1{ranks_weighted(B, u1, 2, draw_ranks(rng, 65536, 64)), Rat(0)};
    Creature c2{transfer_weighted(c1.F, u2), Rat(0)};
    run_instance(c1, c2, labeling_seeded(B, u1, 2, rng()), labeling_seeded(B, u2, 2, rng()), 1,
                 2, false);
  }

  sb.check("refinement-and-projection-shape", ok_core, true, std::to_string(total) + " pairs");
  sb.check("both-passes-certified", ok_passes, true);
  sb.check("separation-audit-replayed", ok_recount, true);
  sb.check("agree-step-obstructions-audited", ok_obstr, true);
  sb.check("vacuous-under-distinct-constants", ok_const, true);
  sb.check("separation-after-agreement", gamma_true == total, false,
           std::to_string(gamma_true) + " of " + std::to_string(total));
  sb.check("norm-drop-within-one", drop_true == total, false,
           std::to_string(drop_true) + " of " + std::to_string(total));

  return sb.finish();
}

// ---------------------------------------------------------------------------
// branch-amalgamation

SuiteResult suite_branch_amalgamation(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("branch-amalgamation", seed, cap);
  std::mt19937_64 rng(seed);
  LadderRef B = three_level(cap);
  Support s0{0}, s1{1};

  bool ok_structural = true, ok_shape = true, ok_steps = true, ok_vacuous = true;
  bool floors_seen = false;
  std::uint64_t forced_true = 0, total = 0;
  std::string observed;

  auto build_input = [&]() {
    std::vector<Creature> cs;
    cs.push_back(Creature{uniform_weighted(B, s0, 0), Rat(0)});
    cs.push_back(Creature{uniform_weighted(B, s0, 1), Rat(0)});
    cs.push_back(Creature{ranks_weighted(B, s0, 2, draw_ranks(rng, 256, 64)), Rat(0)});
    return make_condition(B, empty_history(s0), std::move(cs), 3);
  };

  auto run_instance = [&](const std::string& rule1, const std::string& rule2,
                          bool expect_vacuous) {
    Condition p1 = build_input();
    Condition p2 = transfer(p1, s1);
    NamePair np;
    np.alpha1 = 0;
    np.alpha2 = 1;
    np.readings.emplace(
        2u, std::make_pair(resolve_labeling(rule1, B, s0, 2), resolve_labeling(rule2, B, s1, 2)));
    std::vector<NamePair> names{np};
    std::vector<unsigned> schedule{2};
    NormalFormReport nf = reading_normal_form(p1, p2, names, schedule);
    ok_structural = ok_structural && nf.structural;
    floors_seen = floors_seen || nf.norm_floors;
    DisjointAmalgam da = amalgamate_disjoint(p1, p2, names, schedule);
    ok_shape = ok_shape && da.q.hist.u == Support{0, 1} && da.q.horizon == 3 &&
               da.q.base_level() == 0 && da.project_dominates &&
               leq(p1, project_condition(da.q, s0)) && leq(p2, project_condition(da.q, s1));
    ok_steps = ok_steps && da.steps.size() == 1 && da.steps[0].level == 2 &&
               da.steps[0].name_index == 0 && da.steps[0].report.proj_equal &&
               da.steps[0].report.pass1.mass_ok && da.steps[0].report.pass2.mass_ok;
    std::uint64_t leaves = 1;
    for (const Creature& c : da.q.creatures) leaves *= c.F.weights.size();
    if (expect_vacuous)
      ok_vacuous = ok_vacuous && da.agreements_checked == 0 && da.premise_failures == 0 &&
                   da.cone_failures == 0 && da.forced_disjoint;
    else
      ok_shape = ok_shape && da.agreements_checked <= leaves;
    forced_true += da.forced_disjoint ? 1 : 0;
    ++total;
    ++sb.instances;
    observed += (observed.empty() ? "" : "; ") + rule1 + "/" + rule2 + " agreements " +
                std::to_string(da.agreements_checked) + " premise-miss " +
                std::to_string(da.premise_failures) + " cone-miss " +
                std::to_string(da.cone_failures);
  };

  run_instance("constant:1", "constant:2", true);
  run_instance("constant:0", "constant:3", true);
  run_instance("constant:2", "constant:2", false);
  run_instance("follow:0:1", "follow:1:1", false);

  sb.check("normal-form-structural", ok_structural, true, std::to_string(total) + " inputs");
  sb.check("merged-condition-shape", ok_shape, true);
  sb.check("scheduled-step-certified", ok_steps, true);
  sb.check("distinct-constants-force-vacuous-disjointness", ok_vacuous, true);
  sb.check("forced-disjointness-observed", forced_true == total, false, observed);
  sb.check("norm-floors-at-desk-scale", !floors_seen, false,
           "floors require growth beyond the desk ladder");

  return sb.finish();
}

// ---------------------------------------------------------------------------
// cone-criterion

SuiteResult suite_cone_criterion(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("cone-criterion", seed, cap);
  LadderRef B = three_level(cap);
  Support u{0, 1};

  std::uint64_t checks = 0, premise = 0, violations = 0, vacuous = 0;
  for_each_history(*B, u, 3, [&](const HistorySeq& xs) {
    for (unsigned lvl = 0; lvl < 3; ++lvl) {
      unsigned w = B->width(lvl);
      std::uint64_t count = std::uint64_t(1) << w;
      for (std::uint64_t v1 = 0; v1 < count; ++v1)
        for (std::uint64_t v2 = 0; v2 < count; ++v2) {
          ConeCheck cc = cone_disjointness(*B, xs, 0, 1, lvl, make_bits(w, v1), make_bits(w, v2));
          ++checks;
          if (cc.premise) {
            ++premise;
            if (!cc.disjoint) ++violations;
          } else if (cc.disjoint) {
            ++vacuous;
          }
        }
    }
  });
  sb.instances = checks;

  sb.check("transported-difference-forces-disjoint-cones", violations == 0, true,
           std::to_string(checks) + " checks, " + std::to_string(premise) + " with premise");
  sb.check("premise-nonvacuous", premise > 0, true);
  sb.check("disjoint-without-premise-observed", vacuous > 0, false,
           std::to_string(vacuous) + " top-level or accidental");
  (void)seed;

  return sb.finish();
}

// ---------------------------------------------------------------------------
// pipeline

struct PipelineArtifacts {
  std::string plan_txt, tree_cert, tree_txt, ext_cert, br1_txt, br2_txt, ak_txt;
  FusionPlan plan;
  FusionTree tree;
  BranchExtract ext;
  Branch b1, b2;
  std::set<std::uint64_t> ak;
};

SuiteResult suite_pipeline(std::uint64_t seed, std::uint64_t cap) {
  SuiteBuilder sb("pipeline", seed, cap);
  LadderRef P = mixed_three(cap);

  auto run_once = [&]() {
    std::mt19937_64 rng(seed);
    std::vector<Creature> cs;
    cs.push_back(Creature{uniform_weighted(P, Support{0}, 0), Rat(0)});
    cs.push_back(Creature{uniform_weighted(P, Support{0}, 1), Rat(0)});
    cs.push_back(Creature{ranks_weighted(P, Support{0}, 2, draw_ranks(rng, 256, 64)), Rat(0)});
    FusionPlan plan;
    plan.ladder = P;
    plan.depth = 2;
    plan.root = make_condition(P, empty_history(Support{0}), std::move(cs), 3);
    plan.splits = {0, 0};
    plan.oracles = {{0, "advance", 0}, {1, "advance", 0}, {2, "advance", 0}};
    plan.names = {{0, "constant:1", "constant:2", 2}};

    PipelineArtifacts art;
    art.plan = plan;
    art.plan_txt = plan_text(plan);
    art.tree = build_fusion(plan);
    art.tree_cert = art.tree.certificate;
    art.tree_txt = tree_text(art.tree);
    art.ext = extract_branch(art.tree, make_bits(2, 0));
    art.ext_cert = art.ext.certificate;

    auto branch_for = [&](const KappaSeq& ks, std::uint64_t top) {
      BitString e2 = make_bits(2, top);
      BitString img1 = restrict_bits(ks.perms[2].apply(e2), 1);
      BitString e1 = inverse(ks.perms[1]).apply(img1);
      Branch b{ks, {make_bits(0, 0), e1, e2}};
      validate_branch(b);
      return b;
    };
    art.b1 = branch_for(art.ext.kappas[0], 1);
    art.b2 = branch_for(art.ext.kappas[2], 2);
    art.br1_txt = branch_text(art.b1);
    art.br2_txt = branch_text(art.b2);
    art.ak = a_kappa(art.ext.kappas[0], 64);
    art.ak_txt = a_kappa_text(art.ext.kappas[0], 64);
    return art;
  };

  PipelineArtifacts one = run_once();
  sb.instances += 1;

  {
    bool ok = one.tree.levels.size() == 3 && one.tree.clause_extension &&
              one.tree.oracles_applied == 3 && one.tree.oracles_skipped == 0 &&
              one.tree.skipped.empty() && one.tree.name_runs.size() == 1;
    const std::vector<BitString> want0{make_bits(0, 0)};
    const std::vector<BitString> want1{make_bits(1, 0), make_bits(1, 1)};
    const std::vector<BitString> want2{make_bits(2, 0), make_bits(2, 1), make_bits(2, 2)};
    ok = ok && one.tree.levels[0].nodes == want0 && one.tree.levels[1].nodes == want1 &&
         one.tree.levels[2].nodes == want2;
    const DisjointAmalgam& run = one.tree.name_runs[0];
    ok = ok && run.project_dominates && run.forced_disjoint && run.agreements_checked == 0 &&
         run.premise_failures == 0 && run.cone_failures == 0;
    sb.check("fusion-tree-shape", ok, true, "depth 2, one scheduled name");
  }

  {
    bool ok = one.ext.leaf_coord == 0 && one.ext.prefix.length() == 3 &&
              one.ext.kappas.size() == 3;
    for (const KappaSeq& ks : one.ext.kappas) ok = ok && ks.length() == 3;
    std::optional<unsigned> bi = bounded_intersection(one.b1, one.b2);
    ok = ok && bi.has_value() && *bi <= 3;
    std::optional<unsigned> cd = cones_disjoint(one.b1, one.b2);
    sb.check("branch-extraction-and-bounded-intersection", ok, true,
             "intersection bound " + (bi ? std::to_string(*bi) : std::string("none")) +
                 ", cones clear from " + (cd ? std::to_string(*cd) : std::string("never")));
    sb.instances += 2;
  }

  {
    // The coded kappa order: recomputed pair by pair over all node codes.
    const KappaSeq& ks = one.ext.kappas[0];
    bool ok = coded_total(*P) == 7;
    std::set<std::uint64_t> expect;
    std::uint64_t pairs_lvl01 = 0;
    for (std::uint64_t c1 = 0; c1 < 7; ++c1)
      for (std::uint64_t c2 = 0; c2 < 7; ++c2) {
        BitString n1 = decode_node(*P, c1), n2 = decode_node(*P, c2);
        ok = ok && code_node(*P, n1) == c1;
        if (n1.width < n2.width && kappa_less(ks, n1, n2)) {
          expect.insert(pr(c1, c2));
          if (n1.width == 0) ++pairs_lvl01;
        }
      }
    ok = ok && one.ak == expect && one.ak.size() == 10 && pairs_lvl01 == 6;
    for (std::uint64_t c = 1; c <= 6; ++c) ok = ok && one.ak.count(pr(0, c)) == 1;
    sb.check("coded-kappa-order-exact", ok, true, "10 coded pairs below bound 64");
    sb.instances += 49;
  }

  {
    bool ok = true;
    FusionPlan plan2 = read_plan(one.plan_txt);
    ok = ok && plan_text(plan2) == one.plan_txt && plan2.depth == 2 &&
         condition_equal(plan2.root, one.plan.root);
    std::map<std::string, std::string> files;
    auto register_condition = [&files](const Condition& c) {
      std::string text = condition_text(c);
      files[hex64(condition_hash(c))] = text;
      files[condition_file_name(c)] = text;
    };
    register_condition(one.tree.plan.root);
    for (const FusionLevelRecord& lv : one.tree.levels) register_condition(lv.cond);
    FusionTree tree2 = read_tree(one.tree_txt, [&](const std::string& key) {
      auto it = files.find(key);
      if (it == files.end()) throw std::invalid_argument("pipeline: unknown condition " + key);
      return it->second;
    });
    ok = ok && tree2.levels.size() == one.tree.levels.size();
    for (std::size_t j = 0; ok && j < tree2.levels.size(); ++j)
      ok = ok && tree2.levels[j].nodes == one.tree.levels[j].nodes &&
           tree2.levels[j].split == one.tree.levels[j].split &&
           condition_equal(tree2.levels[j].cond, one.tree.levels[j].cond);
    Branch br2 = read_branch(one.br1_txt);
    ok = ok && br2.nodes == one.b1.nodes && br2.kappa.perms == one.b1.kappa.perms;
    BranchLabeling lbl = resolve_labeling("seeded:7", P, Support{0}, 2);
    BranchLabeling lbl2 = read_labeling(labeling_text(lbl));
    ok = ok && lbl2.table == lbl.table && lbl2.u == lbl.u && lbl2.level == lbl.level;
    Condition root2 = read_condition(condition_text(one.plan.root));
    ok = ok && condition_equal(root2, one.plan.root);
    sb.check("serialization-round-trips", ok, true);
    sb.instances += 5;
  }

  {
    PipelineArtifacts two = run_once();
    sb.instances += 1;
    bool ok = two.plan_txt == one.plan_txt && two.tree_cert == one.tree_cert &&
              two.tree_txt == one.tree_txt && two.ext_cert == one.ext_cert &&
              two.br1_txt == one.br1_txt && two.br2_txt == one.br2_txt &&
              two.ak_txt == one.ak_txt;
    sb.check("replay-byte-identical", ok, true, "two full builds compared");
  }

  return sb.finish();
}

// ---------------------------------------------------------------------------

using SuiteFn = SuiteResult (*)(std::uint64_t, std::uint64_t);

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
  static const std::vector<std::pair<std::string, SuiteFn>> table = {
      {"norm-axioms", suite_norm_axioms},
      {"bigness-halving", suite_bigness_halving},
      {"restriction-extension", suite_restriction_extension},
      {"balanced-product", suite_balanced_product},
      {"projection", suite_projection},
      {"amalgamation", suite_amalgamation},
      {"disjoint-step", suite_disjoint_step},
      {"disjoint-level", suite_disjoint_level},
      {"counting-obstruction", suite_counting_obstruction},
      {"creature-disjoint", suite_creature_disjoint},
      {"branch-amalgamation", suite_branch_amalgamation},
      {"cone-criterion", suite_cone_criterion},
      {"pipeline", suite_pipeline},
  };
  return table;
}

}  // namespace

std::vector<std::string> suite_names() {
  std::vector<std::string> names;
  names.reserve(registry().size());
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

SuiteResult run_suite(const std::string& name, std::uint64_t seed, std::uint64_t cap) {
  for (const auto& [key, fn] : registry())
    if (key == name) return fn(seed, cap);
  throw std::invalid_argument("run_suite: unknown suite '" + name + "'");
}

}  // namespace creatures
