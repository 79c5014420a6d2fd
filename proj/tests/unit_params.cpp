#include "doctest.h"

#include <set>
#include <stdexcept>

#include "creatures/bits.hpp"
#include "creatures/ladder.hpp"
#include "creatures/perm.hpp"
#include "creatures/rational.hpp"

using namespace creatures;

TEST_SUITE("params") {

TEST_CASE("ladder accessors") {
  LadderRef b = make_ladder({0, 1, 2}, {3, 3, 3}, {2, 2, 2});
  CHECK(b->levels() == 3);
  CHECK(b->width(0) == 0);
  CHECK(b->width(1) == 1);
  CHECK(b->width(2) == 2);
  CHECK(b->width_below(0) == 0);
  CHECK(b->width_below(2) == 1);
  CHECK(b->norm_base(1) == 3);
  CHECK(b->log_base(1) == 2);
  CHECK(!b->paper_scale());
  CHECK_THROWS_AS((void)b->width(3), std::invalid_argument);
}

TEST_CASE("spec string round trip") {
  LadderRef w = make_ladder({0, 8}, {2, 2}, {2, 2}, 1 << 20);
  Ladder again = Ladder::parse(w->spec_string());
  CHECK(again == *w);
  CHECK(again.spec_string() == w->spec_string());
  CHECK_THROWS_AS(Ladder::parse("k=3,3"), std::invalid_argument);
  CHECK_THROWS_AS(Ladder::parse("n=0,1;zz=4"), std::invalid_argument);
  // Omitted bases fall back to the defaults.
  Ladder defaulted = Ladder::parse("n=0,1,2");
  CHECK(defaulted.norm_base(0) == 3);
  CHECK(defaulted.log_base(0) == 2);
}

TEST_CASE("enumeration cap refuses large spaces") {
  LadderRef tiny = make_ladder({0, 1, 2}, {3, 3, 3}, {2, 2, 2}, 100);
  CHECK_NOTHROW(check_enum_cap(*tiny, Int(100), "probe"));
  CHECK_THROWS_AS(check_enum_cap(*tiny, Int(101), "probe"), std::invalid_argument);
}

TEST_CASE("beth tower") {
  CHECK(beth(0).value == 1);
  CHECK(beth(1).value == 2);
  CHECK(beth(2).value == 4);
  CHECK(beth(3).value == 16);
  CHECK(beth(4).value == 65536);
  CHECK(!beth(4).symbolic);
  CHECK(beth(6).symbolic);
}

TEST_CASE("permutation rank and unrank are inverse") {
  for (unsigned width : {0u, 1u, 2u}) {
    Int total = perm_count(width);
    std::set<std::string> seen;
    for (Int r = 0; r < total; ++r) {
      LevelPerm p = perm_unrank(width, r);
      CHECK(p.is_valid());
      CHECK(perm_rank(p) == r);
      std::string fp;
      for (std::uint32_t v = 0; v < (1u << width); ++v)
        fp += std::to_string(p.apply_value(v)) + ",";
      seen.insert(fp);
    }
    CHECK(Int(seen.size()) == total);
  }
  CHECK(perm_count(0) == 1);
  CHECK(perm_count(1) == 2);
  CHECK(perm_count(2) == 24);
  CHECK(perm_count(3) == 40320);
}

TEST_CASE("composition laws") {
  for (Int ra = 0; ra < 24; ra += 5)
    for (Int rb = 0; rb < 24; rb += 7) {
      LevelPerm a = perm_unrank(2, ra), b = perm_unrank(2, rb);
      LevelPerm ab = compose(a, b);
      for (std::uint32_t v = 0; v < 4; ++v)
        CHECK(ab.apply_value(v) == a.apply_value(b.apply_value(v)));
      CHECK(compose(a, inverse(a)) == LevelPerm::identity(2));
      CHECK(compose(inverse(a), a) == LevelPerm::identity(2));
    }
}

TEST_CASE("block extensions restrict back") {
  // Extensions of a width-1 permutation to width 2 partition the
  // compatible permutations and restrict to the original.
  LevelPerm g = perm_unrank(1, Int(1));
  Int count = 0;
  for (Int r = 0; r < 24; ++r) {
    LevelPerm pi = perm_unrank(2, r);
    if (!perm_extends(pi, g)) continue;
    ++count;
    Int idx = block_extension_index(pi, g);
    CHECK(block_extension_make(g, 2, idx) == pi);
  }
  CHECK(count > 0);
  CHECK(count < 24);
}

TEST_CASE("bit strings") {
  BitString s = make_bits(3, 5);
  CHECK(s.width == 3);
  CHECK(restrict_bits(s, 2) == make_bits(2, 2));
  CHECK(restrict_bits(s, 0) == make_bits(0, 0));
  CHECK(is_prefix(make_bits(0, 0), s));
  CHECK(is_prefix(make_bits(2, 2), s));
  CHECK(!is_prefix(make_bits(2, 1), s));
  CHECK(bits_str(s) == "101");
  CHECK_THROWS_AS(make_bits(2, 4), std::invalid_argument);
}

}  // TEST_SUITE
