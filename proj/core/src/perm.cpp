#include "creatures/perm.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace creatures {

LevelPerm LevelPerm::identity(unsigned width) {
  if (width > 20) throw std::invalid_argument("LevelPerm: width too large to materialize");
  LevelPerm p;
  p.width = width;
  p.img.resize(std::size_t(1) << width);
  std::iota(p.img.begin(), p.img.end(), 0u);
  return p;
}

std::uint32_t LevelPerm::apply_value(std::uint32_t v) const {
  if (v >= img.size()) throw std::out_of_range("LevelPerm::apply_value");
  return img[v];
}

BitString LevelPerm::apply(BitString s) const {
  if (s.width != width) throw std::invalid_argument("LevelPerm::apply: width mismatch");
  return BitString{width, apply_value(static_cast<std::uint32_t>(s.value))};
}

bool LevelPerm::is_valid() const {
  if (img.size() != (std::size_t(1) << width)) return false;
  std::vector<bool> seen(img.size(), false);
  for (auto v : img) {
    if (v >= img.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

LevelPerm compose(const LevelPerm& a, const LevelPerm& b) {
  if (a.width != b.width) throw std::invalid_argument("compose: width mismatch");
  LevelPerm r;
  r.width = a.width;
  r.img.resize(a.img.size());
  for (std::size_t x = 0; x < b.img.size(); ++x) r.img[x] = a.img[b.img[x]];
  return r;
}

LevelPerm inverse(const LevelPerm& p) {
  LevelPerm r;
  r.width = p.width;
  r.img.resize(p.img.size());
  for (std::size_t x = 0; x < p.img.size(); ++x) r.img[p.img[x]] = static_cast<std::uint32_t>(x);
  return r;
}

Int perm_count(unsigned width) {
  if (width > 20) throw std::invalid_argument("perm_count: width too large");
  return factorial(1ul << width);
}

namespace {

// Lehmer rank of an arbitrary sequence of distinct values.
Int lehmer_rank(const std::vector<std::uint32_t>& seq) {
  const std::size_t n = seq.size();
  Int rank = 0;
  for (std::size_t i = 0; i < n; ++i) {
    unsigned smaller_later = 0;
    for (std::size_t j = i + 1; j < n; ++j)
      if (seq[j] < seq[i]) ++smaller_later;
    rank = rank * Int(static_cast<unsigned long>(n - i)) + smaller_later;
  }
  return rank;
}

// Inverse of lehmer_rank over the sorted value pool.
std::vector<std::uint32_t> lehmer_unrank(std::vector<std::uint32_t> pool, Int rank) {
  const std::size_t n = pool.size();
  std::vector<Int> radix(n, 1);
  for (std::size_t i = 1; i < n; ++i) radix[i] = radix[i - 1] * Int(static_cast<unsigned long>(i));
  std::vector<std::uint32_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Int& base = radix[n - 1 - i];
    Int digit = rank / base;
    rank -= digit * base;
    unsigned long d = digit.get_ui();
    if (d >= pool.size()) throw std::invalid_argument("lehmer_unrank: rank out of range");
    out.push_back(pool[d]);
    pool.erase(pool.begin() + static_cast<long>(d));
  }
  return out;
}

}  // namespace

Int perm_rank(const LevelPerm& p) { return lehmer_rank(p.img); }

LevelPerm perm_unrank(unsigned width, const Int& rank) {
  if (rank < 0 || rank >= perm_count(width)) throw std::invalid_argument("perm_unrank: rank out of range");
  std::vector<std::uint32_t> pool(std::size_t(1) << width);
  std::iota(pool.begin(), pool.end(), 0u);
  LevelPerm p;
  p.width = width;
  p.img = lehmer_unrank(std::move(pool), rank);
  return p;
}

bool perm_extends(const LevelPerm& pi, const LevelPerm& g) {
  if (g.width > pi.width) return false;
  const unsigned drop = pi.width - g.width;
  for (std::uint32_t v = 0; v < pi.img.size(); ++v)
    if ((pi.img[v] >> drop) != g.img[v >> drop]) return false;
  return true;
}

Int block_extension_count_w(unsigned top_width, unsigned g_width) {
  if (g_width > top_width) throw std::invalid_argument("block_extension_count_w: widths reversed");
  Int per_fiber = factorial(1ul << (top_width - g_width));
  return int_pow(per_fiber, 1ul << g_width);
}

Int block_extension_index(const LevelPerm& pi, const LevelPerm& g) {
  if (!perm_extends(pi, g)) throw std::invalid_argument("block_extension_index: not an extension");
  const unsigned drop = pi.width - g.width;
  const std::uint32_t fiber = 1u << drop;
  Int per_fiber = factorial(fiber);
  Int index = 0;
  // Source fibers by prefix ascending; fiber 0 is the most significant digit,
  // matching lexicographic order on the whole image array.
  for (std::uint32_t tau = 0; tau < (1u << g.width); ++tau) {
    std::vector<std::uint32_t> block(fiber);
    for (std::uint32_t t = 0; t < fiber; ++t)
      block[t] = pi.img[(tau << drop) | t] - (g.img[tau] << drop);
    index = index * per_fiber + lehmer_rank(block);
  }
  return index;
}

LevelPerm block_extension_make(const LevelPerm& g, unsigned top_width, const Int& index) {
  if (g.width > top_width) throw std::invalid_argument("block_extension_make: widths reversed");
  if (index < 0 || index >= block_extension_count_w(top_width, g.width))
    throw std::invalid_argument("block_extension_make: index out of range");
  const unsigned drop = top_width - g.width;
  const std::uint32_t fiber = 1u << drop;
  Int per_fiber = factorial(fiber);
  const std::uint32_t fibers = 1u << g.width;
  std::vector<Int> digits(fibers);
  Int rest = index;
  for (std::uint32_t tau = fibers; tau-- > 0;) {
    digits[tau] = rest % per_fiber;
    rest /= per_fiber;
  }
  LevelPerm pi;
  pi.width = top_width;
  pi.img.resize(std::size_t(1) << top_width);
  std::vector<std::uint32_t> base(fiber);
  std::iota(base.begin(), base.end(), 0u);
  for (std::uint32_t tau = 0; tau < fibers; ++tau) {
    std::vector<std::uint32_t> block = lehmer_unrank(base, digits[tau]);
    for (std::uint32_t t = 0; t < fiber; ++t)
      pi.img[(tau << drop) | t] = (g.img[tau] << drop) | block[t];
  }
  return pi;
}

}  // namespace creatures
