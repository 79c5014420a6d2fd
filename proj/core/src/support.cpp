#include "creatures/support.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace creatures {

Support make_support(std::initializer_list<std::uint32_t> xs) {
  Support u(xs);
  std::sort(u.begin(), u.end());
  validate_support(u);
  return u;
}

void validate_support(const Support& u) {
  for (std::size_t i = 1; i < u.size(); ++i)
    if (u[i - 1] >= u[i]) throw std::invalid_argument("support not strictly increasing");
}

bool support_contains(const Support& u, std::uint32_t a) {
  return std::binary_search(u.begin(), u.end(), a);
}

std::optional<std::size_t> support_index(const Support& u, std::uint32_t a) {
  auto it = std::lower_bound(u.begin(), u.end(), a);
  if (it == u.end() || *it != a) return std::nullopt;
  return static_cast<std::size_t>(it - u.begin());
}

Support support_union(const Support& a, const Support& b) {
  Support r;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

Support support_intersect(const Support& a, const Support& b) {
  Support r;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

Support support_diff(const Support& a, const Support& b) {
  Support r;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
  return r;
}

bool support_subset(const Support& a, const Support& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<std::pair<std::uint32_t, std::uint32_t>> op_map(const Support& u, const Support& v) {
  if (u.size() != v.size()) throw std::invalid_argument("op_map: order types differ");
  std::vector<std::pair<std::uint32_t, std::uint32_t>> r;
  r.reserve(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) r.emplace_back(u[i], v[i]);
  return r;
}

std::string support_str(const Support& u) {
  std::string s = "{";
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(u[i]);
  }
  s += '}';
  return s;
}

bool is_delta_system(const Support& u, const Support& v) {
  if (u.size() != v.size()) return false;
  // The order-preserving matching fixes a common element exactly when the
  // element occupies the same position in both supports.
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (support_contains(v, u[i]) && v[i] != u[i]) return false;
    if (support_contains(u, v[i]) && u[i] != v[i]) return false;
  }
  return true;
}

}  // namespace creatures
