#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace creatures {

// Finite coordinate set, sorted ascending, no repeats.
using Support = std::vector<std::uint32_t>;

Support make_support(std::initializer_list<std::uint32_t> xs);
void validate_support(const Support& u);
bool support_contains(const Support& u, std::uint32_t a);
std::optional<std::size_t> support_index(const Support& u, std::uint32_t a);
Support support_union(const Support& a, const Support& b);
Support support_intersect(const Support& a, const Support& b);
Support support_diff(const Support& a, const Support& b);
bool support_subset(const Support& a, const Support& b);
std::string support_str(const Support& u);

// Order-preserving matching from u onto v (equal sizes required):
// element i of u maps to element i of v.
std::vector<std::pair<std::uint32_t, std::uint32_t>> op_map(const Support& u, const Support& v);

// Same order type and the order-preserving matching fixes the intersection.
bool is_delta_system(const Support& u, const Support& v);

}  // namespace creatures
