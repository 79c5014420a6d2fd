#include "creatures/ladder.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace creatures {

std::string BethValue::str() const {
  if (!symbolic) return value.get_str();
  return "tower(" + std::to_string(index) + ")";
}

BethValue beth(unsigned j) {
  BethValue b;
  b.index = j;
  if (j > 5) {
    b.symbolic = true;
    return b;
  }
  Int v = 1;
  for (unsigned i = 0; i < j; ++i) {
    // Each step is 2^previous; previous fits an unsigned long through j = 5.
    v = int_pow(Int(2), v.get_ui());
  }
  b.value = v;
  return b;
}

namespace {

// k^(3^k) < 2^n, exactly when feasible, conservatively otherwise.
bool growth_condition(unsigned k, unsigned n) {
  if (k < 2) return false;
  double exponent = std::pow(3.0, double(k));
  double lhs_log2 = exponent * std::log2(double(k));
  if (lhs_log2 < double(n) * 0.999999) return true;
  if (lhs_log2 > double(n) * 1.000001) return false;
  // Near the boundary: decide exactly while the power is materializable.
  if (exponent <= double(1u << 26)) {
    Int lhs = int_pow(Int(k), static_cast<unsigned long>(exponent));
    return mpz_sizeinbase(lhs.get_mpz_t(), 2) <= n;  // lhs < 2^n iff bit length <= n
  }
  return false;
}

}  // namespace

Ladder::Ladder(std::vector<unsigned> n, std::vector<unsigned> k, std::vector<unsigned> l,
               std::uint64_t enum_cap)
    : n_(std::move(n)), k_(std::move(k)), l_(std::move(l)), enum_cap_(enum_cap) {
  if (n_.empty()) throw std::invalid_argument("Ladder: empty width sequence");
  if (n_[0] != 0) throw std::invalid_argument("Ladder: width sequence must start at 0");
  for (std::size_t i = 1; i < n_.size(); ++i)
    if (n_[i] <= n_[i - 1]) throw std::invalid_argument("Ladder: widths must increase strictly");
  if (n_.back() > 63) throw std::invalid_argument("Ladder: widths above 63 unsupported");
  if (k_.size() != n_.size() || l_.size() != n_.size())
    throw std::invalid_argument("Ladder: sequence lengths differ");
  for (unsigned v : k_)
    if (v < 2) throw std::invalid_argument("Ladder: norm bases must be >= 2");
  for (unsigned v : l_)
    if (v < 2) throw std::invalid_argument("Ladder: log bases must be >= 2");
  if (enum_cap_ == 0) throw std::invalid_argument("Ladder: zero enumeration cap");

  // The growth side conditions concern the levels above the base; the base
  // width is pinned to 0 for every instantiation.
  paper_scale_ = n_.size() > 1;
  for (std::size_t i = 1; i < n_.size(); ++i)
    if (k_[i] < 3 || !growth_condition(k_[i], n_[i])) paper_scale_ = false;
}

unsigned Ladder::width(unsigned i) const {
  if (i >= n_.size()) throw std::out_of_range("Ladder::width: level out of range");
  return n_[i];
}

unsigned Ladder::width_below(unsigned i) const {
  if (i >= n_.size()) throw std::out_of_range("Ladder::width_below: level out of range");
  return i == 0 ? 0 : n_[i - 1];
}

unsigned Ladder::norm_base(unsigned i) const {
  if (i >= k_.size()) throw std::out_of_range("Ladder::norm_base: level out of range");
  return k_[i];
}

unsigned Ladder::log_base(unsigned i) const {
  if (i >= l_.size()) throw std::out_of_range("Ladder::log_base: level out of range");
  return l_[i];
}

namespace {

std::string join(const std::vector<unsigned>& xs) {
  std::string r;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) r += ",";
    r += std::to_string(xs[i]);
  }
  return r;
}

std::vector<unsigned> split_nums(const std::string& s) {
  std::vector<unsigned> r;
  std::istringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) throw std::invalid_argument("Ladder::parse: empty number");
    r.push_back(static_cast<unsigned>(std::stoul(tok)));
  }
  return r;
}

}  // namespace

std::string Ladder::spec_string() const {
  return "n=" + join(n_) + ";k=" + join(k_) + ";l=" + join(l_) +
         ";cap=" + std::to_string(enum_cap_);
}

Ladder Ladder::parse(const std::string& text) {
  std::vector<unsigned> n, k, l;
  std::uint64_t cap = std::uint64_t(1) << 24;
  std::istringstream in(text);
  std::string part;
  bool saw_n = false, saw_k = false, saw_l = false;
  while (std::getline(in, part, ';')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("Ladder::parse: expected key=value");
    std::string key = part.substr(0, eq), val = part.substr(eq + 1);
    if (key == "n") n = split_nums(val), saw_n = true;
    else if (key == "k") k = split_nums(val), saw_k = true;
    else if (key == "l") l = split_nums(val), saw_l = true;
    else if (key == "cap") cap = std::stoull(val);
    else throw std::invalid_argument("Ladder::parse: unknown key '" + key + "'");
  }
  if (!saw_n) throw std::invalid_argument("Ladder::parse: missing widths");
  if (!saw_k) k.assign(n.size(), 3);
  if (!saw_l) l.assign(n.size(), 2);
  return Ladder(std::move(n), std::move(k), std::move(l), cap);
}

LadderRef make_ladder(std::vector<unsigned> n, std::vector<unsigned> k, std::vector<unsigned> l,
                      std::uint64_t enum_cap) {
  return std::make_shared<const Ladder>(std::move(n), std::move(k), std::move(l), enum_cap);
}

void check_enum_cap(const Ladder& ladder, const Int& size, const char* what) {
  if (size > Int(static_cast<unsigned long>(ladder.enum_cap())))
    throw std::length_error(std::string(what) + ": size " + size.get_str() +
                            " exceeds enumeration cap " + std::to_string(ladder.enum_cap()));
}

}  // namespace creatures
