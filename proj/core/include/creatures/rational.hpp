#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>

namespace creatures {

// All masses and weights are exact rationals; floats appear only in norm
// reporting, never in comparisons that decide an algorithm branch.
using Rat = mpq_class;
using Int = mpz_class;

Int int_pow(const Int& base, unsigned long exp);
Int factorial(unsigned long n);
Rat rat_pow(const Rat& base, unsigned long exp);

// floor(q * 2^bits) / 2^bits, the grid rounding used for weight functions.
Rat floor_to_dyadic(const Rat& q, unsigned bits);
// True when q lies on the 2^-bits grid.
bool on_dyadic_grid(const Rat& q, unsigned bits);

// Natural log that stays finite for values far outside double range.
double log_of(const Int& z);
double log_of(const Rat& q);

std::string rat_str(const Rat& q);
Rat rat_parse(const std::string& s);

}  // namespace creatures
