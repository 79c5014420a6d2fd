#include "creatures/rational.hpp"

#include <cmath>
#include <stdexcept>

namespace creatures {

Int int_pow(const Int& base, unsigned long exp) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), exp);
  return r;
}

Int factorial(unsigned long n) {
  Int r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

Rat rat_pow(const Rat& base, unsigned long exp) {
  Rat r;
  mpz_pow_ui(r.get_num().get_mpz_t(), base.get_num().get_mpz_t(), exp);
  mpz_pow_ui(r.get_den().get_mpz_t(), base.get_den().get_mpz_t(), exp);
  r.canonicalize();
  return r;
}

Rat floor_to_dyadic(const Rat& q, unsigned bits) {
  Int scaled_num = q.get_num() << bits;
  Int fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled_num.get_mpz_t(), q.get_den().get_mpz_t());
  Rat r(fl, Int(1) << bits);
  r.canonicalize();
  return r;
}

bool on_dyadic_grid(const Rat& q, unsigned bits) {
  Int num = q.get_num() << bits;
  return mpz_divisible_p(num.get_mpz_t(), q.get_den().get_mpz_t()) != 0;
}

double log_of(const Int& z) {
  if (sgn(z) <= 0) throw std::domain_error("log_of: nonpositive integer");
  signed long exp2;
  double d = mpz_get_d_2exp(&exp2, z.get_mpz_t());
  return std::log(d) + static_cast<double>(exp2) * M_LN2;
}

double log_of(const Rat& q) {
  if (sgn(q) <= 0) throw std::domain_error("log_of: nonpositive rational");
  return log_of(Int(q.get_num())) - log_of(Int(q.get_den()));
}

std::string rat_str(const Rat& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

Rat rat_parse(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("rat_parse: bad rational '" + s + "'");
  q.canonicalize();
  return q;
}

}  // namespace creatures
