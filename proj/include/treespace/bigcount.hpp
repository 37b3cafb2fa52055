#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>

namespace treespace {

// Exact unbounded integer for cover counts; they outgrow fixed width fast.
using BigCount = mpz_class;

inline std::string to_decimal(const BigCount& c) { return c.get_str(10); }

// ln of a positive count via the (exponent, mantissa) decomposition, good to
// double precision regardless of magnitude.
inline double log_natural(const BigCount& c) {
  signed long exp = 0;
  double mant = mpz_get_d_2exp(&exp, c.get_mpz_t());
  return std::log(mant) + static_cast<double>(exp) * M_LN2;
}

inline BigCount pow_big(unsigned long base, unsigned long exp) {
  BigCount out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

}  // namespace treespace
