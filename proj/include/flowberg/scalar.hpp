#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace flowberg {

/// Exact scalar used throughout the library. All structural identities
/// (flow conservation, kernel symmetry, reproducing property, ...) are
/// checked with zero tolerance in this type; float64 views are derived
/// from it where real exponents are involved.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

enum class ScalarMode { exact_rational, float64 };

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an infinite sum has no closed form and no certified
/// truncation bound is available for the requested inputs.
struct cannot_certify_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct assumption_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// r^e for integer e of either sign; r > 0 required for e < 0.
inline Rational pow_int(const Rational& r, long e) {
  if (e >= 0) {
    Rational acc = 1, base = r;
    long n = e;
    while (n > 0) {
      if (n & 1) acc *= base;
      base *= base;
      n >>= 1;
    }
    return acc;
  }
  if (r == 0) throw std::domain_error("pow_int: 0 to negative power");
  return Rational(1) / pow_int(r, -e);
}

/// Parses "p/q", "p", or a plain decimal like "1.25" into an exact rational.
Rational parse_rational(const std::string& s);

/// Canonical "p/q" (or "p" when the denominator is 1).
std::string format_rational(const Rational& r);

}  // namespace flowberg
