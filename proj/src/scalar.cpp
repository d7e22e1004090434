#include "flowberg/scalar.hpp"

#include <cctype>

namespace flowberg {

Rational parse_rational(const std::string& s) {
  if (s.empty()) throw config_error("empty rational literal");
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    BigInt num(s.substr(0, slash));
    BigInt den(s.substr(slash + 1));
    if (den == 0) throw config_error("rational with zero denominator: " + s);
    return Rational(num, den);
  }
  auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(BigInt(s));
  // decimal literal: digits.digits
  std::string head = s.substr(0, dot), tail = s.substr(dot + 1);
  bool neg = !head.empty() && head[0] == '-';
  if (neg) head = head.substr(1);
  if (head.empty()) head = "0";
  for (char c : head + tail)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw config_error("bad rational literal: " + s);
  BigInt num(head + tail);
  BigInt den = 1;
  for (size_t i = 0; i < tail.size(); ++i) den *= 10;
  Rational r(num, den);
  return neg ? -r : r;
}

std::string format_rational(const Rational& r) {
  std::string num = numerator(r).str();
  if (denominator(r) == 1) return num;
  return num + "/" + denominator(r).str();
}

}  // namespace flowberg
