#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace infocp {

// Exact rational arithmetic for conformal p-values and BH thresholds.
// p-values are multiples of 1/(n+1); BH compares q_i against alpha*l/m and
// float rounding there would flip selections, so all comparisons cross-multiply
// in 128-bit integers.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(std::int64_t num, std::int64_t den);

  static Rational one() { return Rational(1, 1); }
  static Rational zero() { return Rational(0, 1); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  std::string to_string() const;

  Rational operator*(const Rational& o) const;
  Rational operator+(const Rational& o) const;
  Rational operator-(const Rational& o) const;

  bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator<=(const Rational& o) const;
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return o <= *this; }

  // min(*this, 1); weighted p-values may exceed 1 and are truncated.
  Rational truncated_at_one() const;

 private:
  std::int64_t num_;
  std::int64_t den_;  // > 0, gcd(num, den) == 1
};

inline Rational min(const Rational& a, const Rational& b) { return a <= b ? a : b; }
inline Rational max(const Rational& a, const Rational& b) { return a <= b ? b : a; }

// Parses "p/q" or a decimal string like "0.1" (converted exactly with
// denominator 10^k). Throws std::invalid_argument on malformed input.
Rational parse_rational(const std::string& text);

}  // namespace infocp
