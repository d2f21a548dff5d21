#include "infocp/rational.hpp"

#include <cstdlib>
#include <numeric>

namespace infocp {

namespace {

std::int64_t checked(__int128 v) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw std::overflow_error("rational overflow");
  }
  return static_cast<std::int64_t>(v);
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  num_ = g == 0 ? 0 : num / g;
  den_ = g == 0 ? 1 : den / g;
}

std::string Rational::to_string() const {
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational Rational::operator*(const Rational& o) const {
  // Cross-reduce before multiplying to delay overflow.
  const std::int64_t g1 = std::gcd(num_ < 0 ? -num_ : num_, o.den_);
  const std::int64_t g2 = std::gcd(o.num_ < 0 ? -o.num_ : o.num_, den_);
  return Rational(checked(static_cast<__int128>(num_ / g1) * (o.num_ / g2)),
                  checked(static_cast<__int128>(den_ / g2) * (o.den_ / g1)));
}

Rational Rational::operator+(const Rational& o) const {
  const __int128 n = static_cast<__int128>(num_) * o.den_ + static_cast<__int128>(o.num_) * den_;
  const __int128 d = static_cast<__int128>(den_) * o.den_;
  return Rational(checked(n), checked(d));
}

Rational Rational::operator-(const Rational& o) const {
  return *this + Rational(-o.num_, o.den_);
}

bool Rational::operator<(const Rational& o) const {
  return static_cast<__int128>(num_) * o.den_ < static_cast<__int128>(o.num_) * den_;
}

bool Rational::operator<=(const Rational& o) const {
  return static_cast<__int128>(num_) * o.den_ <= static_cast<__int128>(o.num_) * den_;
}

Rational Rational::truncated_at_one() const {
  return num_ >= den_ ? Rational(1, 1) : *this;
}

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("empty rational");
  const auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      const std::int64_t p = std::stoll(text.substr(0, slash));
      const std::int64_t q = std::stoll(text.substr(slash + 1));
      return Rational(p, q);
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
      return Rational(std::stoll(text), 1);
    }
    const std::string whole = text.substr(0, dot);
    const std::string frac = text.substr(dot + 1);
    if (frac.size() > 18) throw std::invalid_argument("too many decimal digits: " + text);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den = checked(static_cast<__int128>(den) * 10);
    const bool neg = !whole.empty() && whole[0] == '-';
    const std::int64_t w = whole.empty() || whole == "-" ? 0 : std::stoll(whole);
    std::int64_t f = frac.empty() ? 0 : std::stoll(frac);
    if (neg) f = -f;
    return Rational(checked(static_cast<__int128>(w) * den + f), den);
  } catch (const std::invalid_argument&) {
    throw std::invalid_argument("malformed rational: " + text);
  } catch (const std::out_of_range&) {
    throw std::invalid_argument("rational out of range: " + text);
  }
}

}  // namespace infocp
