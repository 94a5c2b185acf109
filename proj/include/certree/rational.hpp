#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "certree/errors.hpp"

namespace certree {

using BigInt = boost::multiprecision::cpp_int;

/// Exact rational number with 64-bit numerator and positive denominator,
/// always stored in lowest terms. Intermediate products use 128-bit
/// arithmetic; a result that does not fit in 64 bits throws.
///
/// Objectives and bounds here are of the form k/N + lambda*H, so
/// denominators stay below N times lambda's denominator.
class ExactValue {
 public:
  constexpr ExactValue() = default;
  constexpr ExactValue(std::int64_t integer) : num_(integer), den_(1) {}  // NOLINT(implicit)

  ExactValue(std::int64_t num, std::int64_t den) {
    if (den == 0) throw UsageError("ExactValue: zero denominator");
    assign(static_cast<Wide>(num), static_cast<Wide>(den));
  }

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  bool is_zero() const noexcept { return num_ == 0; }
  bool is_negative() const noexcept { return num_ < 0; }
  bool is_positive() const noexcept { return num_ > 0; }

  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Largest integer <= value.
  std::int64_t floor() const noexcept {
    std::int64_t q = num_ / den_;
    if ((num_ % den_ != 0) && (num_ < 0)) --q;
    return q;
  }

  /// "p/q" or "p" when the denominator is 1.
  std::string to_string() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  /// Decimal rendering rounded half-away-from-zero to `digits` places.
  std::string to_decimal(int digits = 6) const {
    Wide scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Wide n = static_cast<Wide>(num_) * scale;
    const bool neg = n < 0;
    if (neg) n = -n;
    Wide q = (2 * n + den_) / (2 * static_cast<Wide>(den_));
    Wide whole = q / scale;
    Wide frac = q % scale;
    std::string out = neg && q != 0 ? "-" : "";
    out += wide_to_string(whole);
    if (digits > 0) {
      std::string f = wide_to_string(frac);
      out += "." + std::string(static_cast<std::size_t>(digits) - f.size(), '0') + f;
    }
    return out;
  }

  /// Parses "0.005", "3", "-1.25", "1/200" or "1e-2" exactly.
  static ExactValue parse(std::string_view text) {
    if (text.empty()) throw UsageError("cannot parse empty number");
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      return parse(text.substr(0, slash)) / parse(text.substr(slash + 1));
    }
    std::int64_t exp10 = 0;
    if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
      exp10 = parse_int(text.substr(e + 1), text);
      text = text.substr(0, e);
    }
    bool neg = false;
    std::size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
      neg = text[i] == '-';
      ++i;
    }
    Wide mant = 0;
    std::int64_t frac_digits = 0;
    bool seen_dot = false;
    bool seen_digit = false;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '.' && !seen_dot) {
        seen_dot = true;
        continue;
      }
      if (c < '0' || c > '9') throw UsageError("cannot parse number '" + std::string(text) + "'");
      seen_digit = true;
      mant = mant * 10 + (c - '0');
      if (mant > kLimit) throw UsageError("number '" + std::string(text) + "' has too many digits");
      if (seen_dot) ++frac_digits;
    }
    if (!seen_digit) throw UsageError("cannot parse number '" + std::string(text) + "'");
    exp10 -= frac_digits;
    Wide num = neg ? -mant : mant;
    Wide den = 1;
    for (; exp10 > 0; --exp10) num *= 10;
    for (; exp10 < 0; ++exp10) den *= 10;
    ExactValue out;
    out.assign(num, den);
    return out;
  }

  friend ExactValue operator+(const ExactValue& a, const ExactValue& b) {
    if (a.den_ == b.den_) return from_wide(static_cast<Wide>(a.num_) + b.num_, a.den_);
    return from_wide(static_cast<Wide>(a.num_) * b.den_ + static_cast<Wide>(b.num_) * a.den_,
                     static_cast<Wide>(a.den_) * b.den_);
  }
  friend ExactValue operator-(const ExactValue& a, const ExactValue& b) {
    if (a.den_ == b.den_) return from_wide(static_cast<Wide>(a.num_) - b.num_, a.den_);
    return from_wide(static_cast<Wide>(a.num_) * b.den_ - static_cast<Wide>(b.num_) * a.den_,
                     static_cast<Wide>(a.den_) * b.den_);
  }
  friend ExactValue operator*(const ExactValue& a, const ExactValue& b) {
    return from_wide(static_cast<Wide>(a.num_) * b.num_, static_cast<Wide>(a.den_) * b.den_);
  }
  friend ExactValue operator/(const ExactValue& a, const ExactValue& b) {
    if (b.num_ == 0) throw UsageError("ExactValue: division by zero");
    return from_wide(static_cast<Wide>(a.num_) * b.den_, static_cast<Wide>(a.den_) * b.num_);
  }
  ExactValue operator-() const { return from_wide(-static_cast<Wide>(num_), den_); }

  ExactValue& operator+=(const ExactValue& o) { return *this = *this + o; }
  ExactValue& operator-=(const ExactValue& o) { return *this = *this - o; }

  friend bool operator==(const ExactValue& a, const ExactValue& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const ExactValue& a, const ExactValue& b) noexcept {
    if (a.den_ == b.den_) return a.num_ <=> b.num_;
    const Wide l = static_cast<Wide>(a.num_) * b.den_;
    const Wide r = static_cast<Wide>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less
                 : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const ExactValue& v) { return os << v.to_string(); }

 private:
  using Wide = __int128;
  static constexpr Wide kLimit = std::numeric_limits<std::int64_t>::max();

  static ExactValue from_wide(Wide num, Wide den) {
    ExactValue out;
    out.assign(num, den);
    return out;
  }

  static Wide wide_gcd(Wide a, Wide b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
      Wide t = a % b;
      a = b;
      b = t;
    }
    return a;
  }

  static std::string wide_to_string(Wide v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
      s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    return s;
  }

  static std::int64_t parse_int(std::string_view t, std::string_view whole) {
    try {
      return std::stoll(std::string(t));
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + std::string(whole) + "'");
    }
  }

  void assign(Wide num, Wide den) {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    if (num == 0) {
      num_ = 0;
      den_ = 1;
      return;
    }
    const Wide g = wide_gcd(num, den);
    num /= g;
    den /= g;
    if (num > kLimit || num < -kLimit || den > kLimit) {
      throw ResourceError("ExactValue overflow: value does not fit 64-bit rational");
    }
    num_ = static_cast<std::int64_t>(num);
    den_ = static_cast<std::int64_t>(den);
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline ExactValue min(const ExactValue& a, const ExactValue& b) { return b < a ? b : a; }
inline ExactValue max(const ExactValue& a, const ExactValue& b) { return a < b ? b : a; }

}  // namespace certree
