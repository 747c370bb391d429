// Reference fp8 (eb=4, sb=3) arithmetic on doubles. Every fp8 value, every
// midpoint between neighbours and every exact sum, product or fma of fp8
// values is a double, so rounding reduces to sign tests against the sorted
// list of representable magnitudes.
#pragma once

#include <algorithm>
#include <cfenv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace ref8 {

enum class Mode { RNE, RNA, RTP, RTN, RTZ };

constexpr std::uint8_t kNaN = 0x79;
constexpr std::uint8_t kPosInf = 0x78;
constexpr std::uint8_t kNegInf = 0xf8;

inline bool is_nan(std::uint8_t b) { return (b & 0x78) == 0x78 && (b & 7) != 0; }
inline bool is_inf(std::uint8_t b) { return (b & 0x7f) == 0x78; }
inline bool negative(std::uint8_t b) { return (b & 0x80) != 0; }

inline double value(std::uint8_t b) {
  const int e = (b >> 3) & 0xf, m = b & 7;
  const double sign = negative(b) ? -1.0 : 1.0;
  if (e == 15) return m == 0 ? sign * INFINITY : NAN;
  if (e == 0) return sign * std::ldexp(m, -9);
  return sign * std::ldexp(8 + m, e - 10);
}

// Non-negative finite magnitudes in increasing order, bit pattern = index.
inline const std::vector<double>& grid() {
  static const std::vector<double> g = [] {
    std::vector<double> v;
    for (int b = 0; b < 0x78; ++b) v.push_back(value(static_cast<std::uint8_t>(b)));
    return v;
  }();
  return g;
}

inline std::uint8_t with_sign(std::uint8_t mag, bool neg) { return static_cast<std::uint8_t>(mag | (neg ? 0x80 : 0)); }

// Rounds a value q > 0 given only cmp(c) = sign(c - q) for dyadic c.
// Returns the magnitude pattern, 0x78 meaning overflow to infinity.
inline std::uint8_t round_positive(const std::function<int(double)>& cmp, Mode m, bool neg) {
  const auto& g = grid();
  std::size_t hi = 0;
  while (hi < g.size() && cmp(g[hi]) < 0) ++hi;
  if (hi < g.size() && cmp(g[hi]) == 0) return static_cast<std::uint8_t>(hi);
  const double above = hi < g.size() ? g[hi] : 256.0;  // first power of two past the largest finite
  if (hi == g.size() && cmp(256.0) < 0) {
    // Beyond 2^8 every mode either overflows or clamps.
    const bool to_inf = m == Mode::RNE || m == Mode::RNA || (m == Mode::RTP && !neg) || (m == Mode::RTN && neg);
    return to_inf ? 0x78 : 0x77;
  }
  const std::size_t lo = hi - 1;
  const bool away = [&] {
    switch (m) {
      case Mode::RTZ: return false;
      case Mode::RTP: return !neg;
      case Mode::RTN: return neg;
      default: break;
    }
    const int c = cmp((g[lo] + above) / 2);
    if (c != 0) return c < 0;
    if (m == Mode::RNA) return true;
    return hi == g.size() || (hi & 1) == 0;
  }();
  return static_cast<std::uint8_t>(away ? hi : lo);
}

// Rounds a non-zero exact value of sign `neg` whose magnitude is compared by cmp.
inline std::uint8_t round_value(bool neg, const std::function<int(double)>& cmp_mag, Mode m) {
  std::uint8_t mag = round_positive(cmp_mag, m, neg);
  return with_sign(mag, neg);
}

inline std::uint8_t round_double(double q, Mode m, bool zero_negative) {
  if (q == 0) return with_sign(0, zero_negative);
  const bool neg = q < 0;
  const double a = std::fabs(q);
  return round_value(neg, [a](double c) { return c < a ? -1 : c > a ? 1 : 0; }, m);
}

inline bool sum_zero_negative(bool a_neg, bool b_neg, Mode m) { return a_neg && b_neg ? true : (a_neg != b_neg) && m == Mode::RTN; }

inline std::uint8_t add(std::uint8_t x, std::uint8_t y, Mode m) {
  if (is_nan(x) || is_nan(y)) return kNaN;
  if (is_inf(x) && is_inf(y)) return negative(x) == negative(y) ? x : kNaN;
  if (is_inf(x)) return x;
  if (is_inf(y)) return y;
  const double s = value(x) + value(y);
  if (s == 0) return with_sign(0, sum_zero_negative(negative(x), negative(y), m));
  return round_double(s, m, false);
}

inline std::uint8_t sub(std::uint8_t x, std::uint8_t y, Mode m) { return add(x, static_cast<std::uint8_t>(y ^ 0x80), m); }

inline std::uint8_t mul(std::uint8_t x, std::uint8_t y, Mode m) {
  if (is_nan(x) || is_nan(y)) return kNaN;
  const bool neg = negative(x) != negative(y);
  const bool xz = (x & 0x7f) == 0, yz = (y & 0x7f) == 0;
  if ((is_inf(x) && yz) || (is_inf(y) && xz)) return kNaN;
  if (is_inf(x) || is_inf(y)) return with_sign(0x78, neg);
  return round_double(value(x) * value(y), m, neg);
}

inline std::uint8_t div(std::uint8_t x, std::uint8_t y, Mode m) {
  if (is_nan(x) || is_nan(y)) return kNaN;
  const bool neg = negative(x) != negative(y);
  const bool xz = (x & 0x7f) == 0, yz = (y & 0x7f) == 0;
  if ((is_inf(x) && is_inf(y)) || (xz && yz)) return kNaN;
  if (is_inf(x) || yz) return with_sign(0x78, neg);
  if (is_inf(y) || xz) return with_sign(0, neg);
  const double a = std::fabs(value(x)), b = std::fabs(value(y));
  // c - a/b has the sign of c*b - a.
  return round_value(neg, [a, b](double c) { return c * b < a ? -1 : c * b > a ? 1 : 0; }, m);
}

inline std::uint8_t sqrt(std::uint8_t x, Mode m) {
  if (is_nan(x)) return kNaN;
  if ((x & 0x7f) == 0) return x;
  if (negative(x)) return kNaN;
  if (is_inf(x)) return x;
  const double a = value(x);
  return round_value(false, [a](double c) { return c * c < a ? -1 : c * c > a ? 1 : 0; }, m);
}

inline std::uint8_t fma(std::uint8_t x, std::uint8_t y, std::uint8_t z, Mode m) {
  if (is_nan(x) || is_nan(y) || is_nan(z)) return kNaN;
  const bool pneg = negative(x) != negative(y);
  const bool xz = (x & 0x7f) == 0, yz = (y & 0x7f) == 0;
  if ((is_inf(x) && yz) || (is_inf(y) && xz)) return kNaN;
  if (is_inf(x) || is_inf(y)) {
    if (is_inf(z) && negative(z) != pneg) return kNaN;
    return with_sign(0x78, pneg);
  }
  if (is_inf(z)) return z;
  const double s = value(x) * value(y) + value(z);
  const bool pzero = xz || yz;
  if (s == 0) {
    if (pzero && (z & 0x7f) == 0) return with_sign(0, sum_zero_negative(pneg, negative(z), m));
    return with_sign(0, m == Mode::RTN);
  }
  return round_double(s, m, false);
}

inline std::uint8_t round_to_integral(std::uint8_t x, Mode m) {
  if (is_nan(x)) return kNaN;
  if (is_inf(x)) return x;
  const double v = value(x);
  double r = 0;
  switch (m) {
    case Mode::RNE: {
      const int old = std::fegetround();
      std::fesetround(FE_TONEAREST);
      r = std::nearbyint(v);
      std::fesetround(old);
      break;
    }
    case Mode::RNA: r = std::round(v); break;
    case Mode::RTP: r = std::ceil(v); break;
    case Mode::RTN: r = std::floor(v); break;
    case Mode::RTZ: r = std::trunc(v); break;
  }
  return round_double(r, Mode::RNE, std::signbit(r));
}

// nullopt when the result is unspecified (NaN, infinity, out of range).
inline std::optional<std::int64_t> to_int(std::uint8_t x, unsigned width, bool is_signed) {
  if (is_nan(x) || is_inf(x)) return std::nullopt;
  const double t = std::trunc(value(x));
  const double lo = is_signed ? -std::ldexp(1, width - 1) : 0;
  const double hi = is_signed ? std::ldexp(1, width - 1) - 1 : std::ldexp(1, width) - 1;
  if (t < lo || t > hi) return std::nullopt;
  return static_cast<std::int64_t>(t);
}

inline std::uint8_t from_int(std::int64_t v, Mode m) { return round_double(static_cast<double>(v), m, false); }

inline bool lt(std::uint8_t x, std::uint8_t y) { return value(x) < value(y); }
inline bool le(std::uint8_t x, std::uint8_t y) { return value(x) <= value(y); }
inline bool eq(std::uint8_t x, std::uint8_t y) { return value(x) == value(y); }

}  // namespace ref8
