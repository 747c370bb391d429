// Exact-arithmetic reference semantics for IEEE-754 binary formats.
//
// Every operation decodes packed patterns into exact rationals, computes the
// real result exactly, and rounds once by comparing against the neighbouring
// representable values. Nothing here touches the symbolic circuit code; the
// differential tests depend on that separation.
#pragma once

#include <optional>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "fpblast/sorts.hpp"

namespace fpblast::oracle {

using Rational = boost::multiprecision::cpp_rational;
using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

enum class ValueKind { Finite, PosInf, NegInf, NaN };

struct OracleValue {
  ValueKind kind = ValueKind::Finite;
  bool negative = false;  // sign of finite values, including zero
  Rational magnitude;     // |value|, lowest terms

  static OracleValue finite(bool negative, Rational magnitude) {
    return {ValueKind::Finite, negative, std::move(magnitude)};
  }
  static OracleValue from_signed(const Rational& v, bool negative_zero = false) {
    if (v == 0) return finite(negative_zero, 0);
    return finite(v < 0, v < 0 ? Rational(-v) : v);
  }
  static OracleValue inf(bool negative) { return {negative ? ValueKind::NegInf : ValueKind::PosInf, negative, 0}; }
  static OracleValue nan() { return {ValueKind::NaN, false, 0}; }

  bool is_nan() const { return kind == ValueKind::NaN; }
  bool is_inf() const { return kind == ValueKind::PosInf || kind == ValueKind::NegInf; }
  bool is_finite() const { return kind == ValueKind::Finite; }
  bool is_zero() const { return is_finite() && magnitude == 0; }
  Rational signed_value() const { return negative ? Rational(-magnitude) : magnitude; }
};

namespace detail {

inline Rational pow2(std::int64_t e) {
  if (e >= 0) return Rational(BigUint(1) << static_cast<unsigned>(e));
  return Rational(BigUint(1), BigUint(1) << static_cast<unsigned>(-e));
}

inline std::int64_t msb_index(const BigUint& v) { return static_cast<std::int64_t>(boost::multiprecision::msb(v)); }

// floor(log2(a)) for a > 0.
inline std::int64_t floor_log2(const Rational& a) {
  const BigUint n = numerator(a);
  const BigUint d = denominator(a);
  std::int64_t e = msb_index(n) - msb_index(d);
  if (a < pow2(e)) --e;
  return e;
}

inline std::int64_t floor_div2(std::int64_t e) { return e >= 0 ? e / 2 : -((-e + 1) / 2); }

// floor(a / 2^e) for a >= 0.
inline BigUint floor_scaled(const Rational& a, std::int64_t e) {
  const Rational s = a / pow2(e);
  return numerator(s) / denominator(s);
}

// A positive real to be rounded: a rational, or the square root of one.
struct Magnitude {
  Rational r;
  bool is_sqrt = false;

  // sign of (this - c) for c >= 0
  int compare(const Rational& c) const {
    const Rational rhs = is_sqrt ? Rational(c * c) : c;
    return r < rhs ? -1 : (r > rhs ? 1 : 0);
  }
  std::int64_t floor_log2() const {
    const std::int64_t e = detail::floor_log2(r);
    return is_sqrt ? floor_div2(e) : e;
  }
  // floor(this / 2^e)
  BigUint floor_scaled(std::int64_t e) const {
    if (!is_sqrt) return detail::floor_scaled(r, e);
    return boost::multiprecision::sqrt(detail::floor_scaled(r, 2 * e));
  }
};

}  // namespace detail

// Packed-pattern constructors.
inline BigUint pack_fields(const FpFormat& f, bool negative, const BigUint& exp_field, const BigUint& frac) {
  BigUint bits = exp_field << f.sb();
  bits |= frac;
  if (negative) bits |= BigUint(1) << (f.eb() + f.sb());
  return bits;
}
inline BigUint canonical_nan(const FpFormat& f) { return pack_fields(f, false, low_mask(f.eb()), 1); }
inline BigUint infinity(const FpFormat& f, bool negative) { return pack_fields(f, negative, low_mask(f.eb()), 0); }
inline BigUint zero(const FpFormat& f, bool negative) { return pack_fields(f, negative, 0, 0); }
inline BigUint max_finite(const FpFormat& f, bool negative) {
  return pack_fields(f, negative, low_mask(f.eb()) - 1, low_mask(f.sb()));
}

inline OracleValue decode(const BigUint& bits, const FpFormat& f) {
  if (bits < 0 || bits > low_mask(f.total_width())) throw Error("decode: pattern wider than format");
  const bool negative = boost::multiprecision::bit_test(bits, f.eb() + f.sb());
  const BigUint exp_field = (bits >> f.sb()) & low_mask(f.eb());
  const BigUint frac = bits & low_mask(f.sb());
  if (exp_field == low_mask(f.eb())) return frac == 0 ? OracleValue::inf(negative) : OracleValue::nan();
  const auto sb = static_cast<std::int64_t>(f.sb());
  if (exp_field == 0) return OracleValue::finite(negative, Rational(frac) * detail::pow2(f.emin() - sb));
  const BigUint significand = (BigUint(1) << f.sb()) | frac;
  const std::int64_t e = static_cast<std::int64_t>(exp_field) - f.bias();
  return OracleValue::finite(negative, Rational(significand) * detail::pow2(e - sb));
}

namespace detail {

inline BigUint overflow_result(const FpFormat& f, bool negative, RoundingMode rm) {
  switch (rm) {
    case RoundingMode::RNE:
    case RoundingMode::RNA: return infinity(f, negative);
    case RoundingMode::RTZ: return max_finite(f, negative);
    case RoundingMode::RTP: return negative ? max_finite(f, true) : infinity(f, false);
    case RoundingMode::RTN: return negative ? infinity(f, true) : max_finite(f, false);
  }
  return infinity(f, negative);
}

inline BigUint round_magnitude(const Magnitude& m, bool negative, const FpFormat& f, RoundingMode rm) {
  const auto sb = static_cast<std::int64_t>(f.sb());
  const std::int64_t e = m.floor_log2();
  if (e > f.emax()) return overflow_result(f, negative, rm);
  const std::int64_t q = std::max(e, f.emin()) - sb;  // exponent of one ulp
  const BigUint k = m.floor_scaled(q);
  const Rational lo = Rational(k) * pow2(q);
  const Rational hi = Rational(k + 1) * pow2(q);
  bool up = false;
  if (m.compare(lo) != 0) {
    switch (rm) {
      case RoundingMode::RTZ: up = false; break;
      case RoundingMode::RTP: up = !negative; break;
      case RoundingMode::RTN: up = negative; break;
      case RoundingMode::RNE:
      case RoundingMode::RNA: {
        const int c = m.compare((lo + hi) / 2);
        if (c != 0) up = c > 0;
        else up = rm == RoundingMode::RNA || boost::multiprecision::bit_test(k, 0);
        break;
      }
    }
  }
  BigUint sig = up ? BigUint(k + 1) : k;
  std::int64_t ulp_exp = q;
  if (sig == (BigUint(1) << (f.sb() + 1))) {
    sig >>= 1;
    ++ulp_exp;
  }
  if (sig == 0) return zero(f, negative);
  const BigUint hidden = BigUint(1) << f.sb();
  if (sig < hidden) return pack_fields(f, negative, 0, sig);
  const std::int64_t unbiased = ulp_exp + sb;
  if (unbiased > f.emax()) return infinity(f, negative);
  return pack_fields(f, negative, BigUint(unbiased + f.bias()), sig - hidden);
}

}  // namespace detail

// Nearest representable pattern to v under rm. NaN yields the canonical NaN.
inline BigUint round_exact(const OracleValue& v, const FpFormat& f, RoundingMode rm) {
  switch (v.kind) {
    case ValueKind::NaN: return canonical_nan(f);
    case ValueKind::PosInf: return infinity(f, false);
    case ValueKind::NegInf: return infinity(f, true);
    case ValueKind::Finite: break;
  }
  if (v.magnitude == 0) return zero(f, v.negative);
  return detail::round_magnitude({v.magnitude, false}, v.negative, f, rm);
}

inline BigUint round_exact(const Rational& v, const FpFormat& f, RoundingMode rm) {
  return round_exact(OracleValue::from_signed(v), f, rm);
}

// Literal grammar: ['-'] digits ['.' digits] [('e'|'E') ['-'] digits]
//              or  ['-'] digits '/' digits
// cpp_int reads a leading 0 as an octal prefix.
inline BigUint decimal_digits(const std::string& d) {
  const auto first = d.find_first_not_of('0');
  return first == std::string::npos ? BigUint(0) : BigUint(d.substr(first));
}

inline OracleValue parse_literal(std::string_view s) {
  const auto fail = [&](const std::string& why) -> OracleValue {
    throw Error("invalid literal '" + std::string(s) + "': " + why);
  };
  std::size_t i = 0;
  bool negative = false;
  if (i < s.size() && s[i] == '-') {
    negative = true;
    ++i;
  }
  const auto digits = [&](std::string& out) {
    const std::size_t start = i;
    while (i < s.size() && s[i] >= '0' && s[i] <= '9') out.push_back(s[i++]);
    return i > start;
  };
  std::string int_part, frac_part, exp_part, den_part;
  if (!digits(int_part)) return fail("expected digits");
  Rational value;
  if (i < s.size() && s[i] == '/') {
    ++i;
    if (!digits(den_part)) return fail("expected denominator digits");
    if (i != s.size()) return fail("trailing characters");
    const BigUint den = decimal_digits(den_part);
    if (den == 0) return fail("zero denominator");
    value = Rational(decimal_digits(int_part), den);
  } else {
    if (i < s.size() && s[i] == '.') {
      ++i;
      if (!digits(frac_part)) return fail("expected digits after '.'");
    }
    std::int64_t exp10 = 0;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
      ++i;
      bool exp_negative = false;
      if (i < s.size() && s[i] == '-') {
        exp_negative = true;
        ++i;
      }
      if (!digits(exp_part)) return fail("expected exponent digits");
      if (exp_part.size() > 6) return fail("exponent out of range");
      exp10 = std::stoll(exp_part);
      if (exp10 > 20000) return fail("exponent out of range");
      if (exp_negative) exp10 = -exp10;
    }
    if (i != s.size()) return fail("trailing characters");
    exp10 -= static_cast<std::int64_t>(frac_part.size());
    const BigUint mantissa = decimal_digits(int_part + frac_part);
    const BigUint scale = boost::multiprecision::pow(BigUint(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    value = exp10 < 0 ? Rational(mantissa, scale) : Rational(mantissa * scale);
  }
  return OracleValue::finite(negative, value);
}

// Full decimal expansion of a finite pattern; every binary float has one.
inline std::string exact_decimal(const BigUint& bits, const FpFormat& f) {
  const OracleValue v = decode(bits, f);
  if (!v.is_finite()) throw Error("exact_decimal: value is not finite");
  const BigUint num = numerator(v.magnitude);
  const BigUint den = denominator(v.magnitude);
  const auto k = static_cast<unsigned>(boost::multiprecision::msb(den));  // den = 2^k
  std::string digits = BigUint(num * boost::multiprecision::pow(BigUint(5), k)).str();
  if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
  std::string int_part = digits.substr(0, digits.size() - k);
  std::string frac_part = digits.substr(digits.size() - k);
  while (!frac_part.empty() && frac_part.back() == '0') frac_part.pop_back();
  std::string out = v.negative ? "-" : "";
  out += int_part;
  if (!frac_part.empty()) out += "." + frac_part;
  return out;
}

// --- operations on packed patterns -----------------------------------------

inline BigUint op_neg(const FpFormat& f, const BigUint& x) { return x ^ (BigUint(1) << (f.eb() + f.sb())); }
inline BigUint op_abs(const FpFormat& f, const BigUint& x) {
  return x & low_mask(f.eb() + f.sb());
}

namespace detail {

// Sign of an exact zero sum a + b (both finite). Same-signed zero operands keep
// their sign; every other exact zero is +0, or -0 under RTN.
inline bool zero_sum_sign(const OracleValue& a, const OracleValue& b, RoundingMode rm) {
  if (a.is_zero() && b.is_zero() && a.negative == b.negative) return a.negative;
  return rm == RoundingMode::RTN;
}

inline BigUint add_values(const FpFormat& f, RoundingMode rm, const OracleValue& a, const OracleValue& b) {
  if (a.is_nan() || b.is_nan()) return canonical_nan(f);
  if (a.is_inf() && b.is_inf()) return a.kind == b.kind ? round_exact(a, f, rm) : canonical_nan(f);
  if (a.is_inf()) return round_exact(a, f, rm);
  if (b.is_inf()) return round_exact(b, f, rm);
  const Rational sum = a.signed_value() + b.signed_value();
  if (sum == 0) return zero(f, zero_sum_sign(a, b, rm));
  return round_exact(sum, f, rm);
}

inline OracleValue negated(OracleValue v) {
  switch (v.kind) {
    case ValueKind::PosInf: return OracleValue::inf(true);
    case ValueKind::NegInf: return OracleValue::inf(false);
    case ValueKind::Finite: v.negative = !v.negative; return v;
    case ValueKind::NaN: return v;
  }
  return v;
}

}  // namespace detail

inline BigUint op_add(const FpFormat& f, RoundingMode rm, const BigUint& x, const BigUint& y) {
  return detail::add_values(f, rm, decode(x, f), decode(y, f));
}

inline BigUint op_sub(const FpFormat& f, RoundingMode rm, const BigUint& x, const BigUint& y) {
  const OracleValue a = decode(x, f), b = decode(y, f);
  if (a.is_nan() || b.is_nan()) return canonical_nan(f);
  if (a.is_inf() && b.is_inf()) return a.kind != b.kind ? round_exact(a, f, rm) : canonical_nan(f);
  if (a.is_inf()) return round_exact(a, f, rm);
  if (b.is_inf()) return infinity(f, !b.negative);
  const Rational diff = a.signed_value() - b.signed_value();
  if (diff == 0) {
    if (a.is_zero() && b.is_zero() && a.negative != b.negative) return zero(f, a.negative);
    return zero(f, rm == RoundingMode::RTN);
  }
  return round_exact(diff, f, rm);
}

inline BigUint op_mul(const FpFormat& f, RoundingMode rm, const BigUint& x, const BigUint& y) {
  const OracleValue a = decode(x, f), b = decode(y, f);
  const bool negative = a.negative != b.negative;
  if (a.is_nan() || b.is_nan()) return canonical_nan(f);
  if ((a.is_inf() && b.is_zero()) || (a.is_zero() && b.is_inf())) return canonical_nan(f);
  if (a.is_inf() || b.is_inf()) return infinity(f, negative);
  return round_exact(OracleValue::finite(negative, a.magnitude * b.magnitude), f, rm);
}

inline BigUint op_div(const FpFormat& f, RoundingMode rm, const BigUint& x, const BigUint& y) {
  const OracleValue a = decode(x, f), b = decode(y, f);
  const bool negative = a.negative != b.negative;
  if (a.is_nan() || b.is_nan()) return canonical_nan(f);
  if ((a.is_inf() && b.is_inf()) || (a.is_zero() && b.is_zero())) return canonical_nan(f);
  if (a.is_inf()) return infinity(f, negative);
  if (b.is_inf()) return zero(f, negative);
  if (b.is_zero()) return infinity(f, negative);
  return round_exact(OracleValue::finite(negative, a.magnitude / b.magnitude), f, rm);
}

// x * y + z with a single rounding.
inline BigUint op_fma(const FpFormat& f, RoundingMode rm, const BigUint& x, const BigUint& y, const BigUint& z) {
  const OracleValue a = decode(x, f), b = decode(y, f), c = decode(z, f);
  if (a.is_nan() || b.is_nan() || c.is_nan()) return canonical_nan(f);
  if ((a.is_inf() && b.is_zero()) || (a.is_zero() && b.is_inf())) return canonical_nan(f);
  const bool product_negative = a.negative != b.negative;
  if (a.is_inf() || b.is_inf()) {
    if (c.is_inf() && c.negative != product_negative) return canonical_nan(f);
    return infinity(f, product_negative);
  }
  if (c.is_inf()) return infinity(f, c.negative);
  const OracleValue product = OracleValue::finite(product_negative, a.magnitude * b.magnitude);
  return detail::add_values(f, rm, product, c);
}

inline BigUint op_sqrt(const FpFormat& f, RoundingMode rm, const BigUint& x) {
  const OracleValue a = decode(x, f);
  if (a.is_nan()) return canonical_nan(f);
  if (a.is_zero()) return zero(f, a.negative);
  if (a.negative) return canonical_nan(f);
  if (a.is_inf()) return infinity(f, false);
  return detail::round_magnitude({a.magnitude, true}, false, f, rm);
}

inline BigUint op_round_to_integral(const FpFormat& f, RoundingMode rm, const BigUint& x) {
  const OracleValue a = decode(x, f);
  if (a.is_nan()) return canonical_nan(f);
  if (!a.is_finite() || a.is_zero()) return x;
  const BigUint whole = numerator(a.magnitude) / denominator(a.magnitude);
  const Rational frac = a.magnitude - Rational(whole);
  bool up = false;
  if (frac != 0) {
    switch (rm) {
      case RoundingMode::RTZ: up = false; break;
      case RoundingMode::RTP: up = !a.negative; break;
      case RoundingMode::RTN: up = a.negative; break;
      case RoundingMode::RNA: up = frac >= Rational(1, 2); break;
      case RoundingMode::RNE:
        up = frac > Rational(1, 2) || (frac == Rational(1, 2) && boost::multiprecision::bit_test(whole, 0));
        break;
    }
  }
  const BigUint n = up ? BigUint(whole + 1) : whole;
  if (n == 0) return zero(f, a.negative);
  return round_exact(OracleValue::finite(a.negative, Rational(n)), f, rm);
}

inline bool op_classify(FpClassKind kind, const FpFormat& f, const BigUint& x) {
  const OracleValue a = decode(x, f);
  const bool tiny = a.is_finite() && a.magnitude < detail::pow2(f.emin());
  switch (kind) {
    case FpClassKind::Normal: return a.is_finite() && !a.is_zero() && !tiny;
    case FpClassKind::Subnormal: return a.is_finite() && !a.is_zero() && tiny;
    case FpClassKind::Zero: return a.is_zero();
    case FpClassKind::Inf: return a.is_inf();
    case FpClassKind::NaN: return a.is_nan();
    case FpClassKind::Negative: return !a.is_nan() && a.negative;
    case FpClassKind::Positive: return !a.is_nan() && !a.negative;
  }
  return false;
}

namespace detail {

// -1, 0, 1 ordering of two non-NaN values.
inline int order(const OracleValue& a, const OracleValue& b) {
  const auto rank = [](const OracleValue& v) { return v.kind == ValueKind::NegInf ? -1 : v.kind == ValueKind::PosInf ? 1 : 0; };
  if (rank(a) != rank(b)) return rank(a) < rank(b) ? -1 : 1;
  if (rank(a) != 0) return 0;
  const Rational va = a.signed_value(), vb = b.signed_value();
  return va < vb ? -1 : (va > vb ? 1 : 0);
}

}  // namespace detail

inline bool op_compare(FpCmpKind kind, const FpFormat& f, const BigUint& x, const BigUint& y) {
  const OracleValue a = decode(x, f), b = decode(y, f);
  if (a.is_nan() || b.is_nan()) return false;
  const int c = detail::order(a, b);
  switch (kind) {
    case FpCmpKind::Lt: return c < 0;
    case FpCmpKind::Le: return c <= 0;
    case FpCmpKind::Gt: return c > 0;
    case FpCmpKind::Ge: return c >= 0;
    case FpCmpKind::Eq: return c == 0;
  }
  return false;
}

// Truncating conversion to a width-bit integer; nullopt when the result is
// unrepresentable (NaN, infinity, out of range).
inline std::optional<BigUint> op_to_int(const FpFormat& f, const BigUint& x, unsigned width, bool is_signed) {
  const OracleValue a = decode(x, f);
  if (!a.is_finite()) return std::nullopt;
  const BigUint whole = numerator(a.magnitude) / denominator(a.magnitude);
  if (whole == 0) return BigUint(0);
  if (is_signed) {
    const BigUint limit = BigUint(1) << (width - 1);
    if (a.negative) {
      if (whole > limit) return std::nullopt;
      return (BigUint(1) << width) - whole;
    }
    if (whole >= limit) return std::nullopt;
    return whole;
  }
  if (a.negative || whole > low_mask(width)) return std::nullopt;
  return whole;
}

inline BigUint op_from_int(const FpFormat& f, RoundingMode rm, const BigUint& bits, unsigned width, bool is_signed) {
  if (bits == 0) return zero(f, false);
  if (is_signed && boost::multiprecision::bit_test(bits, width - 1)) {
    return round_exact(OracleValue::finite(true, Rational((BigUint(1) << width) - bits)), f, rm);
  }
  return round_exact(OracleValue::finite(false, Rational(bits)), f, rm);
}

inline BigUint op_to_fp(const FpFormat& from, const FpFormat& to, RoundingMode rm, const BigUint& x) {
  return round_exact(decode(x, from), to, rm);
}

}  // namespace fpblast::oracle
