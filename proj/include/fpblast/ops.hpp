// Floating-point classification, comparison, conversion and arithmetic
// operators, each producing a bit-vector circuit.
//
// Every operator except abs and neg resolves NaN, infinity and zero operands
// before the generic path. NaN results are always the canonical NaN.
#pragma once

#include "fpblast/pipeline.hpp"

namespace fpblast {

namespace ops_detail {

inline void require_same_format(const FpBits& x, const FpBits& y, std::string_view op) {
  if (!(x.format() == y.format())) {
    throw Error(std::string(op) + ": operand formats differ (" + x.format().name() + " vs " + y.format().name() +
                ")");
  }
}

inline bv::Expr is_rm(const bv::Expr& rm, RoundingMode m) { return bv::eq(rm, mk_rounding_mode(m)); }

inline void require_rm(const bv::Expr& rm) {
  if (rm.width() != 3) throw Error("rounding mode must be a 3-bit vector, got width " + std::to_string(rm.width()));
}

inline bv::Expr signed_zero(const FpFormat& f, const bv::Expr& sign) {
  return bv::concat(sign, bv::mk_zero(f.eb() + f.sb()));
}
inline bv::Expr signed_inf(const FpFormat& f, const bv::Expr& sign) {
  return bv::concat(sign, bv::concat(bv::mk_ones(f.eb()), bv::mk_zero(f.sb())));
}
inline bv::Expr nan_bits(const FpFormat& f) { return mk_special(f, SpecialKind::NaN).bits(); }

// Saturating conversion of a non-negative amount to a shift operand of `width`.
inline bv::Expr shift_amount(const bv::Expr& amount, unsigned width) {
  using namespace bv;
  const unsigned aw = std::max(amount.width(), bits_for(width));
  const Expr a = resize_unsigned(amount, aw);
  const Expr limit = mk_const(aw, width);
  return resize_unsigned(ite(ugt(a, limit), limit, a), width);
}

struct Operand {
  bv::Expr sign;
  bv::Expr exponent;
  bv::Expr significand;  // normalized: top bit set unless zero
  bv::Expr zero;
};

// Sum of two finite operands with normalized significands of equal width. The
// result is an Unpacked value ready for rounding: one carry bit on top of the
// significand, three extra bits (guard, round, sticky) below it. An exact zero
// sum is +0, or -0 under RTN.
inline Unpacked add_core(const bv::Expr& rm, const Operand& x, const Operand& y, const FpFormat& f) {
  using namespace bv;
  const unsigned n = x.significand.width();
  if (y.significand.width() != n) throw Error("add_core: significand widths differ");
  const unsigned ew = std::max({x.exponent.width(), y.exponent.width(), bits_for(n + 5) + 1}) + 2;
  const Expr ex = resize_signed(x.exponent, ew);
  const Expr ey = resize_signed(y.exponent, ew);

  const Expr x_bigger =
      bvor(y.zero, bvand(bvnot(x.zero), bvor(sgt(ex, ey), bvand(eq(ex, ey), uge(x.significand, y.significand)))));
  const Expr big_sign = ite(x_bigger, x.sign, y.sign);
  const Expr small_sign = ite(x_bigger, y.sign, x.sign);
  const Expr big_exp = ite(x_bigger, ex, ey);
  const Expr small_exp = ite(x_bigger, ey, ex);
  const Expr big_sig = ite(x_bigger, x.significand, y.significand);
  const Expr small_sig = ite(x_bigger, y.significand, x.significand);
  const Expr small_zero = ite(x_bigger, y.zero, x.zero);

  const Expr a = concat(mk_zero(1), concat(big_sig, mk_zero(3)));
  const Expr b = concat(mk_zero(1), concat(small_sig, mk_zero(3)));
  const Expr distance = ite(small_zero, mk_zero(ew), sub(big_exp, small_exp));
  const Expr aligned = sticky_right_shift(b, distance);
  const Expr sum = ite(eq(big_sign, small_sign), add(a, aligned), sub(a, aligned));

  const Expr exact_zero = is_zero(sum);
  Unpacked u{ite(exact_zero, is_rm(rm, RoundingMode::RTN), big_sign),
             add(big_exp, mk_const(ew, 1)),
             sum,
             mk_false(),
             mk_false(),
             mk_false(),
             f};
  return u;
}

}  // namespace ops_detail

// --- classification ---------------------------------------------------------

inline bv::Expr fp_is(FpClassKind kind, const FpBits& x) {
  using namespace bv;
  const Unpacked u = unpack(x, false);
  switch (kind) {
    case FpClassKind::Normal:
      return bvand(msb(u.significand), bvnot(bvor(u.is_nan, u.is_inf)));
    case FpClassKind::Subnormal:
      return bvand(bvnot(msb(u.significand)), bvnot(u.is_zero));
    case FpClassKind::Zero: return u.is_zero;
    case FpClassKind::Inf: return u.is_inf;
    case FpClassKind::NaN: return u.is_nan;
    case FpClassKind::Negative: return bvand(u.sign, bvnot(u.is_nan));
    case FpClassKind::Positive: return bvand(bvnot(u.sign), bvnot(u.is_nan));
  }
  throw Error("fp_is: unknown class");
}

// --- comparison -------------------------------------------------------------

namespace ops_detail {

inline bv::Expr fp_lt(const FpBits& x, const FpBits& y) {
  using namespace bv;
  const FpFormat& f = x.format();
  const Expr nan = bvor(fp_is(FpClassKind::NaN, x), fp_is(FpClassKind::NaN, y));
  const Expr both_zero = bvand(fp_is(FpClassKind::Zero, x), fp_is(FpClassKind::Zero, y));
  const Expr mx = extract(x.bits(), f.eb() + f.sb() - 1, 0);
  const Expr my = extract(y.bits(), f.eb() + f.sb() - 1, 0);
  const Expr sx = x.sign(), sy = y.sign();
  const Expr ordered = bvor(bvand(sx, bvnot(sy)),
                            bvor(bvand(bvnot(bvor(sx, sy)), ult(mx, my)), bvand(bvand(sx, sy), ult(my, mx))));
  return bvand(bvnot(nan), bvand(bvnot(both_zero), ordered));
}

inline bv::Expr fp_eq(const FpBits& x, const FpBits& y) {
  using namespace bv;
  const Expr nan = bvor(fp_is(FpClassKind::NaN, x), fp_is(FpClassKind::NaN, y));
  const Expr both_zero = bvand(fp_is(FpClassKind::Zero, x), fp_is(FpClassKind::Zero, y));
  return bvand(bvnot(nan), bvor(eq(x.bits(), y.bits()), both_zero));
}

}  // namespace ops_detail

// le, gt and ge are built from lt and eq. Any NaN operand yields false.
inline bv::Expr fp_compare(FpCmpKind kind, const FpBits& x, const FpBits& y) {
  ops_detail::require_same_format(x, y, "fp_compare");
  switch (kind) {
    case FpCmpKind::Lt: return ops_detail::fp_lt(x, y);
    case FpCmpKind::Eq: return ops_detail::fp_eq(x, y);
    case FpCmpKind::Le: return bv::bvor(ops_detail::fp_lt(x, y), ops_detail::fp_eq(x, y));
    case FpCmpKind::Gt: return ops_detail::fp_lt(y, x);
    case FpCmpKind::Ge: return bv::bvor(ops_detail::fp_lt(y, x), ops_detail::fp_eq(y, x));
  }
  throw Error("fp_compare: unknown kind");
}

// --- sign manipulation ------------------------------------------------------

inline FpBits fp_abs(const FpBits& x) {
  const FpFormat& f = x.format();
  return {bv::concat(bv::mk_zero(1), bv::extract(x.bits(), f.eb() + f.sb() - 1, 0)), f};
}

inline FpBits fp_neg(const FpBits& x) {
  const FpFormat& f = x.format();
  return {bv::concat(bv::bvnot(x.sign()), bv::extract(x.bits(), f.eb() + f.sb() - 1, 0)), f};
}

// --- arithmetic -------------------------------------------------------------

inline FpBits fp_add(const bv::Expr& rm, const FpBits& x, const FpBits& y) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  require_same_format(x, y, "fp_add");
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, true);
  const Unpacked uy = unpack(y, true);

  const Unpacked sum = add_core(rm, {ux.sign, ux.exponent, ux.significand, ux.is_zero},
                                {uy.sign, uy.exponent, uy.significand, uy.is_zero}, f);
  const FpBits packed = pack(round(sum, rm, f), f);

  const Expr nan = bvor(bvor(ux.is_nan, uy.is_nan), bvand(bvand(ux.is_inf, uy.is_inf), bvxor(ux.sign, uy.sign)));
  const Expr zero_sign = ite(eq(ux.sign, uy.sign), ux.sign, is_rm(rm, RoundingMode::RTN));
  return {ite(nan, nan_bits(f),
              ite(ux.is_inf, x.bits(),
                  ite(uy.is_inf, y.bits(),
                      ite(bvand(ux.is_zero, uy.is_zero), signed_zero(f, zero_sign), packed.bits())))),
          f};
}

inline FpBits fp_sub(const bv::Expr& rm, const FpBits& x, const FpBits& y) {
  ops_detail::require_same_format(x, y, "fp_sub");
  return fp_add(rm, x, fp_neg(y));
}

inline FpBits fp_mul(const bv::Expr& rm, const FpBits& x, const FpBits& y) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  require_same_format(x, y, "fp_mul");
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, true);
  const Unpacked uy = unpack(y, true);
  const unsigned n = f.sb() + 1;

  const Expr sign = bvxor(ux.sign, uy.sign);
  const Expr product = mul(zext(ux.significand, n), zext(uy.significand, n));
  const unsigned ew = std::max(ux.exponent_width(), uy.exponent_width()) + 2;
  const Expr exp = add(add(resize_signed(ux.exponent, ew), resize_signed(uy.exponent, ew)), mk_const(ew, 1));
  const Unpacked raw{sign, exp, product, mk_false(), mk_false(), mk_false(), f};
  const FpBits packed = pack(round(raw, rm, f), f);

  const Expr nan = bvor(bvor(ux.is_nan, uy.is_nan),
                        bvor(bvand(ux.is_inf, uy.is_zero), bvand(ux.is_zero, uy.is_inf)));
  return {ite(nan, nan_bits(f),
              ite(bvor(ux.is_inf, uy.is_inf), signed_inf(f, sign),
                  ite(bvor(ux.is_zero, uy.is_zero), signed_zero(f, sign), packed.bits()))),
          f};
}

// Quotient digits come from a restoring long division on the significands,
// one compare-and-subtract per bit; the final remainder supplies the sticky bit.
inline FpBits fp_div(const bv::Expr& rm, const FpBits& x, const FpBits& y) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  require_same_format(x, y, "fp_div");
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, true);
  const Unpacked uy = unpack(y, true);
  const unsigned n = f.sb() + 1;
  const unsigned digits = f.sb() + 3;

  const Expr divisor = zext(uy.significand, 1);
  Expr rem = zext(ux.significand, 1);
  Expr quotient;
  for (unsigned i = 0; i < digits; ++i) {
    const Expr ge = uge(rem, divisor);
    quotient = quotient ? concat(quotient, ge) : ge;
    const Expr next = ite(ge, sub(rem, divisor), rem);
    rem = concat(extract(next, n - 1, 0), mk_zero(1));
  }
  const Expr sig = concat(quotient, redor(rem));

  const Expr sign = bvxor(ux.sign, uy.sign);
  const unsigned ew = std::max(ux.exponent_width(), uy.exponent_width()) + 2;
  const Expr exp = sub(resize_signed(ux.exponent, ew), resize_signed(uy.exponent, ew));
  const Unpacked raw{sign, exp, sig, mk_false(), mk_false(), mk_false(), f};
  const FpBits packed = pack(round(raw, rm, f), f);

  const Expr nan = bvor(bvor(ux.is_nan, uy.is_nan),
                        bvor(bvand(ux.is_zero, uy.is_zero), bvand(ux.is_inf, uy.is_inf)));
  return {ite(nan, nan_bits(f),
              ite(ux.is_inf, signed_inf(f, sign),
                  ite(uy.is_inf, signed_zero(f, sign),
                      ite(uy.is_zero, signed_inf(f, sign),
                          ite(ux.is_zero, signed_zero(f, sign), packed.bits()))))),
          f};
}

// x * y + z rounded once. The exact product (2 * (sb + 1) bits) is aligned
// against z and summed with three extra low bits.
inline FpBits fp_fma(const bv::Expr& rm, const FpBits& x, const FpBits& y, const FpBits& z) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  require_same_format(x, y, "fp_fma");
  require_same_format(x, z, "fp_fma");
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, true);
  const Unpacked uy = unpack(y, true);
  const Unpacked uz = unpack(z, true);
  const unsigned n = f.sb() + 1;

  const Expr product_sign = bvxor(ux.sign, uy.sign);
  const Expr product_zero = bvor(ux.is_zero, uy.is_zero);
  const Expr product = mul(zext(ux.significand, n), zext(uy.significand, n));
  const unsigned ew = std::max({ux.exponent_width(), uy.exponent_width(), uz.exponent_width()}) + 2;
  const Expr product_exp =
      add(add(resize_signed(ux.exponent, ew), resize_signed(uy.exponent, ew)), mk_const(ew, 1));
  const Expr low_top = bvnot(msb(product));
  const Expr norm_product = ite(low_top, shl(product, mk_const(2 * n, 1)), product);
  const Expr norm_exp = sub(product_exp, zext(low_top, ew - 1));

  const Unpacked sum = add_core(rm, {product_sign, norm_exp, norm_product, product_zero},
                                {uz.sign, resize_signed(uz.exponent, ew), concat(uz.significand, mk_zero(n)), uz.is_zero},
                                f);
  const FpBits packed = pack(round(sum, rm, f), f);

  const Expr product_inf = bvor(ux.is_inf, uy.is_inf);
  const Expr nan = bvor(bvor(bvor(ux.is_nan, uy.is_nan), uz.is_nan),
                        bvor(bvor(bvand(ux.is_inf, uy.is_zero), bvand(ux.is_zero, uy.is_inf)),
                             bvand(bvand(product_inf, uz.is_inf), bvxor(product_sign, uz.sign))));
  const Expr zero_sign = ite(eq(product_sign, uz.sign), uz.sign, is_rm(rm, RoundingMode::RTN));
  return {ite(nan, nan_bits(f),
              ite(product_inf, signed_inf(f, product_sign),
                  ite(uz.is_inf, z.bits(),
                      ite(bvand(product_zero, uz.is_zero), signed_zero(f, zero_sign), packed.bits())))),
          f};
}

// sqrt(m * 2^e) = root * 2^(e/2): the exponent is halved after making it even
// and the root comes from a restoring digit recurrence, two radicand bits per
// step.
inline FpBits fp_sqrt(const bv::Expr& rm, const FpBits& x) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, true);
  const unsigned sb = f.sb();
  const unsigned root_bits = sb + 2;

  const Expr odd = bit(ux.exponent, 0);
  const Expr m = ite(odd, concat(ux.significand, mk_zero(1)), zext(ux.significand, 1));
  const Expr radicand = concat(m, mk_zero(sb + 2));  // 2 * root_bits wide

  const unsigned rw = sb + 5;
  Expr rem = mk_zero(rw);
  Expr root = mk_zero(root_bits);
  for (unsigned step = 0; step < root_bits; ++step) {
    const unsigned i = root_bits - 1 - step;
    const Expr pair = extract(radicand, 2 * i + 1, 2 * i);
    const Expr shifted = concat(extract(rem, rw - 3, 0), pair);
    const Expr trial = concat(extract(resize_unsigned(root, rw), rw - 3, 0), mk_const(2, 1));
    const Expr ge = uge(shifted, trial);
    rem = ite(ge, sub(shifted, trial), shifted);
    root = concat(extract(root, root_bits - 2, 0), ge);
  }
  const Expr sig = concat(root, redor(rem));
  const Expr exp = ashr(ux.exponent, mk_const(ux.exponent_width(), 1));
  const Unpacked raw{mk_false(), exp, sig, mk_false(), mk_false(), mk_false(), f};
  const FpBits packed = pack(round(raw, rm, f), f);

  const Expr nan = bvor(ux.is_nan, bvand(ux.sign, bvnot(ux.is_zero)));
  return {ite(nan, nan_bits(f), ite(bvor(ux.is_zero, ux.is_inf), x.bits(), packed.bits())), f};
}

// Nearest integral value under rm. Values already integral, infinities and
// zeros pass through; a zero result keeps the operand's sign.
inline FpBits fp_round_to_integral(const bv::Expr& rm, const FpBits& x) {
  using namespace bv;
  using namespace ops_detail;
  require_rm(rm);
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, false);
  const unsigned n = f.sb() + 1;
  const unsigned ew = std::max(ux.exponent_width(), pipeline_detail::signed_width(-2, n + 2));
  const Expr e = resize_signed(ux.exponent, ew);
  const Expr integral = sge(e, mk_const(ew, f.sb()));

  // after shifting, bit 2 has weight 1, bit 1 is the guard and bit 0 the sticky
  const Expr fraction_bits = sub(mk_const(ew, f.sb()), e);
  const Expr scaled = sticky_right_shift(concat(ux.significand, mk_zero(2)), fraction_bits);
  const Expr whole = extract(scaled, n + 1, 2);
  const Expr inc = round_increment(rm, ux.sign, bit(scaled, 2), bit(scaled, 1), bit(scaled, 0));
  const Expr rounded = add(zext(whole, 1), zext(inc, n));
  const Unpacked raw{ux.sign, mk_const(ew, n), rounded, mk_false(), mk_false(), is_zero(rounded), f};
  const FpBits packed = pack(round(raw, rm, f), f);

  return {ite(ux.is_nan, nan_bits(f), ite(bvor(bvor(ux.is_inf, ux.is_zero), integral), x.bits(), packed.bits())),
          f};
}

// --- conversions ------------------------------------------------------------

namespace ops_detail {

inline bv::Expr fp_to_int(bv::Context& ctx, const FpBits& x, unsigned width, bool is_signed) {
  using namespace bv;
  if (width == 0) throw Error("fp_to_bv: output width must be at least 1");
  const FpFormat& f = x.format();
  const Unpacked ux = unpack(x, false);
  const unsigned n = f.sb() + 1;
  const unsigned work = std::max(width, n) + 2;
  const unsigned ew = std::max({ux.exponent_width(), bits_for(width) + 2, bits_for(f.sb()) + 2});
  const Expr e = resize_signed(ux.exponent, ew);
  const Expr sb = mk_const(ew, f.sb());

  const Expr m = resize_unsigned(ux.significand, work);
  const Expr whole = ite(sge(e, sb), shl(m, shift_amount(sub(e, sb), work)), lshr(m, shift_amount(sub(sb, e), work)));

  const Expr w = mk_const(ew, width);
  const Expr w1 = mk_const(ew, width - 1);
  Expr in_range;
  if (is_signed) {
    const Expr min_magnitude = shl(mk_const(work, 1), mk_const(work, width - 1));
    in_range = bvor(slt(e, w1), bvand(ux.sign, bvand(eq(e, w1), eq(whole, min_magnitude))));
  } else {
    in_range = bvand(slt(e, w), bvor(bvnot(ux.sign), is_zero(whole)));
  }
  const Expr value = extract(ite(ux.sign, neg(whole), whole), width - 1, 0);
  const Expr valid = bvand(bvnot(bvor(ux.is_nan, ux.is_inf)), in_range);
  return ite(valid, value, ctx.fresh("fpcast_fresh_", width));
}

}  // namespace ops_detail

// Truncating conversions. Values that do not fit (NaN, infinity, out of range)
// become a fresh unconstrained variable named fpcast_fresh_<n>.
inline bv::Expr fp_to_sbv(bv::Context& ctx, const FpBits& x, unsigned width) {
  return ops_detail::fp_to_int(ctx, x, width, true);
}
inline bv::Expr fp_to_ubv(bv::Context& ctx, const FpBits& x, unsigned width) {
  return ops_detail::fp_to_int(ctx, x, width, false);
}

inline FpBits fp_to_fp(const FpBits& x, const FpFormat& target, const bv::Expr& rm) {
  ops_detail::require_rm(rm);
  return pack(round(unpack(x, true), rm, target), target);
}

// Signed or unsigned integer to the nearest float under rm. Zero maps to +0.
inline FpBits sbv_to_fp(const bv::Expr& bits, bool is_signed, const FpFormat& f, const bv::Expr& rm) {
  using namespace bv;
  ops_detail::require_rm(rm);
  const unsigned w = bits.width();
  const Expr sign = is_signed ? msb(bits) : mk_false();
  const Expr magnitude = is_signed ? ite(sign, neg(bits), bits) : bits;
  const unsigned ew = pipeline_detail::signed_width(0, w) + 1;
  const Unpacked raw{sign, mk_const(ew, w - 1), magnitude, mk_false(), mk_false(), is_zero(bits), f};
  return pack(round(raw, rm, f), f);
}

}  // namespace fpblast
