// The unpack / operate / round / pack pipeline shared by the conversion and
// arithmetic operators.
//
// An Unpacked value denotes (-1)^sign * significand * 2^(exponent - (w - 1))
// where w is the significand width, i.e. the top significand bit carries
// weight 2^exponent. The exponent is an unbiased two's-complement vector.
#pragma once

#include <algorithm>

#include "fpblast/fpformat.hpp"

namespace fpblast {

struct Unpacked {
  bv::Expr sign;
  bv::Expr exponent;
  bv::Expr significand;
  bv::Expr is_nan;
  bv::Expr is_inf;
  bv::Expr is_zero;
  FpFormat format;

  unsigned exponent_width() const { return exponent.width(); }
  unsigned significand_width() const { return significand.width(); }
};

namespace pipeline_detail {

// Two's-complement width able to hold every value in [lo, hi].
inline unsigned signed_width(std::int64_t lo, std::int64_t hi) {
  unsigned w = 2;
  while (w < 63) {
    const std::int64_t min = -(std::int64_t{1} << (w - 1));
    const std::int64_t max = (std::int64_t{1} << (w - 1)) - 1;
    if (lo >= min && hi <= max) break;
    ++w;
  }
  return w;
}

}  // namespace pipeline_detail

// Right shift that ORs every shifted-out bit into bit 0. The amount is an
// unsigned vector of any width; amounts past the width saturate.
inline bv::Expr sticky_right_shift(const bv::Expr& sig, const bv::Expr& amount) {
  using namespace bv;
  const unsigned w = sig.width();
  const unsigned aw = std::max(amount.width(), bits_for(w));
  const Expr a = resize_unsigned(amount, aw);
  const Expr limit = mk_const(aw, w);
  const Expr sat = resize_unsigned(ite(ugt(a, limit), limit, a), std::max(w, aw));
  const Expr wide_sig = resize_unsigned(sig, std::max(w, aw));
  const Expr shifted = lshr(wide_sig, sat);
  const Expr lost = ne(shl(shifted, sat), wide_sig);
  const Expr out = resize_unsigned(shifted, w);
  return bvor(out, zext(lost, w - 1));
}

// Whether to add one ulp given the bits around the rounding point. Encodings
// outside the five modes behave as RNE.
inline bv::Expr round_increment(const bv::Expr& rm, const bv::Expr& sign, const bv::Expr& lsb,
                                const bv::Expr& guard, const bv::Expr& sticky) {
  using namespace bv;
  const Expr inexact = bvor(guard, sticky);
#ifdef FPBLAST_MUTATE_RNE_TIE
  // Deliberately broken tie rule (ties to odd) for harness self-tests.
  const Expr rne = bvand(guard, bvor(sticky, bvnot(lsb)));
#else
  const Expr rne = bvand(guard, bvor(sticky, lsb));
#endif
  const Expr rna = guard;
  const Expr rtp = bvand(bvnot(sign), inexact);
  const Expr rtn = bvand(sign, inexact);
  const auto is = [&](RoundingMode m) { return eq(rm, mk_rounding_mode(m)); };
  return ite(is(RoundingMode::RNA), rna,
             ite(is(RoundingMode::RTP), rtp,
                 ite(is(RoundingMode::RTN), rtn, ite(is(RoundingMode::RTZ), mk_false(), rne))));
}

// Split a packed value into sign, unbiased exponent and significand with the
// hidden bit made explicit. With normalize_subnormals, subnormal significands
// are shifted up until the hidden bit is set and the exponent drops below emin.
inline Unpacked unpack(const FpBits& x, bool normalize_subnormals) {
  using namespace bv;
  const FpFormat& f = x.format();
  const Expr exp_field = x.exponent_field();
  const Expr frac = x.significand_field();
  const Expr exp_zero = is_zero(exp_field);
  const Expr exp_ones = is_ones(exp_field);
  const Expr frac_zero = is_zero(frac);

  Unpacked u{x.sign(),
             {},
             {},
             bvand(exp_ones, bvnot(frac_zero)),
             bvand(exp_ones, frac_zero),
             bvand(exp_zero, frac_zero),
             f};

  const auto sb = static_cast<std::int64_t>(f.sb());
  const unsigned ew = std::max(f.eb() + 2, pipeline_detail::signed_width(f.emin() - sb - 1, f.emax() + 1));
  const Expr biased = zext(exp_field, ew - f.eb());
  const Expr exp = ite(exp_zero, mk_sconst(ew, f.emin()), sub(biased, mk_const(ew, f.bias())));
  const Expr sig = concat(bvnot(exp_zero), frac);

  if (!normalize_subnormals) {
    u.exponent = exp;
    u.significand = sig;
    return u;
  }
  const Expr subnormal = bvand(exp_zero, bvnot(frac_zero));
  const Expr clz = count_leading_zeros(sig);
  u.significand = ite(subnormal, shl(sig, resize_unsigned(clz, sig.width())), sig);
  u.exponent = ite(subnormal, sub(exp, resize_unsigned(clz, ew)), exp);
  return u;
}

// Round an extended significand into `target`. The input significand may be
// of any width and need not be normalized; its lowest bits act as guard and
// sticky. Overflow and underflow produce the IEEE default results.
inline Unpacked round(const Unpacked& u, const bv::Expr& rm, const FpFormat& target) {
  using namespace bv;
  using pipeline_detail::signed_width;
  if (rm.width() != 3) throw Error("round: rounding mode must be a 3-bit vector");
  const unsigned sb = target.sb();

  Expr sig = u.significand;
  if (sig.width() < sb + 3) sig = concat(sig, mk_zero(sb + 3 - sig.width()));
  const unsigned w = sig.width();

  const unsigned ew = std::max({u.exponent.width(), bits_for(w) + 1,
                                signed_width(target.emin(), target.emax() + 1)}) + 3;
  const Expr exp = sext(u.exponent, ew - u.exponent.width());
  const Expr sig_zero = is_zero(sig);

  // normalize
  const Expr clz = count_leading_zeros(sig);
  const Expr norm_sig = shl(sig, resize_unsigned(clz, w));
  const Expr norm_exp = sub(exp, resize_unsigned(clz, ew));

  // subnormal range: shift right until the exponent reaches emin
  const Expr emin = mk_sconst(ew, target.emin());
  const Expr below = slt(norm_exp, emin);
  const Expr shift = ite(below, sub(emin, norm_exp), mk_zero(ew));
  const Expr den_sig = sticky_right_shift(norm_sig, shift);
  const Expr den_exp = ite(below, emin, norm_exp);

  // guard, sticky and the increment decision
  const Expr top = extract(den_sig, w - 1, w - sb - 1);
  const Expr lsb = bit(den_sig, w - sb - 1);
  const Expr guard = bit(den_sig, w - sb - 2);
  const Expr sticky = redor(extract(den_sig, w - sb - 3, 0));
  const Expr inc = round_increment(rm, u.sign, lsb, guard, sticky);
  const Expr rounded = add(zext(top, 1), zext(inc, sb + 1));
  const Expr carry = msb(rounded);
  const Expr r_sig = ite(carry, extract(rounded, sb + 1, 1), extract(rounded, sb, 0));
  const Expr r_exp = ite(carry, add(den_exp, mk_const(ew, 1)), den_exp);

  // overflow
  const Expr special = bvor(u.is_nan, bvor(u.is_inf, bvor(u.is_zero, sig_zero)));
  const Expr overflow = bvand(bvnot(special), sgt(r_exp, mk_sconst(ew, target.emax())));
  const auto is = [&](RoundingMode m) { return eq(rm, mk_rounding_mode(m)); };
  const Expr to_inf = ite(is(RoundingMode::RTZ), mk_false(),
                          ite(is(RoundingMode::RTP), bvnot(u.sign),
                              ite(is(RoundingMode::RTN), u.sign, mk_true())));

  Unpacked out{u.sign, {}, {}, u.is_nan, {}, {}, target};
  out.is_inf = bvand(bvnot(u.is_nan), bvor(u.is_inf, bvand(overflow, to_inf)));
  out.is_zero = bvand(bvnot(u.is_nan), bvand(bvnot(out.is_inf), bvor(u.is_zero, is_zero(r_sig))));
  out.significand = ite(overflow, mk_ones(sb + 1), r_sig);
  out.exponent = ite(overflow, mk_sconst(ew, target.emax()), r_exp);
  return out;
}

// Concatenate sign, biased exponent and stored significand. Flags override
// the fields: NaN packs to the canonical NaN, infinity and zero keep the sign.
// Significands normalized below emin are shifted back into subnormal form.
inline FpBits pack(const Unpacked& u, const FpFormat& f) {
  using namespace bv;
  if (u.significand.width() != f.sb() + 1) {
    throw Error("pack: significand width " + std::to_string(u.significand.width()) + ", expected " +
                std::to_string(f.sb() + 1));
  }
  const unsigned ew = std::max(u.exponent.width(), pipeline_detail::signed_width(f.emin(), 2 * f.bias() + 1) + 1);
  const Expr exp = sext(u.exponent, ew - u.exponent.width());
  const Expr emin = mk_sconst(ew, f.emin());
  const Expr below = slt(exp, emin);
  const Expr sig = ite(below, lshr(resize_unsigned(u.significand, std::max(ew, f.sb() + 1)),
                                   resize_unsigned(sub(emin, exp), std::max(ew, f.sb() + 1))),
                       resize_unsigned(u.significand, std::max(ew, f.sb() + 1)));
  const Expr hidden = bit(sig, f.sb());
  const Expr biased = extract(add(exp, mk_const(ew, f.bias())), f.eb() - 1, 0);
  const Expr exp_field = ite(bvand(hidden, bvnot(below)), biased, mk_zero(f.eb()));
  const Expr finite = concat(u.sign, concat(exp_field, extract(sig, f.sb() - 1, 0)));

  const Expr nan = mk_special(f, SpecialKind::NaN).bits();
  const Expr inf = concat(u.sign, concat(mk_ones(f.eb()), mk_zero(f.sb())));
  const Expr zero = concat(u.sign, mk_zero(f.eb() + f.sb()));
  return {ite(u.is_nan, nan, ite(u.is_inf, inf, ite(u.is_zero, zero, finite))), f};
}

}  // namespace fpblast
