// Packed floating-point values as bit-vectors: value constructors, rounding
// mode constants and reinterpretation to and from raw IEEE bit-vectors.
#pragma once

#include "fpblast/bitvec.hpp"
#include "fpblast/oracle.hpp"
#include "fpblast/sorts.hpp"

namespace fpblast {

// A width 1+eb+sb bit-vector read as sign | biased exponent | stored significand.
class FpBits {
 public:
  FpBits(bv::Expr bits, FpFormat format) : bits_(std::move(bits)), format_(format) {
    if (bits_.width() != format_.total_width()) {
      throw Error("FpBits: width " + std::to_string(bits_.width()) + " does not match format " + format_.name() +
                  " (" + std::to_string(format_.total_width()) + " bits)");
    }
  }

  const bv::Expr& bits() const { return bits_; }
  const FpFormat& format() const { return format_; }

  bv::Expr sign() const { return bv::msb(bits_); }
  bv::Expr exponent_field() const { return bv::extract(bits_, format_.eb() + format_.sb() - 1, format_.sb()); }
  bv::Expr significand_field() const { return bv::extract(bits_, format_.sb() - 1, 0); }

 private:
  bv::Expr bits_;
  FpFormat format_;
};

inline bv::Expr mk_rounding_mode(RoundingMode rm) { return bv::mk_const(3, static_cast<unsigned>(rm)); }

inline FpBits fp_constant(const FpFormat& f, const BigUint& pattern) {
  return {bv::mk_const(f.total_width(), pattern), f};
}

enum class SpecialKind { PosInf, NegInf, PosZero, NegZero, NaN };

inline FpBits mk_special(const FpFormat& f, SpecialKind kind) {
  switch (kind) {
    case SpecialKind::PosInf: return fp_constant(f, oracle::infinity(f, false));
    case SpecialKind::NegInf: return fp_constant(f, oracle::infinity(f, true));
    case SpecialKind::PosZero: return fp_constant(f, oracle::zero(f, false));
    case SpecialKind::NegZero: return fp_constant(f, oracle::zero(f, true));
    case SpecialKind::NaN: return fp_constant(f, oracle::canonical_nan(f));
  }
  throw Error("mk_special: unknown kind");
}

// Nearest representable value to a decimal or rational literal under rm.
inline FpBits mk_literal(const FpFormat& f, std::string_view text, RoundingMode rm) {
  return fp_constant(f, oracle::round_exact(oracle::parse_literal(text), f, rm));
}

inline bv::Expr fp_as_ieeebv(const FpBits& x) { return x.bits(); }

inline FpBits fp_from_ieeebv(const bv::Expr& bits, const FpFormat& f) {
  if (bits.width() != f.total_width()) {
    throw Error("fp_from_ieeebv: width " + std::to_string(bits.width()) + " does not match " + f.name() + " (" +
                std::to_string(f.total_width()) + " bits)");
  }
  return {bits, f};
}

}  // namespace fpblast
