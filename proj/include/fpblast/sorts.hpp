// Floating-point sorts and the shared vocabulary of rounding modes,
// classification kinds and comparison kinds.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "fpblast/bitvec.hpp"

namespace fpblast {

// IEEE-754 binary interchange format. sb counts stored significand bits; the
// hidden bit is not included, so a packed value has 1 + eb + sb bits.
class FpFormat {
 public:
  static constexpr unsigned kMaxExponentBits = 30;
  static constexpr unsigned kMaxSignificandBits = 1u << 16;

  FpFormat(unsigned eb, unsigned sb) : eb_(eb), sb_(sb) {
    if (eb < 2) throw Error("mk_format: exponent width must be at least 2, got " + std::to_string(eb));
    if (sb < 1) throw Error("mk_format: significand width must be at least 1, got " + std::to_string(sb));
    if (eb > kMaxExponentBits) throw Error("mk_format: exponent width above " + std::to_string(kMaxExponentBits));
    if (sb > kMaxSignificandBits) throw Error("mk_format: significand width too large");
  }

  static FpFormat fp8() { return {4, 3}; }
  static FpFormat fp16() { return {5, 10}; }
  static FpFormat fp32() { return {8, 23}; }
  static FpFormat fp64() { return {11, 52}; }
  static FpFormat fp128() { return {15, 112}; }

  // Named formats (fp8, fp16, fp32, fp64, fp128).
  static std::optional<FpFormat> by_name(std::string_view name) {
    if (name == "fp8") return fp8();
    if (name == "fp16") return fp16();
    if (name == "fp32") return fp32();
    if (name == "fp64") return fp64();
    if (name == "fp128") return fp128();
    return std::nullopt;
  }

  unsigned eb() const { return eb_; }
  unsigned sb() const { return sb_; }
  unsigned total_width() const { return 1 + eb_ + sb_; }
  std::int64_t bias() const { return (std::int64_t{1} << (eb_ - 1)) - 1; }
  std::int64_t emax() const { return bias(); }
  std::int64_t emin() const { return 1 - bias(); }

  std::string name() const {
    for (auto n : {"fp8", "fp16", "fp32", "fp64", "fp128"}) {
      if (by_name(n) == *this) return n;
    }
    return "fp(" + std::to_string(eb_) + "," + std::to_string(sb_) + ")";
  }

  friend bool operator==(const FpFormat&, const FpFormat&) = default;

 private:
  unsigned eb_;
  unsigned sb_;
};

inline FpFormat mk_format(unsigned eb, unsigned sb) { return {eb, sb}; }

// Values double as the 3-bit symbolic encoding.
enum class RoundingMode : std::uint8_t { RNE = 0, RNA = 1, RTP = 2, RTN = 3, RTZ = 4 };

inline constexpr std::array<RoundingMode, 5> kAllRoundingModes = {
    RoundingMode::RNE, RoundingMode::RNA, RoundingMode::RTP, RoundingMode::RTN, RoundingMode::RTZ};

inline std::string_view rounding_mode_name(RoundingMode rm) {
  switch (rm) {
    case RoundingMode::RNE: return "RNE";
    case RoundingMode::RNA: return "RNA";
    case RoundingMode::RTP: return "RTP";
    case RoundingMode::RTN: return "RTN";
    case RoundingMode::RTZ: return "RTZ";
  }
  return "RNE";
}

// Accepts the short names and the SMT-LIB long names.
inline std::optional<RoundingMode> parse_rounding_mode(std::string_view s) {
  if (s == "RNE" || s == "roundNearestTiesToEven") return RoundingMode::RNE;
  if (s == "RNA" || s == "roundNearestTiesToAway") return RoundingMode::RNA;
  if (s == "RTP" || s == "roundTowardPositive") return RoundingMode::RTP;
  if (s == "RTN" || s == "roundTowardNegative") return RoundingMode::RTN;
  if (s == "RTZ" || s == "roundTowardZero") return RoundingMode::RTZ;
  return std::nullopt;
}

enum class FpClassKind { Normal, Subnormal, Zero, Inf, NaN, Negative, Positive };

inline constexpr std::array<FpClassKind, 7> kAllClassKinds = {
    FpClassKind::Normal, FpClassKind::Subnormal, FpClassKind::Zero,    FpClassKind::Inf,
    FpClassKind::NaN,    FpClassKind::Negative,  FpClassKind::Positive};

inline std::string_view class_kind_name(FpClassKind k) {
  switch (k) {
    case FpClassKind::Normal: return "isNormal";
    case FpClassKind::Subnormal: return "isSubnormal";
    case FpClassKind::Zero: return "isZero";
    case FpClassKind::Inf: return "isInfinite";
    case FpClassKind::NaN: return "isNaN";
    case FpClassKind::Negative: return "isNegative";
    case FpClassKind::Positive: return "isPositive";
  }
  return "?";
}

enum class FpCmpKind { Lt, Le, Gt, Ge, Eq };

inline constexpr std::array<FpCmpKind, 5> kAllCmpKinds = {FpCmpKind::Lt, FpCmpKind::Le, FpCmpKind::Gt,
                                                          FpCmpKind::Ge, FpCmpKind::Eq};

inline std::string_view cmp_kind_name(FpCmpKind k) {
  switch (k) {
    case FpCmpKind::Lt: return "lt";
    case FpCmpKind::Le: return "leq";
    case FpCmpKind::Gt: return "gt";
    case FpCmpKind::Ge: return "geq";
    case FpCmpKind::Eq: return "eq";
  }
  return "?";
}

}  // namespace fpblast
