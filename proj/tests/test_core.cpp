// Bit-vector layer, rational oracle and the unpack/round/pack pipeline.
#include <gtest/gtest.h>

#include <random>

#include "fpblast/fpblast.hpp"
#include "ref8.hpp"

using namespace fpblast;
using bv::Expr;
using bv::Kind;

namespace {

std::uint64_t mask(unsigned w) { return w >= 64 ? ~0ULL : (1ULL << w) - 1; }

std::int64_t as_signed(std::uint64_t v, unsigned w) {
  return (v >> (w - 1)) & 1 ? static_cast<std::int64_t>(v | ~mask(w)) : static_cast<std::int64_t>(v);
}

// SMT-LIB QF_BV semantics, written out directly.
std::uint64_t ref_eval(const Expr& e, const std::map<std::string, std::uint64_t>& env) {
  const unsigned w = e.width();
  const auto args = e.args();
  auto a = [&](std::size_t i) { return ref_eval(args[i], env); };
  auto aw = [&](std::size_t i) { return args[i].width(); };
  switch (e.kind()) {
    case Kind::Const: return static_cast<std::uint64_t>(e.value());
    case Kind::Var: return env.at(e.name());
    case Kind::Concat: return (a(0) << aw(1)) | a(1);
    case Kind::Extract: return (a(0) >> e.lo()) & mask(w);
    case Kind::ZeroExtend: return a(0);
    case Kind::SignExtend: return static_cast<std::uint64_t>(as_signed(a(0), aw(0))) & mask(w);
    case Kind::Not: return ~a(0) & mask(w);
    case Kind::And: return a(0) & a(1);
    case Kind::Or: return a(0) | a(1);
    case Kind::Xor: return a(0) ^ a(1);
    case Kind::Neg: return (0 - a(0)) & mask(w);
    case Kind::Add: return (a(0) + a(1)) & mask(w);
    case Kind::Sub: return (a(0) - a(1)) & mask(w);
    case Kind::Mul: return (a(0) * a(1)) & mask(w);
    case Kind::Udiv: return a(1) == 0 ? mask(w) : a(0) / a(1);
    case Kind::Urem: return a(1) == 0 ? a(0) : a(0) % a(1);
    case Kind::Shl: return a(1) >= w ? 0 : (a(0) << a(1)) & mask(w);
    case Kind::Lshr: return a(1) >= w ? 0 : a(0) >> a(1);
    case Kind::Ashr: {
      const std::int64_t s = as_signed(a(0), w);
      return static_cast<std::uint64_t>(a(1) >= w ? (s < 0 ? -1 : 0) : s >> a(1)) & mask(w);
    }
    case Kind::Eq: return a(0) == a(1);
    case Kind::Ult: return a(0) < a(1);
    case Kind::Ule: return a(0) <= a(1);
    case Kind::Slt: return as_signed(a(0), aw(0)) < as_signed(a(1), aw(1));
    case Kind::Sle: return as_signed(a(0), aw(0)) <= as_signed(a(1), aw(1));
    case Kind::Ite: return a(0) ? a(1) : a(2);
    case Kind::RedOr: return a(0) != 0;
  }
  return 0;
}

class ExprGen {
 public:
  ExprGen(bv::Context& ctx, std::uint64_t seed) : ctx_(ctx), rng_(seed) {}

  Expr gen(unsigned w, int depth) {
    if (depth == 0 || pick(5) == 0) return leaf(w);
    switch (pick(14)) {
      case 0: return bv::bvnot(gen(w, depth - 1));
      case 1: return bv::neg(gen(w, depth - 1));
      case 2: {
        const Expr x = gen(w, depth - 1), y = gen(w, depth - 1);
        switch (pick(11)) {
          case 0: return bv::bvand(x, y);
          case 1: return bv::bvor(x, y);
          case 2: return bv::bvxor(x, y);
          case 3: return bv::add(x, y);
          case 4: return bv::sub(x, y);
          case 5: return bv::mul(x, y);
          case 6: return bv::udiv(x, y);
          case 7: return bv::urem(x, y);
          case 8: return bv::shl(x, y);
          case 9: return bv::lshr(x, y);
          default: return bv::ashr(x, y);
        }
      }
      case 3:
        if (w > 1) {
          const unsigned lo_w = 1 + pick(w - 1);
          return bv::concat(gen(w - lo_w, depth - 1), gen(lo_w, depth - 1));
        }
        break;
      case 4: {
        const unsigned extra = pick(4);
        const unsigned lo = pick(3);
        return bv::extract(gen(w + extra + lo, depth - 1), lo + w - 1, lo);
      }
      case 5:
        if (w > 1) return ext(w, depth, false);
        break;
      case 6:
        if (w > 1) return ext(w, depth, true);
        break;
      case 7: return bv::ite(gen(1, depth - 1), gen(w, depth - 1), gen(w, depth - 1));
      case 8:
        if (w == 1) {
          const unsigned ow = 1 + pick(8);
          const Expr x = gen(ow, depth - 1), y = gen(ow, depth - 1);
          switch (pick(5)) {
            case 0: return bv::eq(x, y);
            case 1: return bv::ult(x, y);
            case 2: return bv::ule(x, y);
            case 3: return bv::slt(x, y);
            default: return bv::sle(x, y);
          }
        }
        break;
      case 9:
        if (w == 1) return bv::redor(gen(1 + pick(8), depth - 1));
        break;
      default: break;
    }
    return bv::add(gen(w, depth - 1), leaf(w));
  }

 private:
  Expr ext(unsigned w, int depth, bool sign) {
    const unsigned inner = 1 + pick(w - 1);
    const Expr x = gen(inner, depth - 1);
    return sign ? bv::sext(x, w - inner) : bv::zext(x, w - inner);
  }
  Expr leaf(unsigned w) {
    if (pick(3) == 0) return bv::mk_const(w, rng_() & mask(w));
    return ctx_.var("v" + std::to_string(w) + "_" + std::to_string(pick(2)), w);
  }
  unsigned pick(unsigned n) { return static_cast<unsigned>(rng_() % n); }

  bv::Context& ctx_;
  std::mt19937_64 rng_;
};

std::map<std::string, std::uint64_t> random_env(const std::vector<Expr>& roots, std::mt19937_64& rng) {
  std::map<std::string, std::uint64_t> env;
  for (const auto& [name, w] : bv::free_variables(roots)) env[name] = rng() & mask(w);
  return env;
}

bv::Expr fix_inputs(bv::Context& ctx, const std::vector<Expr>& roots, const std::map<std::string, std::uint64_t>& env) {
  std::vector<Expr> eqs;
  for (const auto& [name, w] : bv::free_variables(roots)) {
    eqs.push_back(bv::eq(ctx.var(name, w), bv::mk_const(w, env.at(name))));
  }
  return bv::all_of(eqs);
}

}  // namespace

TEST(BitVec, ConstantFoldingMatchesSemantics) {
  EXPECT_EQ(bv::udiv(bv::mk_const(8, 7), bv::mk_zero(8)).value(), 255);
  EXPECT_EQ(bv::urem(bv::mk_const(8, 7), bv::mk_zero(8)).value(), 7);
  EXPECT_EQ(bv::ashr(bv::mk_const(8, 0x80), bv::mk_const(8, 9)).value(), 0xff);
  EXPECT_EQ(bv::shl(bv::mk_const(8, 1), bv::mk_const(8, 8)).value(), 0);
  EXPECT_EQ(bv::extract(bv::mk_const(8, 0xa5), 7, 4).value(), 0xa);
  EXPECT_EQ(bv::sext(bv::mk_const(4, 0x8), 4).value(), 0xf8);
  EXPECT_EQ(bv::concat(bv::mk_const(4, 0xa), bv::mk_const(4, 5)).value(), 0xa5);
  EXPECT_EQ(bv::slt(bv::mk_const(4, 0x8), bv::mk_const(4, 7)).value(), 1);
  EXPECT_EQ(bv::count_leading_zeros(bv::mk_const(8, 0x10)).value(), 3);
  EXPECT_EQ(bv::count_leading_zeros(bv::mk_zero(8)).value(), 8);
}

TEST(BitVec, ConstructorsRejectBadWidths) {
  bv::Context ctx;
  EXPECT_THROW(bv::add(ctx.var("a", 4), ctx.var("b", 5)), Error);
  EXPECT_THROW(bv::extract(ctx.var("a", 4), 4, 0), Error);
  EXPECT_THROW(bv::ite(ctx.var("a", 4), ctx.var("a", 4), ctx.var("a", 4)), Error);
  EXPECT_THROW(ctx.var("a", 5), Error);
  EXPECT_THROW(bv::mk_const(0, 0), Error);
}

TEST(BitVec, FreshNamesAvoidDeclaredNames) {
  bv::Context ctx;
  ctx.var("t0", 3);
  const Expr f = ctx.fresh("t", 3);
  EXPECT_NE(f.name(), "t0");
  EXPECT_EQ(ctx.fresh_variables().size(), 1u);
}

TEST(BitVec, EvaluatorsAgreeWithReferenceSemantics) {
  bv::Context ctx;
  ExprGen gen(ctx, 7);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 400; ++i) {
    const unsigned w = 1 + static_cast<unsigned>(rng() % 24);
    const Expr e = gen.gen(w, 4);
    const std::vector<Expr> roots{e};
    for (int k = 0; k < 5; ++k) {
      const auto env = random_env(roots, rng);
      const std::uint64_t want = ref_eval(e, env);

      bv::Evaluator words({e});
      for (const auto& [name, idx] : words.inputs()) words.set(idx, env.at(name));
      words.run();
      ASSERT_TRUE(words.uses_words());
      ASSERT_EQ(words.word(0), want) << "expr #" << i;

      // A 65-bit root forces the arbitrary-precision path.
      bv::Evaluator wide({bv::zext(e, 65)});
      ASSERT_FALSE(wide.uses_words());
      for (const auto& [name, idx] : wide.inputs()) wide.set(idx, BigUint(env.at(name)));
      wide.run();
      ASSERT_EQ(wide.big(0), BigUint(want)) << "expr #" << i;
    }
  }
}

TEST(BitVec, CnfEncodingMatchesReferenceSemantics) {
  bv::Context ctx;
  ExprGen gen(ctx, 23);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 120; ++i) {
    const unsigned w = 1 + static_cast<unsigned>(rng() % 10);
    const Expr e = gen.gen(w, 3);
    const std::vector<Expr> roots{e};
    const auto env = random_env(roots, rng);
    const std::uint64_t want = ref_eval(e, env);
    const Expr fixed = fix_inputs(ctx, roots, env);

    const auto sat = bv::DpllSolver(bv::to_cnf(bv::bvand(fixed, bv::eq(e, bv::mk_const(w, want))))).solve();
    ASSERT_TRUE(sat.has_value()) << "expr #" << i;
    const auto unsat = bv::DpllSolver(bv::to_cnf(bv::bvand(fixed, bv::ne(e, bv::mk_const(w, want))))).solve();
    ASSERT_FALSE(unsat.has_value()) << "expr #" << i;
  }
}

TEST(BitVec, BruteForceAgreesWithDpll) {
  bv::Context ctx;
  ExprGen gen(ctx, 99);
  for (int i = 0; i < 80; ++i) {
    const Expr e = gen.gen(1, 4);
    const auto vars = bv::free_variables(std::span<const Expr>(&e, 1));
    unsigned bits = 0;
    for (const auto& [n, w] : vars) bits += w;
    if (bits > 16) continue;
    const bv::SatResult brute = bv::brute_force_sat(e, 16);
    const auto dpll = bv::DpllSolver(bv::to_cnf(e)).solve();
    ASSERT_EQ(brute.status == bv::SatStatus::Sat, dpll.has_value()) << "expr #" << i;
    if (brute.model) {
      ASSERT_EQ(bv::eval(e, *brute.model).value, 1);
    }
  }
}

TEST(BitVec, BruteForceRespectsBudget) {
  bv::Context ctx;
  const Expr e = bv::eq(ctx.var("a", 16), ctx.var("b", 16));
  const bv::SatResult r = bv::brute_force_sat(e, 20);
  EXPECT_EQ(r.status, bv::SatStatus::Unknown);
  EXPECT_FALSE(r.model.has_value());
}

// --- oracle ---------------------------------------------------------------

namespace {

const FpFormat kFp8 = FpFormat::fp8();

ref8::Mode ref_mode(RoundingMode rm) { return static_cast<ref8::Mode>(static_cast<int>(rm)); }

std::uint8_t u8(const BigUint& v) { return static_cast<std::uint8_t>(v); }

}  // namespace

TEST(Oracle, ReferenceGridIsConsistent) {
  ASSERT_EQ(ref8::grid().size(), 120u);
  EXPECT_EQ(ref8::grid().back(), 240.0);
  EXPECT_EQ(ref8::grid()[1], std::ldexp(1, -9));
  for (std::size_t i = 1; i < ref8::grid().size(); ++i) ASSERT_LT(ref8::grid()[i - 1], ref8::grid()[i]);
}

TEST(Oracle, BinaryOperatorsMatchReferenceOnAllFp8Pairs) {
  for (const RoundingMode rm : kAllRoundingModes) {
    const ref8::Mode m = ref_mode(rm);
    for (unsigned x = 0; x < 256; ++x) {
      for (unsigned y = 0; y < 256; ++y) {
        const auto bx = static_cast<std::uint8_t>(x), by = static_cast<std::uint8_t>(y);
        ASSERT_EQ(u8(oracle::op_add(kFp8, rm, x, y)), ref8::add(bx, by, m)) << x << " + " << y;
        ASSERT_EQ(u8(oracle::op_sub(kFp8, rm, x, y)), ref8::sub(bx, by, m)) << x << " - " << y;
        ASSERT_EQ(u8(oracle::op_mul(kFp8, rm, x, y)), ref8::mul(bx, by, m)) << x << " * " << y;
        ASSERT_EQ(u8(oracle::op_div(kFp8, rm, x, y)), ref8::div(bx, by, m)) << x << " / " << y;
      }
    }
  }
}

TEST(Oracle, UnaryOperatorsMatchReference) {
  for (const RoundingMode rm : kAllRoundingModes) {
    for (unsigned x = 0; x < 256; ++x) {
      const auto bx = static_cast<std::uint8_t>(x);
      ASSERT_EQ(u8(oracle::op_sqrt(kFp8, rm, x)), ref8::sqrt(bx, ref_mode(rm))) << x;
      ASSERT_EQ(u8(oracle::op_round_to_integral(kFp8, rm, x)), ref8::round_to_integral(bx, ref_mode(rm))) << x;
    }
  }
}

TEST(Oracle, FmaMatchesReferenceOnSamples) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40000; ++i) {
    const auto x = static_cast<std::uint8_t>(rng()), y = static_cast<std::uint8_t>(rng()),
               z = static_cast<std::uint8_t>(rng());
    const RoundingMode rm = kAllRoundingModes[rng() % 5];
    ASSERT_EQ(u8(oracle::op_fma(kFp8, rm, x, y, z)), ref8::fma(x, y, z, ref_mode(rm)))
        << int(x) << " " << int(y) << " " << int(z) << " " << rounding_mode_name(rm);
  }
}

TEST(Oracle, ComparisonsAndConversionsMatchReference) {
  for (unsigned x = 0; x < 256; ++x) {
    const auto bx = static_cast<std::uint8_t>(x);
    for (unsigned y = 0; y < 256; ++y) {
      const auto by = static_cast<std::uint8_t>(y);
      ASSERT_EQ(oracle::op_compare(FpCmpKind::Lt, kFp8, x, y), ref8::lt(bx, by));
      ASSERT_EQ(oracle::op_compare(FpCmpKind::Le, kFp8, x, y), ref8::le(bx, by));
      ASSERT_EQ(oracle::op_compare(FpCmpKind::Eq, kFp8, x, y), ref8::eq(bx, by));
      ASSERT_EQ(oracle::op_compare(FpCmpKind::Gt, kFp8, x, y), ref8::lt(by, bx));
    }
    for (const unsigned w : {4u, 8u}) {
      for (const bool s : {true, false}) {
        const auto got = oracle::op_to_int(kFp8, x, w, s);
        const auto want = ref8::to_int(bx, w, s);
        ASSERT_EQ(got.has_value(), want.has_value()) << x;
        if (want) {
          ASSERT_EQ(*got, BigUint(static_cast<std::uint64_t>(*want) & mask(w))) << x;
        }
      }
    }
  }
  for (const RoundingMode rm : kAllRoundingModes) {
    for (unsigned v = 0; v < 256; ++v) {
      ASSERT_EQ(u8(oracle::op_from_int(kFp8, rm, v, 8, false)), ref8::from_int(v, ref_mode(rm)));
      ASSERT_EQ(u8(oracle::op_from_int(kFp8, rm, v, 8, true)), ref8::from_int(static_cast<std::int8_t>(v), ref_mode(rm)));
    }
  }
}

TEST(Oracle, ParsesLiterals) {
  // 0.125 = 2^-3: biased exponent 12, empty fraction.
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("0.125"), FpFormat::fp16(), RoundingMode::RNE), 0x3000);
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("-2.5"), kFp8, RoundingMode::RNE), 0xc2);
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("1/3"), kFp8, RoundingMode::RTZ), 0x2a);
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("1e3"), kFp8, RoundingMode::RNE), 0x78);
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("1e3"), kFp8, RoundingMode::RTZ), 0x77);
  EXPECT_EQ(oracle::round_exact(oracle::parse_literal("007.50"), kFp8, RoundingMode::RNE), 0x4f);
  EXPECT_THROW(oracle::parse_literal("0x1p3"), Error);
  EXPECT_THROW(oracle::parse_literal(""), Error);
  EXPECT_THROW(oracle::parse_literal("1/0"), Error);
}

TEST(Oracle, ExactDecimalOfDoubles) {
  const FpFormat f = FpFormat::fp64();
  const auto dec = [&](const char* lit) {
    return oracle::exact_decimal(oracle::round_exact(oracle::parse_literal(lit), f, RoundingMode::RNE), f);
  };
  EXPECT_EQ(dec("0.1"), "0.1000000000000000055511151231257827021181583404541015625");
  EXPECT_EQ(dec("0.2"), "0.200000000000000011102230246251565404236316680908203125");
  EXPECT_EQ(dec("0.3"), "0.299999999999999988897769753748434595763683319091796875");
  EXPECT_EQ(dec("-2"), "-2");
  EXPECT_EQ(oracle::exact_decimal(1, kFp8), "0.001953125");
}

// --- fpformat and pipeline ------------------------------------------------

TEST(FpFormat, RejectsInvalidFormats) {
  EXPECT_THROW(FpFormat(1, 3), Error);
  EXPECT_THROW(FpFormat(4, 0), Error);
  EXPECT_THROW(FpFormat(31, 3), Error);
  EXPECT_EQ(FpFormat(4, 3).name(), "fp8");
  EXPECT_EQ(FpFormat(3, 2).name(), "fp(3,2)");
  EXPECT_EQ(FpFormat::fp32().total_width(), 32u);
}

TEST(FpFormat, LiteralsAndSpecials) {
  EXPECT_EQ(mk_literal(FpFormat::fp16(), "0.125", RoundingMode::RNE).bits().value(), 0b0011000000000000);
  EXPECT_EQ(mk_special(FpFormat::fp16(), SpecialKind::NaN).bits().value(), 0x7c01);
  EXPECT_EQ(mk_special(FpFormat::fp16(), SpecialKind::NegInf).bits().value(), 0xfc00);
  EXPECT_EQ(mk_special(FpFormat::fp16(), SpecialKind::NegZero).bits().value(), 0x8000);
  EXPECT_EQ(mk_literal(FpFormat::fp32(), "1", RoundingMode::RNE).bits().value(), 0x3f800000);
  EXPECT_EQ(mk_literal(FpFormat::fp64(), "-0.5", RoundingMode::RNE).bits().value(), BigUint(0xbfe0000000000000ULL));
  bv::Context ctx;
  EXPECT_THROW(fp_from_ieeebv(ctx.var("b", 15), FpFormat::fp16()), Error);
}

namespace {

// pack(unpack(x)) evaluated on every pattern of a format.
void expect_round_trip(const FpFormat& f, bool normalize) {
  bv::Context ctx;
  const FpBits x(ctx.var("x", f.total_width()), f);
  const FpBits y = pack(unpack(x, normalize), f);
  bv::Evaluator ev({y.bits()});
  const unsigned in = *ev.input("x");
  const BigUint nan = oracle::canonical_nan(f);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << f.total_width()); ++v) {
    ev.set(in, v);
    ev.run();
    const BigUint want = oracle::decode(v, f).is_nan() ? nan : BigUint(v);
    ASSERT_EQ(BigUint(ev.word(0)), want) << f.name() << " pattern " << v;
  }
}

}  // namespace

TEST(Pipeline, PackUnpackRoundTripFp8) {
  expect_round_trip(FpFormat::fp8(), true);
  expect_round_trip(FpFormat::fp8(), false);
}

TEST(Pipeline, PackUnpackRoundTripFp16) {
  expect_round_trip(FpFormat::fp16(), true);
  expect_round_trip(FpFormat(2, 1), true);
  expect_round_trip(FpFormat(3, 5), false);
}

TEST(Pipeline, RoundMatchesOracleOnWideSignificands) {
  // A 9-bit significand with exponent -12..9 rounded into fp8 covers normal,
  // subnormal, overflow and underflow cases.
  const FpFormat f = FpFormat::fp8();
  bv::Context ctx;
  const Expr sig = ctx.var("sig", 9);
  const Expr exp = ctx.var("exp", 6);
  const Expr sign = ctx.var("sign", 1);
  const Expr rm = ctx.var("rm", 3);
  const Unpacked u{sign, exp, sig, bv::mk_false(), bv::mk_false(), bv::is_zero(sig), f};
  const FpBits r = pack(round(u, rm, f), f);
  bv::Evaluator ev({r.bits()});
  for (const RoundingMode m : kAllRoundingModes) {
    for (std::int64_t e = -12; e <= 9; ++e) {
      for (std::uint64_t s = 0; s < 512; ++s) {
        for (std::uint64_t neg = 0; neg < 2; ++neg) {
          ev.set(*ev.input("sig"), s);
          ev.set(*ev.input("exp"), static_cast<std::uint64_t>(e) & 63);
          ev.set(*ev.input("sign"), neg);
          ev.set(*ev.input("rm"), static_cast<std::uint64_t>(m));
          ev.run();
          // Top significand bit has weight 2^e.
          const oracle::Rational v = oracle::Rational(s) * oracle::detail::pow2(e - 8);
          const BigUint want = oracle::round_exact(oracle::OracleValue::finite(neg != 0, v), f, m);
          ASSERT_EQ(BigUint(ev.word(0)), want) << "sig=" << s << " exp=" << e << " " << rounding_mode_name(m);
        }
      }
    }
  }
}
