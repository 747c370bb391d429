// The 0.1 + 0.2 != 0.3 example in double precision.
#pragma once

#include <sstream>

#include "fpblast/eval.hpp"
#include "fpblast/ops.hpp"

namespace fpblast::demo {

struct Fig1 {
  std::string x, y, z, w;  // exact decimal expansions
  bool eq_wz = false;
  bool lt_wz = false;
};

//   double x = 0.1; double y = 0.2; double w = 0.3; double z = x + y;
//   assert(w == z);
// evaluated through the blasted circuits.
inline Fig1 fig1() {
  const FpFormat f = FpFormat::fp64();
  const bv::Expr rne = mk_rounding_mode(RoundingMode::RNE);
  const FpBits x = mk_literal(f, "0.1", RoundingMode::RNE);
  const FpBits y = mk_literal(f, "0.2", RoundingMode::RNE);
  const FpBits w = mk_literal(f, "0.3", RoundingMode::RNE);
  const FpBits z = fp_add(rne, x, y);

  bv::Evaluator ev({x.bits(), y.bits(), z.bits(), w.bits(), fp_compare(FpCmpKind::Eq, w, z),
                    fp_compare(FpCmpKind::Lt, w, z)});
  ev.run();
  Fig1 r;
  r.x = oracle::exact_decimal(ev.big(0), f);
  r.y = oracle::exact_decimal(ev.big(1), f);
  r.z = oracle::exact_decimal(ev.big(2), f);
  r.w = oracle::exact_decimal(ev.big(3), f);
  r.eq_wz = ev.word(4) != 0;
  r.lt_wz = ev.word(5) != 0;
  return r;
}

inline std::string fig1_report() {
  const Fig1 r = fig1();
  std::ostringstream out;
  out << "double x = 0.1; double y = 0.2; double w = 0.3; double z = x + y;\n"
      << "x is " << r.x << '\n'
      << "y is " << r.y << '\n'
      << "z is " << r.z << '\n'
      << "w is " << r.w << '\n'
      << "fp.eq(w, z) = " << (r.eq_wz ? "true" : "false") << '\n'
      << "fp.lt(w, z) = " << (r.lt_wz ? "true" : "false") << '\n'
      << "assert(w == z) " << (r.eq_wz ? "holds" : "fails") << (r.lt_wz ? ": z is slightly greater than w" : "")
      << '\n';
  return out.str();
}

}  // namespace fpblast::demo
