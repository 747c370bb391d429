// Random floating-point queries with at most 12 free bits, used to compare
// solving engines.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "fpblast/fpblast.hpp"

namespace fpblast::testing {

struct GeneratedQuery {
  std::string description;
  backend::Query query;
};

class QueryGen {
 public:
  explicit QueryGen(std::uint64_t seed) : rng_(seed) {}

  GeneratedQuery next(int index) {
    bv::Context ctx;
    const int shape = pick(3);
    // fp(3,2) or fp(2,3): two 6-bit operands. fp8: one operand plus a
    // symbolic rounding mode.
    const FpFormat f = shape == 0 ? FpFormat(3, 2) : shape == 1 ? FpFormat(2, 3) : FpFormat::fp8();
    const unsigned w = f.total_width();
    const FpBits x(ctx.var("x", w), f);
    const bool two = shape != 2;
    const FpBits y = two ? FpBits(ctx.var("y", w), f) : random_constant(f);
    const bv::Expr r = two ? mk_rounding_mode(kAllRoundingModes[pick(5)]) : ctx.var("rm", 3);

    std::string desc = f.name() + ":";
    std::vector<bv::Expr> assertions;
    const int kind = pick(4);
    if (kind == 0) {
      // Negated identities: always unsat.
      const FpBits a = fp_add(r, x, y), b = fp_add(r, y, x);
      const FpBits c = fp_mul(r, x, y), d = fp_mul(r, y, x);
      assertions.push_back(pick(2) ? bv::ne(a.bits(), b.bits()) : bv::ne(c.bits(), d.bits()));
      desc += " commutativity violated";
    } else {
      const FpBits t = term(r, x, y, desc);
      assertions.push_back(predicate(t, x, y, desc));
      if (kind == 3) assertions.push_back(predicate(term(r, y, x, desc), y, x, desc));
    }
    return {"query " + std::to_string(index) + " " + desc, backend::make_query(assertions)};
  }

 private:
  FpBits random_constant(const FpFormat& f) {
    const std::uint64_t v = rng_() & ((std::uint64_t{1} << f.total_width()) - 1);
    return fp_constant(f, v);
  }

  FpBits term(const bv::Expr& r, const FpBits& x, const FpBits& y, std::string& desc) {
    switch (pick(9)) {
      case 0: desc += " add"; return fp_add(r, x, y);
      case 1: desc += " sub"; return fp_sub(r, x, y);
      case 2: desc += " mul"; return fp_mul(r, x, y);
      case 3: desc += " div"; return fp_div(r, x, y);
      case 4: desc += " fma"; return fp_fma(r, x, y, x);
      case 5: desc += " sqrt"; return fp_sqrt(r, x);
      case 6: desc += " rti"; return fp_round_to_integral(r, x);
      case 7: desc += " to_fp"; return fp_to_fp(fp_to_fp(x, FpFormat(3, 1), r), x.format(), r);
      default: desc += " abs-neg"; return fp_neg(fp_abs(x));
    }
  }

  bv::Expr predicate(const FpBits& t, const FpBits& x, const FpBits& y, std::string& desc) {
    switch (pick(5)) {
      case 0: {
        const FpCmpKind k = kAllCmpKinds[pick(5)];
        desc += " " + std::string(cmp_kind_name(k));
        return fp_compare(k, t, pick(2) ? x : y);
      }
      case 1: {
        const FpClassKind k = kAllClassKinds[pick(7)];
        desc += " " + std::string(class_kind_name(k));
        return fp_is(k, t);
      }
      case 2: {
        const FpBits c = random_constant(t.format());
        desc += " bits=" + c.bits().value().str();
        return bv::eq(t.bits(), c.bits());
      }
      case 3: {
        desc += " lt-both";
        return bv::bvand(fp_compare(FpCmpKind::Lt, t, x), fp_compare(FpCmpKind::Lt, x, t));
      }
      default: {
        desc += " not-eq-self";
        return bv::bvnot(fp_compare(FpCmpKind::Eq, t, t));
      }
    }
  }

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }

  std::mt19937_64 rng_;
};

inline std::vector<GeneratedQuery> generate_queries(int n, std::uint64_t seed) {
  QueryGen gen(seed);
  std::vector<GeneratedQuery> out;
  for (int i = 0; i < n; ++i) out.push_back(gen.next(i));
  return out;
}

// Status from the internal DPLL solver on the CNF encoding, with the model
// checked against the assertions.
inline bv::SatStatus dpll_status(const backend::Query& q, bool* model_ok = nullptr) {
  const bv::CnfFormula f = backend::to_cnf(q);
  const auto sol = bv::DpllSolver(f).solve();
  if (!sol) return bv::SatStatus::Unsat;
  if (model_ok) {
    bv::Env model;
    for (const auto& [name, range] : f.var_map) {
      BigUint v = 0;
      for (unsigned b = 0; b < range.second; ++b) {
        if ((*sol)[static_cast<std::size_t>(range.first) + b]) v |= BigUint(1) << b;
      }
      model[name] = bv::BitString{range.second, v};
    }
    *model_ok = backend::model_satisfies(q, model);
  }
  return bv::SatStatus::Sat;
}

}  // namespace fpblast::testing
