// A small QF_FP-flavoured constraint language.
//
//   (declare-fp x 8 23)          (declare-bv b 8)
//   (assert (fp.lt x (fp fp32 "0.5")))
//   (eval (fp.add RNE x x) ((x (fp fp32 "1.5"))))
//   (check)
//
// Operator names follow SMT-LIB FP. Predicates are width-1 bit-vectors, so
// `true`, `and`, `=` and friends work on (_ BitVec 1).
#pragma once

#include <functional>
#include <set>

#include "fpblast/eval.hpp"
#include "fpblast/ops.hpp"
#include "fpblast/sexpr.hpp"

namespace fpblast::script {

using sexpr::Position;
using sexpr::SExpr;

class ScriptError : public sexpr::ParseError {
 public:
  using ParseError::ParseError;
};

struct Sort {
  enum class Kind { BitVec, Fp, Rm };
  Kind kind = Kind::BitVec;
  unsigned bv_width = 1;
  std::optional<FpFormat> format;

  static Sort bitvec(unsigned w) { return {Kind::BitVec, w, std::nullopt}; }
  static Sort fp(const FpFormat& f) { return {Kind::Fp, 0, f}; }
  static Sort rm() { return {Kind::Rm, 0, std::nullopt}; }

  bool is_bv() const { return kind == Kind::BitVec; }
  bool is_fp() const { return kind == Kind::Fp; }
  bool is_rm() const { return kind == Kind::Rm; }
  bool is_bool() const { return is_bv() && bv_width == 1; }

  unsigned width() const {
    switch (kind) {
      case Kind::BitVec: return bv_width;
      case Kind::Fp: return format->total_width();
      case Kind::Rm: return 3;
    }
    return 0;
  }

  std::string name() const {
    switch (kind) {
      case Kind::BitVec: return "(_ BitVec " + std::to_string(bv_width) + ")";
      case Kind::Fp: return format->name();
      case Kind::Rm: return "RoundingMode";
    }
    return "?";
  }

  friend bool operator==(const Sort&, const Sort&) = default;
};

struct Command {
  enum class Kind { DeclareFp, DeclareBv, Assert, Check, Eval };
  Kind kind = Kind::Check;
  std::string name;
  unsigned eb = 0, sb = 0, width = 0;
  SExpr expr;
  std::vector<std::pair<std::string, SExpr>> bindings;
  Position pos;

  friend bool operator==(const Command& a, const Command& b) {
    return a.kind == b.kind && a.name == b.name && a.eb == b.eb && a.sb == b.sb && a.width == b.width &&
           a.expr == b.expr && a.bindings == b.bindings;
  }
};

struct Script {
  std::vector<Command> commands;
  std::map<std::string, Sort> declarations;
  std::vector<std::string> warnings;

  bool operator==(const Script& o) const { return commands == o.commands; }
};

struct Value {
  Sort sort;
  bv::Expr bits;  // empty when only type checking
};

inline const std::set<std::string>& unsupported_operators() {
  static const std::set<std::string> ops = {"fp.rem", "fp.min", "fp.max", "fp.to_real", "to_real", "fp.isSubnormalOrZero"};
  return ops;
}

namespace detail {

inline std::optional<unsigned> numeral(const SExpr& a) {
  if (!a.is_atom() || a.text.empty() || a.text.size() > 9 ||
      a.text.find_first_not_of("0123456789") != std::string::npos) {
    return std::nullopt;
  }
  return static_cast<unsigned>(std::stoul(a.text));
}

inline std::optional<bv::BitString> bv_literal(const SExpr& e) {
  if (e.is_atom() && e.text.size() > 2 && e.text[0] == '#' && (e.text[1] == 'b' || e.text[1] == 'x')) {
    const bool bin = e.text[1] == 'b';
    BigUint v = 0;
    for (std::size_t i = 2; i < e.text.size(); ++i) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(e.text[i])));
      int d = -1;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (!bin && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      if (d < 0 || (bin && d > 1)) return std::nullopt;
      v = (v << (bin ? 1 : 4)) | d;
    }
    return bv::BitString{static_cast<unsigned>((e.text.size() - 2) * (bin ? 1 : 4)), v};
  }
  return std::nullopt;
}

}  // namespace detail

// Type checks an expression against the declarations and, when given a
// context, builds its circuit.
class Elaborator {
 public:
  Elaborator(const std::map<std::string, Sort>& scope, bv::Context* ctx, std::vector<std::string>* warnings)
      : scope_(scope), ctx_(ctx), warnings_(warnings) {}

  Value run(const SExpr& e) {
    if (e.is_string()) fail(e, "unexpected string literal \"" + e.text + "\"");
    if (e.is_atom()) return atom(e);
    if (e.size() == 0) fail(e, "empty application ()");
    const SExpr& head = e[0];
    if (head.is_atom("_")) return indexed_constant(e);
    if (head.is_list()) return indexed_application(e);
    if (head.is_atom("fp")) return fp_literal(e);
    if (!head.is_atom()) fail(head, "expected an operator name");
    return application(e);
  }

  static std::string supported_list() {
    std::string out;
    for (const auto& name : supported_names()) out += (out.empty() ? "" : " ") + name;
    return out;
  }

  static const std::vector<std::string>& supported_names() {
    static const std::vector<std::string> names = [] {
      std::vector<std::string> n = {"fp.abs", "fp.neg", "fp.add", "fp.sub", "fp.mul", "fp.div", "fp.fma", "fp.sqrt",
                                    "fp.roundToIntegral", "fp.lt", "fp.leq", "fp.gt", "fp.geq", "fp.eq"};
      for (FpClassKind k : kAllClassKinds) n.push_back("fp." + std::string(class_kind_name(k)));
      for (const char* s : {"fp.to_ieee_bv", "fp", "to_fp", "to_fp_unsigned", "fp.to_sbv", "fp.to_ubv", "+oo", "-oo",
                            "NaN", "+zero", "-zero", "=", "distinct", "ite", "and", "or", "xor", "not", "=>",
                            "concat", "extract", "zero_extend", "sign_extend", "bvnot", "bvneg", "bvand", "bvor",
                            "bvxor", "bvadd", "bvsub", "bvmul", "bvudiv", "bvurem", "bvshl", "bvlshr", "bvashr",
                            "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge"}) {
        n.push_back(s);
      }
      return n;
    }();
    return names;
  }

 private:
  [[noreturn]] static void fail(const SExpr& at, const std::string& msg) { throw ScriptError(at.pos, msg); }

  bool build() const { return ctx_ != nullptr; }

  Value make(const Sort& s, const std::function<bv::Expr()>& f) const { return {s, build() ? f() : bv::Expr{}}; }

  FpBits fp(const Value& v) const { return {v.bits, *v.sort.format}; }

  Value atom(const SExpr& e) {
    if (e.text == "true") return make(Sort::bitvec(1), [] { return bv::mk_true(); });
    if (e.text == "false") return make(Sort::bitvec(1), [] { return bv::mk_false(); });
    if (const auto rm = parse_rounding_mode(e.text)) {
      return make(Sort::rm(), [rm] { return mk_rounding_mode(*rm); });
    }
    if (const auto lit = detail::bv_literal(e)) {
      if (lit->width == 0) fail(e, "empty bit-vector literal");
      return make(Sort::bitvec(lit->width), [lit] { return bv::mk_const(lit->width, lit->value); });
    }
    if (e.text[0] == '#') fail(e, "malformed bit-vector literal '" + e.text + "'");
    auto it = scope_.find(e.text);
    if (it != scope_.end()) {
      const Sort s = it->second;
      return make(s, [&, s] { return ctx_->var(e.text, s.width()); });
    }
    if (std::isdigit(static_cast<unsigned char>(e.text[0])) || e.text[0] == '-') {
      fail(e, "bare number '" + e.text + "' is not a term; write (fp <format> " + e.text + ") or (_ bv" + e.text +
                  " <width>)");
    }
    fail(e, "unknown identifier '" + e.text + "'");
  }

  std::vector<Value> args(const SExpr& e, std::size_t first = 1) {
    std::vector<Value> out;
    for (std::size_t i = first; i < e.size(); ++i) out.push_back(run(e[i]));
    return out;
  }

  void arity(const SExpr& e, std::size_t n, const std::string& shape) {
    if (e.size() - 1 != n) {
      fail(e, name_of(e) + " expects " + std::to_string(n) + " argument" + (n == 1 ? "" : "s") + " (" + shape +
                  "), got " + std::to_string(e.size() - 1));
    }
  }

  static std::string name_of(const SExpr& e) {
    if (e[0].is_atom()) return e[0].text;
    return sexpr::to_string(e[0]);
  }

  void want_rm(const SExpr& e, const Value& v, std::size_t i) {
    if (!v.sort.is_rm()) fail(e[i], name_of(e) + ": argument " + std::to_string(i) + " must be a rounding mode, got " + v.sort.name());
  }
  void want_fp(const SExpr& e, const Value& v, std::size_t i) {
    if (!v.sort.is_fp()) fail(e[i], name_of(e) + ": argument " + std::to_string(i) + " must be a floating-point, got " + v.sort.name());
  }
  void want_bv(const SExpr& e, const Value& v, std::size_t i) {
    if (!v.sort.is_bv()) fail(e[i], name_of(e) + ": argument " + std::to_string(i) + " must be a bit-vector, got " + v.sort.name());
  }
  void want_bool(const SExpr& e, const Value& v, std::size_t i) {
    if (!v.sort.is_bool()) fail(e[i], name_of(e) + ": argument " + std::to_string(i) + " must be (_ BitVec 1), got " + v.sort.name());
  }
  void same_sort(const SExpr& e, const std::vector<Value>& vs, std::size_t from) {
    for (std::size_t i = from + 1; i < vs.size(); ++i) {
      if (!(vs[i].sort == vs[from].sort)) {
        fail(e[i + 1], name_of(e) + ": operands have different sorts " + vs[from].sort.name() + " and " + vs[i].sort.name());
      }
    }
  }

  Value indexed_constant(const SExpr& e) {
    if (e.size() < 2 || !e[1].is_atom()) fail(e, "malformed indexed identifier");
    const std::string& id = e[1].text;
    if (id == "+oo" || id == "-oo" || id == "NaN" || id == "+zero" || id == "-zero") {
      if (e.size() != 4) fail(e, "(_ " + id + " eb sb) expects two indices");
      const auto eb = detail::numeral(e[2]);
      const auto sb = detail::numeral(e[3]);
      if (!eb || !sb) fail(e, "(_ " + id + " eb sb): indices must be numerals");
      const FpFormat g = format_at(e, *eb, *sb);
      const SpecialKind k = id == "+oo"    ? SpecialKind::PosInf
                            : id == "-oo"  ? SpecialKind::NegInf
                            : id == "NaN"  ? SpecialKind::NaN
                            : id == "+zero" ? SpecialKind::PosZero
                                            : SpecialKind::NegZero;
      return make(Sort::fp(g), [g, k] { return mk_special(g, k).bits(); });
    }
    if (id.rfind("bv", 0) == 0 && e.size() == 3) {
      const std::string digits = id.substr(2);
      const auto w = detail::numeral(e[2]);
      if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos || !w || *w == 0) {
        fail(e, "malformed bit-vector constant " + sexpr::to_string(e));
      }
      const auto first = digits.find_first_not_of('0');
      const BigUint v(first == std::string::npos ? std::string("0") : digits.substr(first));
      if (v > low_mask(*w)) fail(e, "constant " + digits + " does not fit in " + std::to_string(*w) + " bits");
      return make(Sort::bitvec(*w), [v, w] { return bv::mk_const(*w, v); });
    }
    fail(e, "unknown indexed identifier '" + id + "'");
  }

  FpFormat format_at(const SExpr& e, unsigned eb, unsigned sb) {
    try {
      return FpFormat(eb, sb);
    } catch (const Error& err) {
      fail(e, err.what());
    }
  }

  std::optional<FpFormat> format_expr(const SExpr& e) {
    if (e.is_atom()) return FpFormat::by_name(e.text);
    if (e.is_list() && e.size() == 4 && e[0].is_atom("_") && e[1].is_atom("FP")) {
      const auto eb = detail::numeral(e[2]);
      const auto sb = detail::numeral(e[3]);
      if (!eb || !sb) fail(e, "FP indices must be numerals");
      return format_at(e, *eb, *sb);
    }
    return std::nullopt;
  }

  Value fp_literal(const SExpr& e) {
    // SMT-LIB triple (fp sign exponent significand)
    if (e.size() == 4 && detail::bv_literal(e[1]) && detail::bv_literal(e[2]) && detail::bv_literal(e[3])) {
      const auto s = *detail::bv_literal(e[1]);
      const auto x = *detail::bv_literal(e[2]);
      const auto m = *detail::bv_literal(e[3]);
      if (s.width != 1) fail(e[1], "fp: sign must be 1 bit");
      const FpFormat f = format_at(e, x.width, m.width);
      const BigUint bits = (s.value << (x.width + m.width)) | (x.value << m.width) | m.value;
      return make(Sort::fp(f), [f, bits] { return bv::mk_const(f.total_width(), bits); });
    }
    if (e.size() != 3 && e.size() != 4) fail(e, "fp expects (fp <format> <decimal> [rm]) or (fp sign exp sig)");
    const auto f = format_expr(e[1]);
    if (!f) fail(e[1], "unknown format " + sexpr::to_string(e[1]) + " (use fp8, fp16, fp32, fp64, fp128 or (_ FP eb sb))");
    const SExpr& v = e[2];
    if (v.is_list()) fail(v, "fp: value must be a decimal or rational literal");
    RoundingMode rm = RoundingMode::RNE;
    if (e.size() == 4) {
      const auto m = e[3].is_atom() ? parse_rounding_mode(e[3].text) : std::nullopt;
      if (!m) fail(e[3], "fp: expected a rounding mode, got " + sexpr::to_string(e[3]));
      rm = *m;
    }
    BigUint bits;
    try {
      bits = oracle::round_exact(oracle::parse_literal(v.text), *f, rm);
    } catch (const Error& err) {
      fail(v, err.what());
    }
    const FpFormat g = *f;
    return make(Sort::fp(g), [g, bits] { return bv::mk_const(g.total_width(), bits); });
  }

  Value indexed_application(const SExpr& e) {
    const SExpr& h = e[0];
    if (h.size() < 2 || !h[0].is_atom("_") || !h[1].is_atom()) fail(h, "malformed indexed operator");
    const std::string& id = h[1].text;
    std::vector<unsigned> idx;
    for (std::size_t i = 2; i < h.size(); ++i) {
      const auto n = detail::numeral(h[i]);
      if (!n) fail(h[i], id + ": indices must be numerals");
      idx.push_back(*n);
    }
    const auto need = [&](std::size_t n) {
      if (idx.size() != n) fail(h, id + " takes " + std::to_string(n) + " index" + (n == 1 ? "" : "es"));
    };

    if (id == "extract") {
      need(2);
      arity(e, 1, "bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      if (idx[0] < idx[1] || idx[0] >= a[0].sort.width()) fail(h, "extract indices out of range");
      const unsigned hi = idx[0], lo = idx[1];
      return make(Sort::bitvec(hi - lo + 1), [=] { return bv::extract(a[0].bits, hi, lo); });
    }
    if (id == "zero_extend" || id == "sign_extend") {
      need(1);
      arity(e, 1, "bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      const unsigned by = idx[0];
      const bool z = id == "zero_extend";
      return make(Sort::bitvec(a[0].sort.width() + by), [=] { return z ? bv::zext(a[0].bits, by) : bv::sext(a[0].bits, by); });
    }
    if (id == "to_fp" || id == "to_fp_unsigned") {
      need(2);
      const FpFormat f = format_at(h, idx[0], idx[1]);
      if (e.size() == 2 && id == "to_fp") {
        auto a = args(e);
        want_bv(e, a[0], 1);
        if (a[0].sort.width() != f.total_width()) {
          fail(e[1], "to_fp: bit-vector of width " + std::to_string(a[0].sort.width()) + " cannot be reinterpreted as " +
                         Sort::fp(f).name());
        }
        return make(Sort::fp(f), [=] { return fp_from_ieeebv(a[0].bits, f).bits(); });
      }
      if (e.size() == 3 && e[2].is_atom() && !e[2].text.empty() &&
          (std::isdigit(static_cast<unsigned char>(e[2].text[0])) || e[2].text[0] == '-')) {
        fail(e, "unsupported operator to_fp from real");
      }
      arity(e, 2, "rm, value");
      auto a = args(e);
      want_rm(e, a[0], 1);
      if (id == "to_fp_unsigned") {
        want_bv(e, a[1], 2);
        return make(Sort::fp(f), [=] { return sbv_to_fp(a[1].bits, false, f, a[0].bits).bits(); });
      }
      if (a[1].sort.is_fp()) return make(Sort::fp(f), [=, this] { return fp_to_fp(fp(a[1]), f, a[0].bits).bits(); });
      if (a[1].sort.is_bv()) return make(Sort::fp(f), [=] { return sbv_to_fp(a[1].bits, true, f, a[0].bits).bits(); });
      fail(e[2], "to_fp: cannot convert from " + a[1].sort.name());
    }
    if (id == "fp.to_sbv" || id == "fp.to_ubv") {
      need(1);
      if (idx[0] == 0) fail(h, id + ": width must be at least 1");
      std::vector<Value> a = args(e);
      std::size_t xi = 0;
      if (a.size() == 2) {
        want_rm(e, a[0], 1);
        xi = 1;
        if (warnings_ && !(e[1].is_atom("RTZ") || e[1].is_atom("roundTowardZero"))) {
          warnings_->push_back(std::to_string(e.pos.line) + ":" + std::to_string(e.pos.column) + ": " + id +
                               " ignores its rounding mode and always truncates toward zero");
        }
      } else if (a.size() != 1) {
        arity(e, 2, "rm, fp");
      }
      want_fp(e, a[xi], xi + 1);
      const unsigned w = idx[0];
      const bool is_signed = id == "fp.to_sbv";
      const Value x = a[xi];
      return make(Sort::bitvec(w), [=, this] {
        return is_signed ? fp_to_sbv(*ctx_, fp(x), w) : fp_to_ubv(*ctx_, fp(x), w);
      });
    }
    fail(h, "unknown indexed operator '" + id + "'; supported: " + supported_list());
  }

  Value application(const SExpr& e) {
    const std::string& op = e[0].text;
    if (unsupported_operators().count(op) != 0) fail(e[0], "unsupported operator " + op);
    const std::string_view name = op;

    // floating-point arithmetic
    using Bin = FpBits (*)(const bv::Expr&, const FpBits&, const FpBits&);
    static const std::map<std::string_view, Bin> binary = {
        {"fp.add", fp_add}, {"fp.sub", fp_sub}, {"fp.mul", fp_mul}, {"fp.div", fp_div}};
    if (auto it = binary.find(name); it != binary.end()) {
      arity(e, 3, "rm, fp, fp");
      auto a = args(e);
      want_rm(e, a[0], 1);
      want_fp(e, a[1], 2);
      want_fp(e, a[2], 3);
      same_sort(e, a, 1);
      const Bin fn = it->second;
      return make(a[1].sort, [=, this] { return fn(a[0].bits, fp(a[1]), fp(a[2])).bits(); });
    }
    if (name == "fp.fma") {
      arity(e, 4, "rm, fp, fp, fp");
      auto a = args(e);
      want_rm(e, a[0], 1);
      for (std::size_t i = 1; i <= 3; ++i) want_fp(e, a[i], i + 1);
      same_sort(e, a, 1);
      return make(a[1].sort, [=, this] { return fp_fma(a[0].bits, fp(a[1]), fp(a[2]), fp(a[3])).bits(); });
    }
    if (name == "fp.sqrt" || name == "fp.roundToIntegral") {
      arity(e, 2, "rm, fp");
      auto a = args(e);
      want_rm(e, a[0], 1);
      want_fp(e, a[1], 2);
      const bool sq = name == "fp.sqrt";
      return make(a[1].sort, [=, this] {
        return (sq ? fp_sqrt(a[0].bits, fp(a[1])) : fp_round_to_integral(a[0].bits, fp(a[1]))).bits();
      });
    }
    if (name == "fp.abs" || name == "fp.neg") {
      arity(e, 1, "fp");
      auto a = args(e);
      want_fp(e, a[0], 1);
      const bool abs = name == "fp.abs";
      return make(a[0].sort, [=, this] { return (abs ? fp_abs(fp(a[0])) : fp_neg(fp(a[0]))).bits(); });
    }
    static const std::map<std::string_view, FpCmpKind> compare = {
        {"fp.lt", FpCmpKind::Lt}, {"fp.leq", FpCmpKind::Le}, {"fp.gt", FpCmpKind::Gt},
        {"fp.geq", FpCmpKind::Ge}, {"fp.eq", FpCmpKind::Eq}};
    if (auto it = compare.find(name); it != compare.end()) {
      arity(e, 2, "fp, fp");
      auto a = args(e);
      want_fp(e, a[0], 1);
      want_fp(e, a[1], 2);
      same_sort(e, a, 0);
      const FpCmpKind k = it->second;
      return make(Sort::bitvec(1), [=, this] { return fp_compare(k, fp(a[0]), fp(a[1])); });
    }
    for (FpClassKind k : kAllClassKinds) {
      if (name == "fp." + std::string(class_kind_name(k))) {
        arity(e, 1, "fp");
        auto a = args(e);
        want_fp(e, a[0], 1);
        return make(Sort::bitvec(1), [=, this] { return fp_is(k, fp(a[0])); });
      }
    }
    if (name == "fp.to_ieee_bv") {
      arity(e, 1, "fp");
      auto a = args(e);
      want_fp(e, a[0], 1);
      return make(Sort::bitvec(a[0].sort.width()), [=, this] { return fp_as_ieeebv(fp(a[0])); });
    }

    // core
    if (name == "=" || name == "distinct") {
      if (e.size() != 3) arity(e, 2, "t, t");
      auto a = args(e);
      same_sort(e, a, 0);
      const bool eq = name == "=";
      return make(Sort::bitvec(1), [=] {
        bv::Expr same = bv::eq(a[0].bits, a[1].bits);
        if (a[0].sort.is_fp()) {
          // all NaNs are equal under =
          const FpBits x{a[0].bits, *a[0].sort.format}, y{a[1].bits, *a[1].sort.format};
          same = bv::bvor(same, bv::bvand(fp_is(FpClassKind::NaN, x), fp_is(FpClassKind::NaN, y)));
        }
        return eq ? same : bv::bvnot(same);
      });
    }
    if (name == "ite") {
      arity(e, 3, "cond, t, t");
      auto a = args(e);
      want_bool(e, a[0], 1);
      if (!(a[1].sort == a[2].sort)) fail(e[3], "ite: branches have different sorts " + a[1].sort.name() + " and " + a[2].sort.name());
      return make(a[1].sort, [=] { return bv::ite(a[0].bits, a[1].bits, a[2].bits); });
    }
    if (name == "not") {
      arity(e, 1, "bool");
      auto a = args(e);
      want_bool(e, a[0], 1);
      return make(Sort::bitvec(1), [=] { return bv::bvnot(a[0].bits); });
    }
    if (name == "and" || name == "or" || name == "xor" || name == "=>") {
      if (e.size() < 3) fail(e, op + " expects at least 2 arguments");
      auto a = args(e);
      for (std::size_t i = 0; i < a.size(); ++i) want_bool(e, a[i], i + 1);
      return make(Sort::bitvec(1), [=] {
        if (name == "=>") {
          bv::Expr r = a.back().bits;
          for (std::size_t i = a.size() - 1; i-- > 0;) r = bv::implies(a[i].bits, r);
          return r;
        }
        bv::Expr r = a[0].bits;
        for (std::size_t i = 1; i < a.size(); ++i) {
          r = name == "and" ? bv::bvand(r, a[i].bits) : name == "or" ? bv::bvor(r, a[i].bits) : bv::bvxor(r, a[i].bits);
        }
        return r;
      });
    }

    // bit-vectors
    if (name == "bvnot" || name == "bvneg") {
      arity(e, 1, "bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      const bool n = name == "bvnot";
      return make(a[0].sort, [=] { return n ? bv::bvnot(a[0].bits) : bv::neg(a[0].bits); });
    }
    if (name == "concat") {
      arity(e, 2, "bv, bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      want_bv(e, a[1], 2);
      return make(Sort::bitvec(a[0].sort.width() + a[1].sort.width()), [=] { return bv::concat(a[0].bits, a[1].bits); });
    }
    static const std::map<std::string_view, bv::Kind> bv_binary = {
        {"bvand", bv::Kind::And}, {"bvor", bv::Kind::Or},     {"bvxor", bv::Kind::Xor},  {"bvadd", bv::Kind::Add},
        {"bvsub", bv::Kind::Sub}, {"bvmul", bv::Kind::Mul},   {"bvudiv", bv::Kind::Udiv}, {"bvurem", bv::Kind::Urem},
        {"bvshl", bv::Kind::Shl}, {"bvlshr", bv::Kind::Lshr}, {"bvashr", bv::Kind::Ashr}};
    if (auto it = bv_binary.find(name); it != bv_binary.end()) {
      arity(e, 2, "bv, bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      want_bv(e, a[1], 2);
      same_sort(e, a, 0);
      const bv::Kind k = it->second;
      return make(a[0].sort, [=] { return bv::apply(k, {a[0].bits, a[1].bits}); });
    }
    using Pred = bv::Expr (*)(const bv::Expr&, const bv::Expr&);
    static const std::map<std::string_view, Pred> bv_pred = {
        {"bvult", bv::ult}, {"bvule", bv::ule}, {"bvugt", bv::ugt}, {"bvuge", bv::uge},
        {"bvslt", bv::slt}, {"bvsle", bv::sle}, {"bvsgt", bv::sgt}, {"bvsge", bv::sge}};
    if (auto it = bv_pred.find(name); it != bv_pred.end()) {
      arity(e, 2, "bv, bv");
      auto a = args(e);
      want_bv(e, a[0], 1);
      want_bv(e, a[1], 2);
      same_sort(e, a, 0);
      const Pred p = it->second;
      return make(Sort::bitvec(1), [=] { return p(a[0].bits, a[1].bits); });
    }
    fail(e[0], "unknown operator '" + op + "'; supported: " + supported_list());
  }

  const std::map<std::string, Sort>& scope_;
  bv::Context* ctx_;
  std::vector<std::string>* warnings_;
};

namespace detail {

inline bool valid_name(const std::string& s) {
  if (s.empty() || s[0] == '#' || std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-') return false;
  if (parse_rounding_mode(s) || s == "true" || s == "false" || s == "_") return false;
  return true;
}

inline unsigned index_arg(const SExpr& cmd, std::size_t i, const std::string& what) {
  const auto n = numeral(cmd[i]);
  if (!n) throw ScriptError(cmd[i].pos, what + " must be a numeral, got " + sexpr::to_string(cmd[i]));
  return *n;
}

}  // namespace detail

// Parses and type checks a script. Errors carry line and column.
inline Script parse_script(std::string_view text) {
  Script s;
  for (const SExpr& c : sexpr::parse(text)) {
    if (!c.is_list() || c.size() == 0 || !c[0].is_atom()) {
      throw ScriptError(c.pos, "expected a command such as (declare-fp ...), (assert ...) or (check)");
    }
    const std::string& kw = c[0].text;
    Command cmd;
    cmd.pos = c.pos;
    const auto declare = [&](const Sort& sort) {
      if (!c[1].is_atom() || !detail::valid_name(c[1].text)) {
        throw ScriptError(c[1].pos, "invalid name " + sexpr::to_string(c[1]));
      }
      if (s.declarations.count(c[1].text) != 0) throw ScriptError(c[1].pos, "'" + c[1].text + "' is already declared");
      cmd.name = c[1].text;
      s.declarations.emplace(cmd.name, sort);
    };
    if (kw == "declare-fp") {
      if (c.size() != 4) throw ScriptError(c.pos, "declare-fp expects (declare-fp name eb sb)");
      cmd.kind = Command::Kind::DeclareFp;
      cmd.eb = detail::index_arg(c, 2, "exponent width");
      cmd.sb = detail::index_arg(c, 3, "significand width");
      try {
        declare(Sort::fp(FpFormat(cmd.eb, cmd.sb)));
      } catch (const ScriptError&) {
        throw;
      } catch (const Error& e) {
        throw ScriptError(c.pos, e.what());
      }
    } else if (kw == "declare-bv") {
      if (c.size() != 3) throw ScriptError(c.pos, "declare-bv expects (declare-bv name width)");
      cmd.kind = Command::Kind::DeclareBv;
      cmd.width = detail::index_arg(c, 2, "width");
      if (cmd.width == 0) throw ScriptError(c[2].pos, "width must be at least 1");
      declare(Sort::bitvec(cmd.width));
    } else if (kw == "assert") {
      if (c.size() != 2) throw ScriptError(c.pos, "assert expects exactly one expression");
      cmd.kind = Command::Kind::Assert;
      cmd.expr = c[1];
      const Value v = Elaborator(s.declarations, nullptr, &s.warnings).run(cmd.expr);
      if (!v.sort.is_bool()) throw ScriptError(c[1].pos, "assert: expression has sort " + v.sort.name() + ", expected (_ BitVec 1)");
    } else if (kw == "check") {
      if (c.size() != 1) throw ScriptError(c.pos, "check takes no arguments");
      cmd.kind = Command::Kind::Check;
    } else if (kw == "eval") {
      if (c.size() != 2 && c.size() != 3) throw ScriptError(c.pos, "eval expects (eval expr [((name value) ...)])");
      cmd.kind = Command::Kind::Eval;
      cmd.expr = c[1];
      Elaborator(s.declarations, nullptr, &s.warnings).run(cmd.expr);
      if (c.size() == 3) {
        if (!c[2].is_list()) throw ScriptError(c[2].pos, "eval: bindings must be a list ((name value) ...)");
        const std::map<std::string, Sort> empty;
        for (const SExpr& b : c[2].items) {
          if (!b.is_list() || b.size() != 2 || !b[0].is_atom()) throw ScriptError(b.pos, "eval: binding must be (name value)");
          auto it = s.declarations.find(b[0].text);
          if (it == s.declarations.end()) throw ScriptError(b[0].pos, "eval: '" + b[0].text + "' is not declared");
          const Value v = Elaborator(empty, nullptr, nullptr).run(b[1]);
          if (!(v.sort == it->second)) {
            throw ScriptError(b[1].pos, "eval: value for '" + b[0].text + "' has sort " + v.sort.name() + ", expected " +
                                            it->second.name());
          }
          cmd.bindings.emplace_back(b[0].text, b[1]);
        }
      }
    } else {
      throw ScriptError(c[0].pos, "unknown command '" + kw + "' (expected declare-fp, declare-bv, assert, check or eval)");
    }
    s.commands.push_back(std::move(cmd));
  }
  return s;
}

inline std::string print_command(const Command& c) {
  switch (c.kind) {
    case Command::Kind::DeclareFp:
      return "(declare-fp " + sexpr::to_string(SExpr{SExpr::Type::Atom, c.name, {}, {}}) + " " + std::to_string(c.eb) +
             " " + std::to_string(c.sb) + ")";
    case Command::Kind::DeclareBv:
      return "(declare-bv " + sexpr::to_string(SExpr{SExpr::Type::Atom, c.name, {}, {}}) + " " + std::to_string(c.width) + ")";
    case Command::Kind::Assert: return "(assert " + sexpr::to_string(c.expr) + ")";
    case Command::Kind::Check: return "(check)";
    case Command::Kind::Eval: {
      std::string out = "(eval " + sexpr::to_string(c.expr);
      if (!c.bindings.empty()) {
        out += " (";
        for (std::size_t i = 0; i < c.bindings.size(); ++i) {
          out += (i ? " (" : "(") + c.bindings[i].first + " " + sexpr::to_string(c.bindings[i].second) + ")";
        }
        out += ")";
      }
      return out + ")";
    }
  }
  return {};
}

inline std::string print_script(const Script& s) {
  std::string out;
  for (const auto& c : s.commands) out += print_command(c) + "\n";
  return out;
}

// Builds circuits for a parsed script. Declared names become bit-vector
// variables of their sort's width.
class Blaster {
 public:
  explicit Blaster(const Script& s) : script_(s) {
    for (const auto& [name, sort] : s.declarations) ctx_.var(name, sort.width());
  }

  Value blast(const SExpr& e) { return Elaborator(script_.declarations, &ctx_, nullptr).run(e); }

  bv::Context& context() { return ctx_; }

  // Value of a closed expression (no declared names), such as an eval binding.
  static bv::BitString constant(const SExpr& e) {
    const std::map<std::string, Sort> empty;
    bv::Context ctx;
    const Value v = Elaborator(empty, &ctx, nullptr).run(e);
    return bv::eval(v.bits, {});
  }

 private:
  const Script& script_;
  bv::Context ctx_;
};

// Human-readable rendering of a value of the given sort.
inline std::string describe(const Sort& sort, const bv::BitString& b) {
  if (sort.is_rm()) {
    const auto v = static_cast<unsigned>(b.value);
    return v <= 4 ? std::string(rounding_mode_name(static_cast<RoundingMode>(v))) : "RNE";
  }
  std::string out = "#b" + b.to_binary() + " (0x" + b.to_hex() + ")";
  if (sort.is_bv()) {
    out += " = " + b.value.str();
    if (b.width > 0 && bv::detail::bit_set(b.value, b.width - 1)) {
      out += " (signed -" + BigUint((BigUint(1) << b.width) - b.value).str() + ")";
    }
    return out;
  }
  const FpFormat& f = *sort.format;
  const oracle::OracleValue v = oracle::decode(b.value, f);
  if (v.is_nan()) return out + " = NaN";
  if (v.is_inf()) return out + (v.negative ? " = -oo" : " = +oo");
  return out + " = " + oracle::exact_decimal(b.value, f);
}

}  // namespace fpblast::script
