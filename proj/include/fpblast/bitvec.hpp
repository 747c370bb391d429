// Symbolic bit-vector expressions.
//
// An Expr is an immutable, shareable DAG node with a fixed bit width. Width-1
// vectors double as booleans. Builders fold constants eagerly and reject
// ill-typed applications with fpblast::Error.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace fpblast {

using BigUint = boost::multiprecision::cpp_int;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline BigUint low_mask(unsigned width) { return (BigUint(1) << width) - 1; }

}  // namespace fpblast

namespace fpblast::bv {

enum class Kind : std::uint8_t {
  Const,
  Var,
  Concat,
  Extract,
  ZeroExtend,
  SignExtend,
  Not,
  And,
  Or,
  Xor,
  Neg,
  Add,
  Sub,
  Mul,
  Udiv,
  Urem,
  Shl,
  Lshr,
  Ashr,
  Eq,
  Ult,
  Ule,
  Slt,
  Sle,
  Ite,
  RedOr,
};

inline std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Const: return "const";
    case Kind::Var: return "var";
    case Kind::Concat: return "concat";
    case Kind::Extract: return "extract";
    case Kind::ZeroExtend: return "zero_extend";
    case Kind::SignExtend: return "sign_extend";
    case Kind::Not: return "not";
    case Kind::And: return "and";
    case Kind::Or: return "or";
    case Kind::Xor: return "xor";
    case Kind::Neg: return "neg";
    case Kind::Add: return "add";
    case Kind::Sub: return "sub";
    case Kind::Mul: return "mul";
    case Kind::Udiv: return "udiv";
    case Kind::Urem: return "urem";
    case Kind::Shl: return "shl";
    case Kind::Lshr: return "lshr";
    case Kind::Ashr: return "ashr";
    case Kind::Eq: return "eq";
    case Kind::Ult: return "ult";
    case Kind::Ule: return "ule";
    case Kind::Slt: return "slt";
    case Kind::Sle: return "sle";
    case Kind::Ite: return "ite";
    case Kind::RedOr: return "redor";
  }
  return "?";
}

class Expr;

struct Node {
  Kind kind;
  unsigned width;
  std::vector<Expr> args;
  BigUint value;     // Const
  std::string name;  // Var
  unsigned hi = 0;   // Extract
  unsigned lo = 0;
};

class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  Kind kind() const { return node_->kind; }
  unsigned width() const { return node_->width; }
  std::span<const Expr> args() const { return node_->args; }
  const Expr& arg(std::size_t i) const { return node_->args.at(i); }
  const BigUint& value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  unsigned hi() const { return node_->hi; }
  unsigned lo() const { return node_->lo; }

  bool is_const() const { return node_->kind == Kind::Const; }
  bool is_var() const { return node_->kind == Kind::Var; }
  const Node* get() const { return node_.get(); }
  explicit operator bool() const { return static_cast<bool>(node_); }

  friend bool operator==(const Expr& a, const Expr& b) { return a.node_ == b.node_; }

 private:
  std::shared_ptr<const Node> node_;
};

namespace detail {

inline bool bit_set(const BigUint& v, unsigned i) { return boost::multiprecision::bit_test(v, i); }

// Reference semantics of every operator over unsigned big integers. Shared by
// constant folding and the wide evaluator path.
inline BigUint apply_big(Kind kind, unsigned width, std::span<const BigUint> v,
                         std::span<const unsigned> w, unsigned hi, unsigned lo) {
  const BigUint mask = low_mask(width);
  switch (kind) {
    case Kind::Concat: return (v[0] << w[1]) | v[1];
    case Kind::Extract: return (v[0] >> lo) & low_mask(hi - lo + 1);
    case Kind::ZeroExtend: return v[0];
    case Kind::SignExtend:
      return bit_set(v[0], w[0] - 1) ? BigUint(v[0] | (mask ^ low_mask(w[0]))) : v[0];
    case Kind::Not: return mask ^ v[0];
    case Kind::And: return v[0] & v[1];
    case Kind::Or: return v[0] | v[1];
    case Kind::Xor: return v[0] ^ v[1];
    case Kind::Neg: return ((mask ^ v[0]) + 1) & mask;
    case Kind::Add: return (v[0] + v[1]) & mask;
    case Kind::Sub: return (v[0] + (mask ^ v[1]) + 1) & mask;
    case Kind::Mul: return (v[0] * v[1]) & mask;
    case Kind::Udiv: return v[1] == 0 ? mask : BigUint(v[0] / v[1]);
    case Kind::Urem: return v[1] == 0 ? v[0] : BigUint(v[0] % v[1]);
    case Kind::Shl:
      if (v[1] >= width) return 0;
      return (v[0] << static_cast<unsigned>(v[1])) & mask;
    case Kind::Lshr:
      if (v[1] >= width) return 0;
      return v[0] >> static_cast<unsigned>(v[1]);
    case Kind::Ashr: {
      const bool neg = bit_set(v[0], width - 1);
      if (v[1] >= width) return neg ? mask : BigUint(0);
      const auto s = static_cast<unsigned>(v[1]);
      BigUint r = v[0] >> s;
      if (neg) r |= mask ^ (mask >> s);
      return r;
    }
    case Kind::Eq: return v[0] == v[1] ? 1 : 0;
    case Kind::Ult: return v[0] < v[1] ? 1 : 0;
    case Kind::Ule: return v[0] <= v[1] ? 1 : 0;
    case Kind::Slt:
    case Kind::Sle: {
      const BigUint flip = BigUint(1) << (w[0] - 1);
      const BigUint a = v[0] ^ flip, b = v[1] ^ flip;
      return (kind == Kind::Slt ? a < b : a <= b) ? 1 : 0;
    }
    case Kind::Ite: return v[0] != 0 ? v[1] : v[2];
    case Kind::RedOr: return v[0] != 0 ? 1 : 0;
    case Kind::Const:
    case Kind::Var: break;
  }
  throw Error("apply_big: not an operator");
}

inline void require(bool cond, Kind k, const std::string& what) {
  if (!cond) throw Error(std::string(kind_name(k)) + ": " + what);
}

}  // namespace detail

inline Expr mk_const(unsigned width, const BigUint& value) {
  if (width == 0) throw Error("mk_const: width must be at least 1");
  if (value < 0 || value > low_mask(width)) {
    throw Error("mk_const: value exceeds width " + std::to_string(width));
  }
  return Expr(std::make_shared<const Node>(Node{Kind::Const, width, {}, value, {}, 0, 0}));
}

inline Expr mk_zero(unsigned width) { return mk_const(width, 0); }
inline Expr mk_ones(unsigned width) { return mk_const(width, low_mask(width)); }
inline Expr mk_true() { return mk_const(1, 1); }
inline Expr mk_false() { return mk_const(1, 0); }
inline Expr mk_bool(bool b) { return mk_const(1, b ? 1 : 0); }

// Two's-complement constant; value must fit the signed range of width.
inline Expr mk_sconst(unsigned width, std::int64_t value) {
  const BigUint modulus = BigUint(1) << width;
  const BigUint lim = BigUint(1) << (width - 1);
  if (value >= 0 ? BigUint(value) >= lim : BigUint(-(value + 1)) >= lim) {
    throw Error("mk_sconst: value does not fit signed width " + std::to_string(width));
  }
  return mk_const(width, value >= 0 ? BigUint(value) : BigUint(modulus - BigUint(-(value + 1)) - 1));
}

// Generic application. aux carries extract bounds {hi, lo} or the extension
// amount in aux[0].
inline Expr apply(Kind kind, std::vector<Expr> args, std::array<unsigned, 2> aux = {0, 0}) {
  using detail::require;
  for (const auto& a : args) require(static_cast<bool>(a), kind, "null operand");
  const auto arity = [&](std::size_t n) {
    require(args.size() == n, kind, "expects " + std::to_string(n) + " operand(s)");
  };
  const auto same_width = [&] {
    require(args[0].width() == args[1].width(), kind,
            "operand widths differ (" + std::to_string(args[0].width()) + " vs " +
                std::to_string(args[1].width()) + ")");
  };
  unsigned width = 0, hi = 0, lo = 0;
  switch (kind) {
    case Kind::Const:
    case Kind::Var:
      throw Error("apply: use mk_const or Context::var for leaves");
    case Kind::Concat:
      arity(2);
      width = args[0].width() + args[1].width();
      break;
    case Kind::Extract:
      arity(1);
      hi = aux[0];
      lo = aux[1];
      require(lo <= hi && hi < args[0].width(), kind,
              "bounds [" + std::to_string(hi) + ":" + std::to_string(lo) + "] out of range for width " +
                  std::to_string(args[0].width()));
      width = hi - lo + 1;
      break;
    case Kind::ZeroExtend:
    case Kind::SignExtend:
      arity(1);
      width = args[0].width() + aux[0];
      break;
    case Kind::Not:
    case Kind::Neg:
      arity(1);
      width = args[0].width();
      break;
    case Kind::RedOr:
      arity(1);
      width = 1;
      break;
    case Kind::And:
    case Kind::Or:
    case Kind::Xor:
    case Kind::Add:
    case Kind::Sub:
    case Kind::Mul:
    case Kind::Udiv:
    case Kind::Urem:
    case Kind::Shl:
    case Kind::Lshr:
    case Kind::Ashr:
      arity(2);
      same_width();
      width = args[0].width();
      break;
    case Kind::Eq:
    case Kind::Ult:
    case Kind::Ule:
    case Kind::Slt:
    case Kind::Sle:
      arity(2);
      same_width();
      width = 1;
      break;
    case Kind::Ite:
      arity(3);
      require(args[0].width() == 1, kind, "condition must have width 1");
      require(args[1].width() == args[2].width(), kind, "branch widths differ");
      width = args[1].width();
      break;
  }

  if (kind == Kind::ZeroExtend || kind == Kind::SignExtend) {
    if (aux[0] == 0) return args[0];
  }
  if (kind == Kind::Ite && args[0].is_const()) return args[0].value() != 0 ? args[1] : args[2];
  if (kind == Kind::Ite && args[1] == args[2]) return args[1];

  bool all_const = true;
  for (const auto& a : args) all_const = all_const && a.is_const();
  if (all_const) {
    std::vector<BigUint> vals;
    std::vector<unsigned> widths;
    for (const auto& a : args) {
      vals.push_back(a.value());
      widths.push_back(a.width());
    }
    return mk_const(width, detail::apply_big(kind, width, vals, widths, hi, lo));
  }
  return Expr(std::make_shared<const Node>(Node{kind, width, std::move(args), 0, {}, hi, lo}));
}

// Named constructors.
inline Expr concat(const Expr& hi, const Expr& lo) { return apply(Kind::Concat, {hi, lo}); }
inline Expr extract(const Expr& a, unsigned hi, unsigned lo) {
  if (lo == 0 && hi + 1 == a.width()) return a;
  return apply(Kind::Extract, {a}, {hi, lo});
}
inline Expr bit(const Expr& a, unsigned i) { return extract(a, i, i); }
inline Expr msb(const Expr& a) { return bit(a, a.width() - 1); }
inline Expr zext(const Expr& a, unsigned by) { return apply(Kind::ZeroExtend, {a}, {by, 0}); }
inline Expr sext(const Expr& a, unsigned by) { return apply(Kind::SignExtend, {a}, {by, 0}); }
inline Expr bvnot(const Expr& a) { return apply(Kind::Not, {a}); }
inline Expr bvand(const Expr& a, const Expr& b) { return apply(Kind::And, {a, b}); }
inline Expr bvor(const Expr& a, const Expr& b) { return apply(Kind::Or, {a, b}); }
inline Expr bvxor(const Expr& a, const Expr& b) { return apply(Kind::Xor, {a, b}); }
inline Expr neg(const Expr& a) { return apply(Kind::Neg, {a}); }
inline Expr add(const Expr& a, const Expr& b) { return apply(Kind::Add, {a, b}); }
inline Expr sub(const Expr& a, const Expr& b) { return apply(Kind::Sub, {a, b}); }
inline Expr mul(const Expr& a, const Expr& b) { return apply(Kind::Mul, {a, b}); }
inline Expr udiv(const Expr& a, const Expr& b) { return apply(Kind::Udiv, {a, b}); }
inline Expr urem(const Expr& a, const Expr& b) { return apply(Kind::Urem, {a, b}); }
inline Expr shl(const Expr& a, const Expr& b) { return apply(Kind::Shl, {a, b}); }
inline Expr lshr(const Expr& a, const Expr& b) { return apply(Kind::Lshr, {a, b}); }
inline Expr ashr(const Expr& a, const Expr& b) { return apply(Kind::Ashr, {a, b}); }
inline Expr eq(const Expr& a, const Expr& b) { return apply(Kind::Eq, {a, b}); }
inline Expr ult(const Expr& a, const Expr& b) { return apply(Kind::Ult, {a, b}); }
inline Expr ule(const Expr& a, const Expr& b) { return apply(Kind::Ule, {a, b}); }
inline Expr slt(const Expr& a, const Expr& b) { return apply(Kind::Slt, {a, b}); }
inline Expr sle(const Expr& a, const Expr& b) { return apply(Kind::Sle, {a, b}); }
inline Expr ite(const Expr& c, const Expr& t, const Expr& e) { return apply(Kind::Ite, {c, t, e}); }
inline Expr redor(const Expr& a) { return apply(Kind::RedOr, {a}); }

inline Expr ugt(const Expr& a, const Expr& b) { return ult(b, a); }
inline Expr uge(const Expr& a, const Expr& b) { return ule(b, a); }
inline Expr sgt(const Expr& a, const Expr& b) { return slt(b, a); }
inline Expr sge(const Expr& a, const Expr& b) { return sle(b, a); }
inline Expr ne(const Expr& a, const Expr& b) { return bvnot(eq(a, b)); }
inline Expr is_zero(const Expr& a) { return bvnot(redor(a)); }
inline Expr is_ones(const Expr& a) { return eq(a, mk_ones(a.width())); }
inline Expr implies(const Expr& a, const Expr& b) { return bvor(bvnot(a), b); }

// Constant of the same width as `like`.
inline Expr const_like(const Expr& like, const BigUint& v) { return mk_const(like.width(), v); }
inline Expr sconst_like(const Expr& like, std::int64_t v) { return mk_sconst(like.width(), v); }

inline Expr all_of(std::span<const Expr> xs) {
  Expr acc = mk_true();
  for (const auto& x : xs) acc = bvand(acc, x);
  return acc;
}
inline Expr any_of(std::span<const Expr> xs) {
  Expr acc = mk_false();
  for (const auto& x : xs) acc = bvor(acc, x);
  return acc;
}

// Resize: zero-extend or truncate to `width`.
inline Expr resize_unsigned(const Expr& a, unsigned width) {
  if (a.width() == width) return a;
  return a.width() < width ? zext(a, width - a.width()) : extract(a, width - 1, 0);
}
inline Expr resize_signed(const Expr& a, unsigned width) {
  if (a.width() == width) return a;
  return a.width() < width ? sext(a, width - a.width()) : extract(a, width - 1, 0);
}

// Number of bits needed to hold n as an unsigned value (at least 1).
inline unsigned bits_for(std::uint64_t n) {
  unsigned b = 1;
  while (b < 64 && (n >> b) != 0) ++b;
  return b;
}

// Count of leading zeros as an ite cascade over the bits, width
// bits_for(a.width()). All-zero input yields a.width().
inline Expr count_leading_zeros(const Expr& a) {
  const unsigned w = a.width();
  const unsigned rw = bits_for(w);
  Expr result = mk_const(rw, w);
  for (unsigned i = 0; i < w; ++i) {
    // scanning from the least significant bit upward, the highest set bit wins
    result = ite(bit(a, i), mk_const(rw, w - 1 - i), result);
  }
  return result;
}

// Variable table for one logical context.
class Context {
 public:
  Expr var(const std::string& name, unsigned width) {
    if (name.empty()) throw Error("mk_var: empty name");
    if (width == 0) throw Error("mk_var: width must be at least 1");
    auto it = vars_.find(name);
    if (it != vars_.end()) {
      if (it->second.width() != width) {
        throw Error("mk_var: '" + name + "' redeclared with width " + std::to_string(width) +
                    " (was " + std::to_string(it->second.width()) + ")");
      }
      return it->second;
    }
    Expr v(std::make_shared<const Node>(Node{Kind::Var, width, {}, 0, name, 0, 0}));
    vars_.emplace(name, v);
    return v;
  }

  // Fresh variable named <prefix><counter>, skipping names already taken.
  Expr fresh(std::string_view prefix, unsigned width) {
    std::string name;
    do {
      name = std::string(prefix) + std::to_string(fresh_counter_++);
    } while (vars_.count(name) != 0);
    Expr v = var(name, width);
    fresh_.push_back(v);
    return v;
  }

  const std::map<std::string, Expr>& variables() const { return vars_; }
  const std::vector<Expr>& fresh_variables() const { return fresh_; }
  bool has(const std::string& name) const { return vars_.count(name) != 0; }

 private:
  std::map<std::string, Expr> vars_;
  std::vector<Expr> fresh_;
  unsigned fresh_counter_ = 0;
};

// Bit-string value of a given width, as produced by the evaluator and SAT
// models.
struct BitString {
  unsigned width = 0;
  BigUint value;

  std::string to_binary() const {
    std::string s(width, '0');
    for (unsigned i = 0; i < width; ++i) {
      if (detail::bit_set(value, i)) s[width - 1 - i] = '1';
    }
    return s;
  }
  std::string to_hex() const {
    static constexpr char kDigits[] = "0123456789abcdef";
    const unsigned nd = (width + 3) / 4;
    std::string s(nd, '0');
    for (unsigned d = 0; d < nd; ++d) {
      s[nd - 1 - d] = kDigits[static_cast<unsigned>((value >> (4 * d)) & 0xF)];
    }
    return s;
  }
  friend bool operator==(const BitString&, const BitString&) = default;
};

// Visit every node reachable from roots once, operands before users.
template <typename F>
void for_each_postorder(std::span<const Expr> roots, F&& visit) {
  std::map<const Node*, bool> seen;  // false = expanded, true = done
  std::vector<std::pair<Expr, bool>> stack;
  for (auto it = roots.rbegin(); it != roots.rend(); ++it) stack.emplace_back(*it, false);
  while (!stack.empty()) {
    auto [e, expanded] = stack.back();
    stack.pop_back();
    auto found = seen.find(e.get());
    if (expanded) {
      if (found != seen.end() && found->second) continue;
      seen[e.get()] = true;
      visit(e);
      continue;
    }
    if (found != seen.end()) continue;
    seen[e.get()] = false;
    stack.emplace_back(e, true);
    for (auto a = e.args().rbegin(); a != e.args().rend(); ++a) {
      if (seen.find(a->get()) == seen.end()) stack.emplace_back(*a, false);
    }
  }
}

// Free variables reachable from roots, keyed by name.
inline std::map<std::string, unsigned> free_variables(std::span<const Expr> roots) {
  std::map<std::string, unsigned> out;
  for_each_postorder(roots, [&](const Expr& e) {
    if (e.is_var()) out.emplace(e.name(), e.width());
  });
  return out;
}

inline std::size_t node_count(std::span<const Expr> roots) {
  std::size_t n = 0;
  for_each_postorder(roots, [&](const Expr&) { ++n; });
  return n;
}

}  // namespace fpblast::bv
