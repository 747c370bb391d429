// Concrete evaluation of bit-vector expressions.
//
// Evaluator compiles a DAG once into a flat instruction list and can then be
// run many times with different inputs. When every node is at most 64 bits
// wide the machine-word path is used; otherwise values are big integers.
#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>

#include "fpblast/bitvec.hpp"

namespace fpblast::bv {

namespace detail {

inline std::uint64_t mask64(unsigned w) { return w >= 64 ? ~0ULL : ((1ULL << w) - 1); }

inline std::uint64_t apply_word(Kind kind, unsigned width, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                unsigned aw, unsigned bw, unsigned hi, unsigned lo) {
  const std::uint64_t m = mask64(width);
  switch (kind) {
    case Kind::Concat: return (a << bw) | b;
    case Kind::Extract: return (a >> lo) & mask64(hi - lo + 1);
    case Kind::ZeroExtend: return a;
    case Kind::SignExtend: return ((a >> (aw - 1)) & 1) ? (a | (m & ~mask64(aw))) : a;
    case Kind::Not: return ~a & m;
    case Kind::And: return a & b;
    case Kind::Or: return a | b;
    case Kind::Xor: return a ^ b;
    case Kind::Neg: return (~a + 1) & m;
    case Kind::Add: return (a + b) & m;
    case Kind::Sub: return (a - b) & m;
    case Kind::Mul: return (a * b) & m;
    case Kind::Udiv: return b == 0 ? m : a / b;
    case Kind::Urem: return b == 0 ? a : a % b;
    case Kind::Shl: return b >= width ? 0 : (a << b) & m;
    case Kind::Lshr: return b >= width ? 0 : a >> b;
    case Kind::Ashr: {
      const bool negative = (a >> (width - 1)) & 1;
      if (b >= width) return negative ? m : 0;
      std::uint64_t r = a >> b;
      if (negative) r |= m & ~(m >> b);
      return r;
    }
    case Kind::Eq: return a == b;
    case Kind::Ult: return a < b;
    case Kind::Ule: return a <= b;
    case Kind::Slt:
    case Kind::Sle: {
      const std::uint64_t flip = 1ULL << (aw - 1);
      return kind == Kind::Slt ? (a ^ flip) < (b ^ flip) : (a ^ flip) <= (b ^ flip);
    }
    case Kind::Ite: return a ? b : c;
    case Kind::RedOr: return a != 0;
    case Kind::Const:
    case Kind::Var: break;
  }
  return 0;
}

}  // namespace detail

class Evaluator {
 public:
  explicit Evaluator(std::vector<Expr> roots) : roots_(std::move(roots)) {
    std::unordered_map<const Node*, unsigned> slot;
    for_each_postorder(roots_, [&](const Expr& e) {
      const auto idx = static_cast<unsigned>(instrs_.size());
      Instr in{};
      in.kind = e.kind();
      in.width = e.width();
      in.hi = e.hi();
      in.lo = e.lo();
      const auto args = e.args();
      if (args.size() > 0) { in.a = slot.at(args[0].get()); in.aw = args[0].width(); }
      if (args.size() > 1) { in.b = slot.at(args[1].get()); in.bw = args[1].width(); }
      if (args.size() > 2) { in.c = slot.at(args[2].get()); }
      if (e.width() > 64) wide_ = true;
      if (e.is_const()) in.const_index = static_cast<unsigned>(add_const(e.value()));
      if (e.is_var()) {
        auto [it, inserted] = inputs_.emplace(e.name(), static_cast<unsigned>(input_slots_.size()));
        if (!inserted) throw Error("eval: variable '" + e.name() + "' occurs with two node identities");
        input_slots_.push_back(idx);
        input_widths_.push_back(e.width());
      }
      slot.emplace(e.get(), idx);
      instrs_.push_back(in);
    });
    for (const auto& r : roots_) root_slots_.push_back(slot.at(r.get()));
    if (wide_) {
      big_.assign(instrs_.size(), 0);
      for (std::size_t i = 0; i < instrs_.size(); ++i) {
        if (instrs_[i].kind == Kind::Const) big_[i] = consts_[instrs_[i].const_index];
      }
    } else {
      word_.assign(instrs_.size(), 0);
      for (std::size_t i = 0; i < instrs_.size(); ++i) {
        if (instrs_[i].kind == Kind::Const) word_[i] = static_cast<std::uint64_t>(consts_[instrs_[i].const_index]);
      }
    }
    assigned_.assign(input_slots_.size(), false);
  }

  bool uses_words() const { return !wide_; }
  std::size_t size() const { return instrs_.size(); }
  std::size_t root_count() const { return roots_.size(); }
  const std::map<std::string, unsigned>& inputs() const { return inputs_; }

  // Index of a named input, if the variable occurs in the DAG.
  std::optional<unsigned> input(const std::string& name) const {
    auto it = inputs_.find(name);
    if (it == inputs_.end()) return std::nullopt;
    return it->second;
  }

  unsigned input_width(unsigned input) const { return input_widths_[input]; }

  void set(unsigned input, std::uint64_t v) {
    const unsigned s = input_slots_[input];
    if (wide_) big_[s] = BigUint(v) & low_mask(input_widths_[input]);
    else word_[s] = v & detail::mask64(input_widths_[input]);
    assigned_[input] = true;
  }
  void set(unsigned input, const BigUint& v) {
    const unsigned s = input_slots_[input];
    if (v < 0 || v > low_mask(input_widths_[input])) {
      throw Error("eval: value does not fit input width " + std::to_string(input_widths_[input]));
    }
    if (wide_) big_[s] = v;
    else word_[s] = static_cast<std::uint64_t>(v);
    assigned_[input] = true;
  }

  void run() {
    for (std::size_t i = 0; i < assigned_.size(); ++i) {
      if (!assigned_[i]) throw Error("eval: variable '" + input_name(static_cast<unsigned>(i)) + "' is unassigned");
    }
    if (wide_) run_big();
    else run_words();
  }

  // Result of root i after run(). word() requires the root to be <= 64 bits.
  std::uint64_t word(std::size_t root) const {
    const unsigned s = root_slots_[root];
    if (wide_) return static_cast<std::uint64_t>(big_[s]);
    return word_[s];
  }
  BigUint big(std::size_t root) const {
    const unsigned s = root_slots_[root];
    return wide_ ? big_[s] : BigUint(word_[s]);
  }
  BitString bits(std::size_t root) const { return {roots_[root].width(), big(root)}; }

 private:
  struct Instr {
    Kind kind;
    unsigned width;
    unsigned a = 0, b = 0, c = 0;
    unsigned aw = 0, bw = 0;
    unsigned hi = 0, lo = 0;
    unsigned const_index = 0;
  };

  std::size_t add_const(const BigUint& v) {
    consts_.push_back(v);
    return consts_.size() - 1;
  }

  std::string input_name(unsigned idx) const {
    for (const auto& [name, i] : inputs_) {
      if (i == idx) return name;
    }
    return "?";
  }

  void run_words() {
    std::uint64_t* v = word_.data();
    const std::size_t n = instrs_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Instr& in = instrs_[i];
      if (in.kind == Kind::Const || in.kind == Kind::Var) continue;
      v[i] = detail::apply_word(in.kind, in.width, v[in.a], v[in.b], v[in.c], in.aw, in.bw, in.hi, in.lo);
    }
  }

  void run_big() {
    std::vector<BigUint> args;
    std::vector<unsigned> widths;
    for (std::size_t i = 0; i < instrs_.size(); ++i) {
      const Instr& in = instrs_[i];
      if (in.kind == Kind::Const || in.kind == Kind::Var) continue;
      args.clear();
      widths.clear();
      const std::size_t arity = in.kind == Kind::Ite ? 3 : (in.bw != 0 ? 2 : 1);
      args.push_back(big_[in.a]);
      widths.push_back(in.aw);
      if (arity > 1) { args.push_back(big_[in.b]); widths.push_back(in.bw); }
      if (arity > 2) { args.push_back(big_[in.c]); widths.push_back(in.bw); }
      big_[i] = detail::apply_big(in.kind, in.width, args, widths, in.hi, in.lo);
    }
  }

  std::vector<Expr> roots_;
  std::vector<Instr> instrs_;
  std::vector<BigUint> consts_;
  std::map<std::string, unsigned> inputs_;
  std::vector<unsigned> input_slots_;
  std::vector<unsigned> input_widths_;
  std::vector<unsigned> root_slots_;
  std::vector<bool> assigned_;
  std::vector<std::uint64_t> word_;
  std::vector<BigUint> big_;
  bool wide_ = false;
};

using Env = std::map<std::string, BitString>;

// One-shot evaluation. Every variable reachable from expr must be bound in env
// with a matching width.
inline BitString eval(const Expr& expr, const Env& env) {
  Evaluator ev({expr});
  for (const auto& [name, idx] : ev.inputs()) {
    auto it = env.find(name);
    if (it == env.end()) throw Error("eval: variable '" + name + "' is unassigned");
    const auto width = ev.input_width(idx);
    if (it->second.width != width) {
      throw Error("eval: variable '" + name + "' bound with width " + std::to_string(it->second.width) +
                  ", expected " + std::to_string(width));
    }
    ev.set(idx, it->second.value);
  }
  ev.run();
  return ev.bits(0);
}

}  // namespace fpblast::bv
