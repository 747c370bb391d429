// Tseitin conversion of bit-vector formulas to CNF, plus a small DPLL solver
// used to check the encodings at desk scale.
#pragma once

#include <algorithm>
#include <chrono>
#include <limits>
#include <optional>
#include <unordered_map>

#include "fpblast/bitvec.hpp"

namespace fpblast::bv {

struct CnfFormula {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;
  // BvExpr variable -> (first CNF variable, width). Bit i is CNF variable first+i.
  std::map<std::string, std::pair<int, unsigned>> var_map;
};

class TseitinEncoder {
 public:
  static constexpr int kTrue = std::numeric_limits<int>::max();
  static constexpr int kFalse = -kTrue;

  // Reserve CNF variables for a BvExpr variable. Variables not declared up
  // front are allocated on first use.
  void declare(const std::string& name, unsigned width) {
    if (f_.var_map.count(name) != 0) {
      if (f_.var_map[name].second != width) throw Error("to_cnf: width conflict for '" + name + "'");
      return;
    }
    const int first = f_.num_vars + 1;
    f_.num_vars += static_cast<int>(width);
    f_.var_map.emplace(name, std::make_pair(first, width));
  }

  // Literals for each bit of e, least significant first.
  const std::vector<int>& encode(const Expr& e) {
    for_each_postorder(std::span<const Expr>(&e, 1), [&](const Expr& n) {
      if (bits_.count(n.get()) == 0) bits_.emplace(n.get(), blast(n));
    });
    return bits_.at(e.get());
  }

  void assert_true(const Expr& e) {
    if (e.width() != 1) throw Error("to_cnf: assertion must have width 1, got " + std::to_string(e.width()));
    const int lit = encode(e)[0];
    if (lit == kTrue) return;
    if (lit == kFalse) {
      f_.clauses.emplace_back();
      return;
    }
    f_.clauses.push_back({lit});
  }

  const CnfFormula& formula() const { return f_; }

 private:
  using Bits = std::vector<int>;

  int fresh() { return ++f_.num_vars; }
  void clause(std::initializer_list<int> lits) {
    std::vector<int> c;
    for (int l : lits) {
      if (l == kTrue) return;
      if (l != kFalse) c.push_back(l);
    }
    f_.clauses.push_back(std::move(c));
  }

  static int lnot(int a) { return -a; }

  int land(int a, int b) {
    if (a == kFalse || b == kFalse || a == -b) return kFalse;
    if (a == kTrue || a == b) return b;
    if (b == kTrue) return a;
    const int g = fresh();
    clause({-g, a});
    clause({-g, b});
    clause({g, -a, -b});
    return g;
  }
  int lor(int a, int b) { return -land(-a, -b); }
  int lxor(int a, int b) {
    if (a == kFalse) return b;
    if (b == kFalse) return a;
    if (a == kTrue) return -b;
    if (b == kTrue) return -a;
    if (a == b) return kFalse;
    if (a == -b) return kTrue;
    const int g = fresh();
    clause({-g, a, b});
    clause({-g, -a, -b});
    clause({g, -a, b});
    clause({g, a, -b});
    return g;
  }
  int lmux(int c, int t, int e) {
    if (c == kTrue || t == e) return t;
    if (c == kFalse) return e;
    if (t == kTrue && e == kFalse) return c;
    if (t == kFalse && e == kTrue) return -c;
    const int g = fresh();
    clause({-c, -t, g});
    clause({-c, t, -g});
    clause({c, -e, g});
    clause({c, e, -g});
    return g;
  }

  // a + b + cin, returns sum bits and writes the carry out.
  Bits adder(const Bits& a, const Bits& b, int cin, int* cout = nullptr) {
    Bits s(a.size());
    int c = cin;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const int axb = lxor(a[i], b[i]);
      s[i] = lxor(axb, c);
      c = lor(land(a[i], b[i]), land(c, axb));
    }
    if (cout) *cout = c;
    return s;
  }
  static Bits invert(const Bits& a) {
    Bits r(a.size());
    std::transform(a.begin(), a.end(), r.begin(), lnot);
    return r;
  }
  // a - b; carry out is 1 iff a >= b (unsigned).
  Bits subtract(const Bits& a, const Bits& b, int* no_borrow = nullptr) { return adder(a, invert(b), kTrue, no_borrow); }

  int ult_bits(const Bits& a, const Bits& b) {
    int ge = kTrue;
    subtract(a, b, &ge);
    return -ge;
  }

  Bits mux_bits(int c, const Bits& t, const Bits& e) {
    Bits r(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) r[i] = lmux(c, t[i], e[i]);
    return r;
  }

  enum class Shift { Left, LogicalRight, ArithRight };
  Bits shifter(const Bits& a, const Bits& amount, Shift dir) {
    const std::size_t w = a.size();
    const int fill = dir == Shift::ArithRight ? a.back() : kFalse;
    Bits cur = a;
    std::size_t stage = 0;
    for (; stage < amount.size() && (std::size_t{1} << stage) < w; ++stage) {
      const std::size_t k = std::size_t{1} << stage;
      Bits moved(w);
      for (std::size_t i = 0; i < w; ++i) {
        if (dir == Shift::Left) moved[i] = i >= k ? cur[i - k] : kFalse;
        else moved[i] = i + k < w ? cur[i + k] : fill;
      }
      cur = mux_bits(amount[stage], moved, cur);
    }
    int overflow = kFalse;
    for (; stage < amount.size(); ++stage) overflow = lor(overflow, amount[stage]);
    return mux_bits(overflow, Bits(w, fill), cur);
  }

  std::pair<Bits, Bits> divider(const Bits& a, const Bits& b) {
    const std::size_t w = a.size();
    Bits q(w, kFalse);
    Bits rem(w, kFalse);
    Bits wide_b = b;
    wide_b.push_back(kFalse);
    for (std::size_t step = 0; step < w; ++step) {
      const std::size_t i = w - 1 - step;
      Bits shifted(w + 1);
      shifted[0] = a[i];
      for (std::size_t j = 0; j < w; ++j) shifted[j + 1] = rem[j];
      int ge = kTrue;
      Bits diff = subtract(shifted, wide_b, &ge);
      q[i] = ge;
      Bits next = mux_bits(ge, diff, shifted);
      next.pop_back();
      rem = std::move(next);
    }
    return {q, rem};
  }

  Bits blast(const Expr& n) {
    const unsigned w = n.width();
    auto arg = [&](std::size_t i) -> const Bits& { return bits_.at(n.arg(i).get()); };
    switch (n.kind()) {
      case Kind::Const: {
        Bits r(w);
        for (unsigned i = 0; i < w; ++i) r[i] = detail::bit_set(n.value(), i) ? kTrue : kFalse;
        return r;
      }
      case Kind::Var: {
        declare(n.name(), w);
        const auto [first, width] = f_.var_map.at(n.name());
        Bits r(w);
        for (unsigned i = 0; i < w; ++i) r[i] = first + static_cast<int>(i);
        return r;
      }
      case Kind::Concat: {
        Bits r = arg(1);
        r.insert(r.end(), arg(0).begin(), arg(0).end());
        return r;
      }
      case Kind::Extract: return Bits(arg(0).begin() + n.lo(), arg(0).begin() + n.hi() + 1);
      case Kind::ZeroExtend: {
        Bits r = arg(0);
        r.resize(w, kFalse);
        return r;
      }
      case Kind::SignExtend: {
        Bits r = arg(0);
        r.resize(w, arg(0).back());
        return r;
      }
      case Kind::Not: return invert(arg(0));
      case Kind::And:
      case Kind::Or:
      case Kind::Xor: {
        Bits r(w);
        for (unsigned i = 0; i < w; ++i) {
          const int a = arg(0)[i], b = arg(1)[i];
          r[i] = n.kind() == Kind::And ? land(a, b) : n.kind() == Kind::Or ? lor(a, b) : lxor(a, b);
        }
        return r;
      }
      case Kind::Neg: return subtract(Bits(w, kFalse), arg(0));
      case Kind::Add: return adder(arg(0), arg(1), kFalse);
      case Kind::Sub: return subtract(arg(0), arg(1));
      case Kind::Mul: {
        const Bits& a = arg(0);
        const Bits& b = arg(1);
        Bits acc(w, kFalse);
        for (unsigned i = 0; i < w; ++i) {
          Bits partial(w, kFalse);
          for (unsigned j = i; j < w; ++j) partial[j] = land(a[j - i], b[i]);
          acc = adder(acc, partial, kFalse);
        }
        return acc;
      }
      case Kind::Udiv: return divider(arg(0), arg(1)).first;
      case Kind::Urem: return divider(arg(0), arg(1)).second;
      case Kind::Shl: return shifter(arg(0), arg(1), Shift::Left);
      case Kind::Lshr: return shifter(arg(0), arg(1), Shift::LogicalRight);
      case Kind::Ashr: return shifter(arg(0), arg(1), Shift::ArithRight);
      case Kind::Eq: {
        int acc = kTrue;
        for (std::size_t i = 0; i < arg(0).size(); ++i) acc = land(acc, -lxor(arg(0)[i], arg(1)[i]));
        return {acc};
      }
      case Kind::Ult: return {ult_bits(arg(0), arg(1))};
      case Kind::Ule: return {-ult_bits(arg(1), arg(0))};
      case Kind::Slt:
      case Kind::Sle: {
        Bits a = arg(0), b = arg(1);
        a.back() = -a.back();
        b.back() = -b.back();
        return {n.kind() == Kind::Slt ? ult_bits(a, b) : -ult_bits(b, a)};
      }
      case Kind::Ite: return mux_bits(arg(0)[0], arg(1), arg(2));
      case Kind::RedOr: {
        int acc = kFalse;
        for (int l : arg(0)) acc = lor(acc, l);
        return {acc};
      }
    }
    throw Error("to_cnf: unsupported node");
  }

  CnfFormula f_;
  std::unordered_map<const Node*, Bits> bits_;
};

// Equisatisfiable CNF asserting expr = 1. Input variables are allocated first,
// in lexicographic order, least significant bit at the lowest index.
inline CnfFormula to_cnf(const Expr& expr) {
  if (expr.width() != 1) throw Error("to_cnf: expression must have width 1, got " + std::to_string(expr.width()));
  TseitinEncoder enc;
  for (const auto& [name, width] : free_variables(std::span<const Expr>(&expr, 1))) enc.declare(name, width);
  enc.assert_true(expr);
  return enc.formula();
}

// Chronological-backtracking DPLL with two watched literals. Decisions follow
// variable order, so Tseitin encodings branch on inputs first. Returns the
// assignment (index 0 unused) or nullopt when unsatisfiable; throws on
// deadline expiry.
class DpllSolver {
 public:
  struct Timeout {};

  explicit DpllSolver(const CnfFormula& f) : n_(f.num_vars), clauses_(f.clauses) {}

  std::optional<std::vector<bool>> solve(std::optional<std::chrono::steady_clock::time_point> deadline = {}) {
    val_.assign(n_ + 1, 0);
    watches_.assign(2 * (n_ + 1), {});
    trail_.clear();
    qhead_ = 0;
    for (std::size_t ci = 0; ci < clauses_.size(); ++ci) {
      auto& c = clauses_[ci];
      std::sort(c.begin(), c.end());
      c.erase(std::unique(c.begin(), c.end()), c.end());
      if (c.empty()) return std::nullopt;
      if (c.size() == 1) {
        if (value(c[0]) < 0) return std::nullopt;
        if (value(c[0]) == 0) enqueue(c[0], false);
        continue;
      }
      watches_[index(c[0])].push_back(ci);
      watches_[index(c[1])].push_back(ci);
    }
    int next_var = 1;
    std::size_t steps = 0;
    while (true) {
      if (deadline && (++steps & 0xFF) == 0 && std::chrono::steady_clock::now() > *deadline) throw Timeout{};
      if (!propagate()) {
        // backtrack to the most recent unflipped decision
        while (!trail_.empty() && !(trail_.back().decision && !trail_.back().flipped)) {
          val_[std::abs(trail_.back().lit)] = 0;
          trail_.pop_back();
        }
        if (trail_.empty()) return std::nullopt;
        const int lit = trail_.back().lit;
        val_[std::abs(lit)] = 0;
        trail_.pop_back();
        qhead_ = trail_.size();
        enqueue(-lit, true, true);
        next_var = 1;
        continue;
      }
      while (next_var <= n_ && val_[next_var] != 0) ++next_var;
      if (next_var > n_) break;
      enqueue(-next_var, true);
    }
    std::vector<bool> model(n_ + 1, false);
    for (int v = 1; v <= n_; ++v) model[v] = val_[v] > 0;
    return model;
  }

 private:
  struct TrailEntry {
    int lit;
    bool decision;
    bool flipped;
  };

  static std::size_t index(int lit) { return 2 * static_cast<std::size_t>(std::abs(lit)) + (lit < 0 ? 1 : 0); }
  int value(int lit) const {
    const int v = val_[std::abs(lit)];
    return lit > 0 ? v : -v;
  }
  void enqueue(int lit, bool decision, bool flipped = false) {
    val_[std::abs(lit)] = lit > 0 ? 1 : -1;
    trail_.push_back({lit, decision, flipped});
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      const int falsified = -trail_[qhead_++].lit;
      auto& ws = watches_[index(falsified)];
      std::size_t keep = 0;
      bool conflict = false;
      for (std::size_t k = 0; k < ws.size(); ++k) {
        const std::size_t ci = ws[k];
        if (conflict) {
          ws[keep++] = ci;
          continue;
        }
        auto& c = clauses_[ci];
        if (c[0] == falsified) std::swap(c[0], c[1]);
        if (value(c[0]) > 0) {
          ws[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < c.size(); ++j) {
          if (value(c[j]) >= 0) {
            std::swap(c[1], c[j]);
            watches_[index(c[1])].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[keep++] = ci;
        if (value(c[0]) < 0) conflict = true;
        else enqueue(c[0], false);
      }
      ws.resize(keep);
      if (conflict) return false;
    }
    return true;
  }

  int n_;
  std::vector<std::vector<int>> clauses_;
  std::vector<int> val_;
  std::vector<std::vector<std::size_t>> watches_;
  std::vector<TrailEntry> trail_;
  std::size_t qhead_ = 0;
};

}  // namespace fpblast::bv
