// Differential testing of the blasted operators against the rational oracle.
//
// Each operator is blasted once over symbolic operands and a symbolic rounding
// mode, then evaluated concretely for every case and compared bit-exactly with
// the oracle. Sweeps are exhaustive when the operand space has at most
// kExhaustiveBits bits, otherwise they draw seeded random operands.
#pragma once

#include <functional>
#include <random>
#include <sstream>

#include "fpblast/eval.hpp"
#include "fpblast/ops.hpp"

namespace fpblast::difftest {

inline constexpr unsigned kExhaustiveBits = 16;
inline constexpr std::uint64_t kDefaultFmaSamples = 100000;
inline constexpr std::size_t kMaxCounterexamples = 10;

inline const std::vector<std::string>& all_ops() {
  static const std::vector<std::string> ops = {"add",     "sub",   "mul",    "div",    "fma",   "sqrt",
                                               "abs",     "neg",   "rti",    "classify", "compare", "to_sbv",
                                               "to_ubv",  "to_fp", "from_sbv", "from_ubv"};
  return ops;
}

struct Options {
  FpFormat format = FpFormat::fp8();
  std::vector<std::string> ops = all_ops();
  std::vector<RoundingMode> modes{kAllRoundingModes.begin(), kAllRoundingModes.end()};
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 42;
};

struct Counterexample {
  std::string op;
  std::string detail;  // operands and mode
  std::string expected;
  std::string got;
};

struct OpReport {
  std::string op;
  std::uint64_t cases = 0;
  std::uint64_t mismatches = 0;
  bool sampled = false;
};

struct Report {
  std::vector<OpReport> ops;
  std::vector<Counterexample> counterexamples;

  std::uint64_t mismatches() const {
    std::uint64_t n = 0;
    for (const auto& o : ops) n += o.mismatches;
    return n;
  }
  std::uint64_t cases() const {
    std::uint64_t n = 0;
    for (const auto& o : ops) n += o.cases;
    return n;
  }
};

inline std::string hex(const BigUint& v, unsigned width) {
  std::string digits = bv::BitString{width, v}.to_hex();
  return "0x" + digits;
}

namespace detail {

// Operand tuples: either every pattern in order, or seeded random draws.
class OperandSource {
 public:
  OperandSource(std::vector<unsigned> widths, std::optional<std::uint64_t> samples, std::uint64_t seed)
      : widths_(std::move(widths)), rng_(seed) {
    unsigned total = 0;
    for (unsigned w : widths_) total += w;
    if (total <= kExhaustiveBits && (!samples || *samples >= (std::uint64_t{1} << total))) {
      count_ = std::uint64_t{1} << total;
      exhaustive_ = true;
    } else {
      if (!samples) {
        throw Error("operand space of " + std::to_string(total) + " bits is too large for an exhaustive sweep; "
                    "give a sample count");
      }
      count_ = *samples;
    }
  }

  std::uint64_t count() const { return count_; }
  bool exhaustive() const { return exhaustive_; }

  std::vector<BigUint> operands(std::uint64_t k) {
    std::vector<BigUint> out;
    if (exhaustive_) {
      for (unsigned w : widths_) {
        out.push_back(BigUint(k & bv::detail::mask64(w)));
        k >>= w;
      }
      return out;
    }
    for (unsigned w : widths_) out.push_back(random_bits(w));
    // Pull the second operand's exponent next to the first one's now and then
    // so that cancellation and near ties get exercised.
    if (out.size() >= 2 && widths_[0] == widths_[1] && (rng_() & 3) == 0 && exponent_bits_ > 0) {
      const unsigned sb = widths_[0] - 1 - exponent_bits_;
      const BigUint field_mask = low_mask(exponent_bits_) << sb;
      BigUint field = (out[0] & field_mask) >> sb;
      const int delta = static_cast<int>(rng_() % 5) - 2;
      if (delta < 0 && field >= static_cast<unsigned>(-delta)) field -= static_cast<unsigned>(-delta);
      if (delta > 0 && field + static_cast<unsigned>(delta) <= low_mask(exponent_bits_)) {
        field += static_cast<unsigned>(delta);
      }
      out[1] = (out[1] & ~field_mask & low_mask(widths_[1])) | (field << sb);
    }
    return out;
  }

  void set_exponent_bits(unsigned eb) { exponent_bits_ = eb; }

 private:
  BigUint random_bits(unsigned w) {
    BigUint v = 0;
    for (unsigned done = 0; done < w; done += 64) v = (v << 64) | BigUint(rng_());
    return v & low_mask(w);
  }

  std::vector<unsigned> widths_;
  std::mt19937_64 rng_;
  std::uint64_t count_ = 0;
  bool exhaustive_ = false;
  unsigned exponent_bits_ = 0;
};

// One sweep: a circuit over named inputs with one or more roots, a list of
// operand widths and an oracle producing the expected value of every root.
struct Sweep {
  std::string op;
  std::vector<std::string> inputs;
  std::vector<unsigned> widths;
  std::vector<bv::Expr> roots;
  bool uses_rm = false;
  std::optional<std::string> fresh;  // free variable standing for an unrepresentable result
  FpFormat operand_format;
  // Expected root values; nullopt for "unconstrained" (result must follow the fresh variable).
  std::function<std::vector<std::optional<BigUint>>(const std::vector<BigUint>&, RoundingMode)> oracle;
  std::function<std::string(std::size_t root)> root_name = [](std::size_t) { return std::string(); };
};

class Runner {
 public:
  Runner(const Options& opt, Report& report) : opt_(opt), report_(report) {}

  void run(const Sweep& s) {
    OpReport rep{s.op, 0, 0, false};
    bv::Evaluator ev(s.roots);
    const auto rm_input = ev.input("rm");
    const auto fresh_input = s.fresh ? ev.input(*s.fresh) : std::nullopt;
    std::vector<std::optional<unsigned>> inputs;
    for (const auto& name : s.inputs) inputs.push_back(ev.input(name));

    std::uint64_t seed = opt_.seed;
    for (char c : s.op) seed = seed * 131 + static_cast<unsigned char>(c);
    OperandSource source(s.widths, s.op == "fma" && !opt_.samples ? std::optional(kDefaultFmaSamples) : opt_.samples,
                         seed);
    source.set_exponent_bits(s.operand_format.eb());
    rep.sampled = !source.exhaustive();
    std::mt19937_64 fresh_rng(seed ^ 0x9e3779b97f4a7c15ULL);

    const std::vector<RoundingMode> modes =
        s.uses_rm ? opt_.modes : std::vector<RoundingMode>{RoundingMode::RNE};
    for (std::uint64_t k = 0; k < source.count(); ++k) {
      const auto operands = source.operands(k);
      for (std::size_t i = 0; i < operands.size(); ++i) {
        if (inputs[i]) ev.set(*inputs[i], operands[i]);
      }
      for (RoundingMode rm : modes) {
        if (rm_input) ev.set(*rm_input, static_cast<std::uint64_t>(rm));
        const auto expected = s.oracle(operands, rm);
        const bool unconstrained =
            std::any_of(expected.begin(), expected.end(), [](const auto& e) { return !e.has_value(); });
        // Unconstrained results must follow the fresh variable for two different values.
        const int rounds = fresh_input && unconstrained ? 2 : 1;
        for (int round = 0; round < rounds; ++round) {
          BigUint fresh_value = 0;
          if (fresh_input) {
            const BigUint mask = low_mask(ev.input_width(*fresh_input));
            fresh_value = BigUint(fresh_rng()) & mask;
            if (round == 1) fresh_value ^= mask;
            ev.set(*fresh_input, fresh_value);
          }
          ev.run();
          std::optional<std::size_t> bad_root;
          for (std::size_t r = 0; r < s.roots.size() && !bad_root; ++r) {
            if (ev.big(r) != (expected[r] ? *expected[r] : fresh_value)) bad_root = r;
          }
          if (bad_root) {
            ++rep.mismatches;
            record(s, operands, rm, *bad_root, expected[*bad_root], ev.big(*bad_root));
            break;
          }
        }
        ++rep.cases;
      }
    }
    report_.ops.push_back(rep);
  }

 private:
  void record(const Sweep& s, const std::vector<BigUint>& operands, RoundingMode rm, std::size_t root,
              const std::optional<BigUint>& expected, const BigUint& got) {
    if (report_.counterexamples.size() >= kMaxCounterexamples) return;
    std::ostringstream detail;
    const std::string name = s.root_name(root);
    if (!name.empty()) detail << name << ' ';
    if (s.uses_rm) detail << rounding_mode_name(rm) << ' ';
    for (std::size_t i = 0; i < operands.size(); ++i) {
      detail << (i ? " " : "") << s.inputs[i] << '=' << hex(operands[i], s.widths[i]);
    }
    const unsigned w = s.roots[root].width();
    report_.counterexamples.push_back(
        {s.op, detail.str(), expected ? hex(*expected, w) : std::string("<unconstrained>"), hex(got, w)});
  }

  const Options& opt_;
  Report& report_;
};

}  // namespace detail

inline std::vector<bv::Expr> roots_of(const FpBits& x) { return {x.bits()}; }

// Runs the requested sweeps. Throws Error on unknown op names or when a sweep
// would need to be exhaustive over too many bits.
inline Report run(const Options& opt) {
  using detail::Sweep;
  const FpFormat f = opt.format;
  const unsigned w = f.total_width();
  for (const auto& op : opt.ops) {
    if (std::find(all_ops().begin(), all_ops().end(), op) == all_ops().end()) {
      std::string known;
      for (const auto& o : all_ops()) known += (known.empty() ? "" : ", ") + o;
      throw Error("unknown difftest op '" + op + "' (known: " + known + ")");
    }
  }
  if (opt.modes.empty()) throw Error("difftest: no rounding modes selected");

  Report report;
  detail::Runner runner(opt, report);
  bv::Context vars;
  const bv::Expr rm = vars.var("rm", 3);
  const FpBits x{vars.var("x", w), f};
  const FpBits y{vars.var("y", w), f};
  const FpBits z{vars.var("z", w), f};
  const auto one = [](BigUint v) { return std::vector<std::optional<BigUint>>{std::move(v)}; };
  const auto selected = [&](const std::string& op) {
    return std::find(opt.ops.begin(), opt.ops.end(), op) != opt.ops.end();
  };

  using BinOp = FpBits (*)(const bv::Expr&, const FpBits&, const FpBits&);
  using BinOracle = BigUint (*)(const FpFormat&, RoundingMode, const BigUint&, const BigUint&);
  const std::vector<std::tuple<std::string, BinOp, BinOracle>> binary = {
      {"add", fp_add, oracle::op_add},
      {"sub", fp_sub, oracle::op_sub},
      {"mul", fp_mul, oracle::op_mul},
      {"div", fp_div, oracle::op_div}};
  for (const auto& [name, op, ref] : binary) {
    if (!selected(name)) continue;
    Sweep s{name, {"x", "y"}, {w, w}, roots_of(op(rm, x, y)), true, {}, f,
            [&, ref = ref](const std::vector<BigUint>& v, RoundingMode m) { return one(ref(f, m, v[0], v[1])); }};
    runner.run(s);
  }
  if (selected("fma")) {
    runner.run({"fma", {"x", "y", "z"}, {w, w, w}, roots_of(fp_fma(rm, x, y, z)), true, {}, f,
                [&](const std::vector<BigUint>& v, RoundingMode m) { return one(oracle::op_fma(f, m, v[0], v[1], v[2])); }});
  }
  if (selected("sqrt")) {
    runner.run({"sqrt", {"x"}, {w}, roots_of(fp_sqrt(rm, x)), true, {}, f,
                [&](const std::vector<BigUint>& v, RoundingMode m) { return one(oracle::op_sqrt(f, m, v[0])); }});
  }
  if (selected("abs")) {
    runner.run({"abs", {"x"}, {w}, roots_of(fp_abs(x)), false, {}, f,
                [&](const std::vector<BigUint>& v, RoundingMode) { return one(oracle::op_abs(f, v[0])); }});
  }
  if (selected("neg")) {
    runner.run({"neg", {"x"}, {w}, roots_of(fp_neg(x)), false, {}, f,
                [&](const std::vector<BigUint>& v, RoundingMode) { return one(oracle::op_neg(f, v[0])); }});
  }
  if (selected("rti")) {
    runner.run({"rti", {"x"}, {w}, roots_of(fp_round_to_integral(rm, x)), true, {}, f,
                [&](const std::vector<BigUint>& v, RoundingMode m) {
                  return one(oracle::op_round_to_integral(f, m, v[0]));
                }});
  }
  if (selected("classify")) {
    std::vector<bv::Expr> roots;
    for (FpClassKind k : kAllClassKinds) roots.push_back(fp_is(k, x));
    Sweep s{"classify", {"x"}, {w}, roots, false, {}, f,
            [&](const std::vector<BigUint>& v, RoundingMode) {
              std::vector<std::optional<BigUint>> out;
              for (FpClassKind k : kAllClassKinds) out.emplace_back(oracle::op_classify(k, f, v[0]) ? 1 : 0);
              return out;
            }};
    s.root_name = [](std::size_t r) { return std::string(class_kind_name(kAllClassKinds[r])); };
    runner.run(s);
  }
  if (selected("compare")) {
    std::vector<bv::Expr> roots;
    for (FpCmpKind k : kAllCmpKinds) roots.push_back(fp_compare(k, x, y));
    Sweep s{"compare", {"x", "y"}, {w, w}, roots, false, {}, f,
            [&](const std::vector<BigUint>& v, RoundingMode) {
              std::vector<std::optional<BigUint>> out;
              for (FpCmpKind k : kAllCmpKinds) out.emplace_back(oracle::op_compare(k, f, v[0], v[1]) ? 1 : 0);
              return out;
            }};
    s.root_name = [](std::size_t r) { return std::string(cmp_kind_name(kAllCmpKinds[r])); };
    runner.run(s);
  }
  for (const bool is_signed : {true, false}) {
    const std::string name = is_signed ? "to_sbv" : "to_ubv";
    if (!selected(name)) continue;
    for (unsigned width : {4u, 8u}) {
      bv::Context ctx;
      const bv::Expr out = is_signed ? fp_to_sbv(ctx, x, width) : fp_to_ubv(ctx, x, width);
      Sweep s{name + "/" + std::to_string(width), {"x"}, {w}, {out}, false, ctx.fresh_variables().at(0).name(), f,
              [&, width, is_signed](const std::vector<BigUint>& v, RoundingMode) {
                return std::vector<std::optional<BigUint>>{oracle::op_to_int(f, v[0], width, is_signed)};
              }};
      runner.run(s);
    }
  }
  if (selected("to_fp")) {
    const FpFormat partner = f == FpFormat::fp16() ? FpFormat::fp32() : FpFormat::fp16();
    for (const auto& [from, to] : {std::pair{f, partner}, std::pair{partner, f}}) {
      bv::Context src_vars;
      const FpBits src{src_vars.var("x", from.total_width()), from};
      Sweep s{"to_fp/" + from.name() + "->" + to.name(), {"x"}, {from.total_width()},
              roots_of(fp_to_fp(src, to, rm)), true, {}, from,
              [&, from = from, to = to](const std::vector<BigUint>& v, RoundingMode m) {
                return one(oracle::op_to_fp(from, to, m, v[0]));
              }};
      runner.run(s);
    }
  }
  for (const bool is_signed : {true, false}) {
    const std::string name = is_signed ? "from_sbv" : "from_ubv";
    if (!selected(name)) continue;
    for (unsigned width : {4u, 8u}) {
      const bv::Expr b = vars.var("b" + std::to_string(width), width);
      Sweep s{name + "/" + std::to_string(width), {"b" + std::to_string(width)}, {width}, roots_of(sbv_to_fp(b, is_signed, f, rm)), true,
              {}, f,
              [&, width, is_signed](const std::vector<BigUint>& v, RoundingMode m) {
                return one(oracle::op_from_int(f, m, v[0], width, is_signed));
              }};
      runner.run(s);
    }
  }
  return report;
}

inline std::string format_report(const Report& r, const FpFormat& f) {
  std::ostringstream out;
  out << "difftest " << f.name() << " (eb=" << f.eb() << ", sb=" << f.sb() << ")\n";
  std::size_t width = 4;
  for (const auto& o : r.ops) width = std::max(width, o.op.size());
  for (const auto& o : r.ops) {
    out << "  " << o.op << std::string(width - o.op.size() + 2, ' ') << (o.mismatches == 0 ? "PASS" : "FAIL")
        << "  cases=" << o.cases << " mismatches=" << o.mismatches << (o.sampled ? " (sampled)" : "") << '\n';
  }
  out << "total cases=" << r.cases() << " mismatches=" << r.mismatches() << '\n';
  if (!r.counterexamples.empty()) {
    out << "first counterexamples:\n";
    for (const auto& c : r.counterexamples) {
      out << "  " << c.op << ' ' << c.detail << " expected=" << c.expected << " got=" << c.got << '\n';
    }
  }
  return out.str();
}

}  // namespace fpblast::difftest
