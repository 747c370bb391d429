// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <sys/wait.h>

#include "fpblast/fpblast.hpp"
#include "queries.hpp"

using namespace fpblast;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.output.append(buf, n);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

const std::string kCli = FPBLAST_CLI;

Outcome demo_fig1() {
  // Exact decimal expansions of the four doubles.
  const std::vector<std::string> bullets = {
      "0.1000000000000000055511151231257827021181583404541015625",
      "0.200000000000000011102230246251565404236316680908203125",
      "0.3000000000000000444089209850062616169452667236328125",
      "0.299999999999999988897769753748434595763683319091796875",
  };
  const auto start = std::chrono::steady_clock::now();
  const CommandResult r = run_command(kCli + " demo-fig1");
  const double secs = seconds_since(start);
  if (r.status != 0) return {false, "exit status " + std::to_string(r.status)};
  std::istringstream lines(r.output);
  std::vector<std::string> values;
  for (std::string line; std::getline(lines, line);) {
    const auto is = line.find(" is ");
    if (line.size() > 5 && line[1] == ' ' && is == 1) values.push_back(line.substr(5));
  }
  if (values != bullets) return {false, "decimal expansions differ from the expected strings"};
  if (r.output.find("fp.eq(w, z) = false\n") == std::string::npos) return {false, "eq(w,z) not false"};
  if (r.output.find("fp.lt(w, z) = true\n") == std::string::npos) return {false, "lt(w,z) not true"};
  if (secs >= 1.0) return {false, "took " + fixed(secs, 2) + "s (limit 1s)"};
  return {true, "4 expansions byte-identical, eq=false, lt=true, " + fixed(secs, 3) + "s"};
}

Outcome literal_0125() {
  const BigUint got = bv::eval(mk_literal(FpFormat::fp16(), "0.125", RoundingMode::RNE).bits(), {}).value;
  const bool ok = got == 0b0011000000000000;
  return {ok, "fp16 0.125 RNE = 0x" + bv::BitString{16, got}.to_hex()};
}

Outcome difftest_fp8() {
  const auto start = std::chrono::steady_clock::now();
  difftest::Options opt;
  opt.format = FpFormat::fp8();
  const difftest::Report r = difftest::run(opt);
  const double secs = seconds_since(start);
  bool binary_full = true;
  for (const auto& o : r.ops) {
    if ((o.op == "add" || o.op == "sub" || o.op == "mul" || o.op == "div") && o.cases != 65536 * 5) binary_full = false;
    if (o.op == "fma" && o.cases < 100000) binary_full = false;
  }
  const bool ok = r.mismatches() == 0 && binary_full && secs < 600;
  return {ok, std::to_string(r.cases()) + " cases, " + std::to_string(r.mismatches()) + " mismatches, " +
                  fixed(secs, 1) + "s (limit 600s)"};
}

Outcome difftest_fp16() {
  difftest::Options opt;
  opt.format = FpFormat::fp16();
  opt.ops = {"add", "sub", "mul", "div"};
  opt.samples = 100000;
  opt.seed = 16;
  const difftest::Report r = difftest::run(opt);
  bool counts = true;
  for (const auto& o : r.ops) counts = counts && o.cases == 100000 * 5;
  return {r.mismatches() == 0 && counts && r.ops.size() == 4,
          std::to_string(r.cases()) + " cases, " + std::to_string(r.mismatches()) + " mismatches"};
}

Outcome round_trip() {
  std::uint64_t checked = 0, bad = 0;
  for (const FpFormat& f : {FpFormat::fp8(), FpFormat::fp16()}) {
    for (const bool normalize : {false, true}) {
      bv::Context ctx;
      const FpBits x(ctx.var("x", f.total_width()), f);
      bv::Evaluator ev({pack(unpack(x, normalize), f).bits()});
      const BigUint nan = oracle::canonical_nan(f);
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << f.total_width()); ++v) {
        ev.set(0, v);
        ev.run();
        const BigUint want = oracle::decode(v, f).is_nan() ? nan : BigUint(v);
        ++checked;
        if (BigUint(ev.word(0)) != want) ++bad;
      }
    }
  }
  return {bad == 0, std::to_string(checked) + " patterns, " + std::to_string(bad) + " failures"};
}

Outcome special_values() {
  int checks = 0, bad = 0;
  const auto expect = [&](const bv::Expr& e, const BigUint& want) {
    ++checks;
    if (bv::eval(e, {}).value != want) ++bad;
  };
  for (const FpFormat& f : {FpFormat::fp8(), FpFormat::fp16(), FpFormat::fp32(), FpFormat::fp64()}) {
    const FpBits pz = mk_special(f, SpecialKind::PosZero), nz = mk_special(f, SpecialKind::NegZero);
    const FpBits pinf = mk_special(f, SpecialKind::PosInf), ninf = mk_special(f, SpecialKind::NegInf);
    const FpBits nan = mk_special(f, SpecialKind::NaN);
    const FpBits one = mk_literal(f, "1.0", RoundingMode::RNE);
    const BigUint canonical = oracle::canonical_nan(f);
    expect(fp_compare(FpCmpKind::Eq, pz, nz), 1);
    for (const FpBits& other : {one, nan, pz, pinf}) {
      for (const FpCmpKind k : kAllCmpKinds) {
        expect(fp_compare(k, nan, other), 0);
        expect(fp_compare(k, other, nan), 0);
      }
      expect(bv::bvnot(fp_compare(FpCmpKind::Eq, nan, other)), 1);  // "not equal"
    }
    for (const RoundingMode m : kAllRoundingModes) {
      const bv::Expr rm = mk_rounding_mode(m);
      expect(fp_div(rm, one, pz).bits(), oracle::infinity(f, false));
      expect(fp_div(rm, one, nz).bits(), oracle::infinity(f, true));
      expect(fp_mul(rm, pinf, pz).bits(), canonical);
      expect(fp_mul(rm, nz, ninf).bits(), canonical);
      expect(fp_sqrt(rm, mk_literal(f, "-1", RoundingMode::RNE)).bits(), canonical);
    }
  }
  return {bad == 0, std::to_string(checks) + " checks, " + std::to_string(bad) + " failures"};
}

std::optional<backend::Engine> external_engine() {
#ifdef FPBLAST_Z3
  return backend::Engine::parse("smt:" FPBLAST_Z3);
#else
  const backend::Engine e = backend::default_engine();
  if (e.kind == backend::Engine::Kind::Brute) return std::nullopt;
  return e;
#endif
}

Outcome backend_soundness() {
  const auto ext = external_engine();
  int disagreements = 0, bad_models = 0, sat = 0, unsat = 0, ext_unknown = 0;
  for (const auto& g : fpblast::testing::generate_queries(50, 2024)) {
    unsigned bits = 0;
    for (const auto& [n, w] : g.query.declarations) bits += w;
    if (bits > 12) return {false, g.description + " has " + std::to_string(bits) + " free bits"};
    const bv::SatResult brute = backend::solve(g.query, backend::Engine{});
    if (brute.status == bv::SatStatus::Unknown) return {false, g.description + ": brute force gave unknown"};
    (brute.status == bv::SatStatus::Sat ? sat : unsat)++;
    if (brute.model && !backend::model_satisfies(g.query, *brute.model)) ++bad_models;
    if (!ext) continue;
    try {
      const bv::SatResult r = backend::solve(g.query, *ext, std::chrono::seconds(60));
      if (r.status == bv::SatStatus::Unknown) ++ext_unknown;
      else if (r.status != brute.status) ++disagreements;
    } catch (const backend::ProtocolError&) {
      ++bad_models;
    }
  }
  std::string mode = ext ? "external solver " + ext->name() : std::string("brute-only (no external solver)");
  const bool ok = disagreements == 0 && bad_models == 0 && ext_unknown == 0;
  return {ok, "50 queries (" + std::to_string(sat) + " sat, " + std::to_string(unsat) + " unsat), " + mode + ", " +
                  std::to_string(disagreements) + " disagreements, " + std::to_string(bad_models) + " bad models" +
                  (ext_unknown ? ", " + std::to_string(ext_unknown) + " unknown" : "")};
}

Outcome features_json() {
  const CommandResult r = run_command(kCli + " features --json");
  if (r.status != 0) return {false, "exit status " + std::to_string(r.status)};
  const std::string want = slurp(std::string(FPBLAST_TEST_DIR) + "/fixtures/features.json");
  if (want.empty()) return {false, "fixture missing"};
  const auto got = nlohmann::ordered_json::parse(r.output);
  const auto fixture = nlohmann::ordered_json::parse(want);
  if (got != fixture) return {false, "output differs from fixture"};
  int unsupported = 0;
  for (const auto& row : got["features"]) unsupported += row["supported"] == false;
  return {true, std::to_string(got["features"].size()) + " rows match fixture, " + std::to_string(unsupported) +
                    " unsupported"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"demo-fig1 output", demo_fig1},
      {"mk_literal fp16 0.125", literal_0125},
      {"difftest fp8 exhaustive", difftest_fp8},
      {"difftest fp16 sampled", difftest_fp16},
      {"pack/unpack round trip", round_trip},
      {"special-value tables", special_values},
      {"backend soundness", backend_soundness},
      {"features --json fixture", features_json},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << i + 1 << ". " << criteria[i].first << ": " << o.detail << " ["
              << fixed(seconds_since(start), 2) << "s]" << std::endl;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
