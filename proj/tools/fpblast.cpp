// fpblast command-line frontend.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fpblast/fpblast.hpp"

namespace {

using namespace fpblast;

constexpr int kExitSat = 10;
constexpr int kExitUnsat = 20;
constexpr int kExitUnknown = 0;
constexpr int kExitError = 1;
constexpr int kExitMismatch = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

script::Script load_script(const std::string& path) {
  const std::string text = read_file(path);
  try {
    script::Script s = script::parse_script(text);
    for (const auto& w : s.warnings) std::cerr << path << ":" << w << "\n";
    return s;
  } catch (const sexpr::ParseError& e) {
    throw Error(path + ":" + e.what());
  }
}

std::vector<bv::Expr> assertions_of(const script::Script& s, script::Blaster& b) {
  std::vector<bv::Expr> out;
  for (const auto& c : s.commands) {
    if (c.kind == script::Command::Kind::Assert) out.push_back(b.blast(c.expr).bits);
  }
  return out;
}

backend::Query query_of(const script::Script& s, std::vector<bv::Expr> assertions) {
  std::map<std::string, unsigned> decls;
  for (const auto& [name, sort] : s.declarations) decls.emplace(name, sort.width());
  return backend::make_query(std::move(assertions), decls);
}

void run_eval(const script::Command& c, script::Blaster& b) {
  const script::Value v = b.blast(c.expr);
  bv::Evaluator ev({v.bits});
  std::set<std::string> bound;
  for (const auto& [name, value_expr] : c.bindings) {
    bound.insert(name);
    if (const auto idx = ev.input(name)) ev.set(*idx, script::Blaster::constant(value_expr).value);
  }
  for (const auto& [name, idx] : ev.inputs()) {
    if (bound.count(name) == 0) throw Error("eval: '" + name + "' has no binding");
  }
  ev.run();
  std::cout << "eval " << sexpr::to_string(c.expr) << " = " << script::describe(v.sort, ev.bits(0)) << "\n";
}

int cmd_check(const std::string& path, const std::string& engine_spec, long timeout_ms, unsigned budget) {
  const script::Script s = load_script(path);
  const backend::Engine engine = engine_spec.empty() ? backend::default_engine() : backend::Engine::parse(engine_spec);
  bool has_check = false;
  for (const auto& c : s.commands) has_check = has_check || c.kind == script::Command::Kind::Check;
  if (!has_check) throw Error(path + ": script has no (check) command");

  script::Blaster blaster(s);
  std::vector<bv::Expr> assertions;
  int code = kExitUnknown;
  for (const auto& c : s.commands) {
    if (c.kind == script::Command::Kind::Assert) assertions.push_back(blaster.blast(c.expr).bits);
    if (c.kind == script::Command::Kind::Eval) run_eval(c, blaster);
    if (c.kind != script::Command::Kind::Check) continue;

    const backend::Query q = query_of(s, assertions);
    bv::SatResult r;
    try {
      r = backend::solve(q, engine, timeout_ms > 0 ? std::optional(std::chrono::milliseconds(timeout_ms)) : std::nullopt,
                         budget);
    } catch (const Error& e) {
      r = {bv::SatStatus::Unknown, std::nullopt, e.what()};
    }
    std::cout << bv::status_name(r.status);
    if (r.status == bv::SatStatus::Unknown && !r.note.empty()) std::cout << " (" << r.note << ")";
    std::cout << "\n";
    if (r.status == bv::SatStatus::Sat && r.model) {
      for (const auto& [name, sort] : s.declarations) {
        std::cout << "  " << name << " : " << sort.name() << " = " << script::describe(sort, r.model->at(name)) << "\n";
      }
    }
    code = r.status == bv::SatStatus::Sat ? kExitSat : r.status == bv::SatStatus::Unsat ? kExitUnsat : kExitUnknown;
  }
  return code;
}

int cmd_blast(const std::string& path, const std::string& target, const std::string& out_path) {
  const script::Script s = load_script(path);
  script::Blaster blaster(s);
  const backend::Query q = query_of(s, assertions_of(s, blaster));
  unsigned free_bits = 0;
  for (const auto& [name, w] : q.declarations) free_bits += w;

  std::string text;
  if (target == "smtlib") {
    text = backend::emit_smtlib(q);
  } else {
    const bv::CnfFormula f = backend::to_cnf(q);
    text = backend::emit_dimacs(f);
    std::cout << "cnf variables: " << f.num_vars << "\ncnf clauses: " << f.clauses.size() << "\n";
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error("cannot write '" + out_path + "'");
  out << text;
  out.close();
  if (!out) throw Error("error writing '" + out_path + "'");
  std::cout << "nodes: " << bv::node_count(q.assertions) << "\nfree bits: " << free_bits << "\nwrote " << out_path
            << "\n";
  return 0;
}

FpFormat parse_format_arg(const std::string& s) {
  if (auto f = FpFormat::by_name(s)) return *f;
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw Error("--format expects eb,sb or a format name, got '" + s + "'");
  try {
    return FpFormat(static_cast<unsigned>(std::stoul(s.substr(0, comma))),
                    static_cast<unsigned>(std::stoul(s.substr(comma + 1))));
  } catch (const std::logic_error&) {
    throw Error("--format expects eb,sb or a format name, got '" + s + "'");
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_difftest(const std::string& format, const std::string& ops, const std::string& modes,
                 std::optional<std::uint64_t> samples, std::uint64_t seed) {
  difftest::Options opt;
  opt.format = parse_format_arg(format);
  if (!ops.empty()) opt.ops = split_list(ops);
  if (!modes.empty()) {
    opt.modes.clear();
    for (const auto& m : split_list(modes)) {
      const auto rm = parse_rounding_mode(m);
      if (!rm) throw Error("unknown rounding mode '" + m + "'");
      opt.modes.push_back(*rm);
    }
  }
  opt.samples = samples;
  opt.seed = seed;
  const difftest::Report r = difftest::run(opt);
  std::cout << difftest::format_report(r, opt.format);
  return r.mismatches() == 0 ? 0 : kExitMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bit-blasting of IEEE-754 floating-point constraints to bit-vectors"};
  app.require_subcommand(1);
  app.footer(
      "Scripts use SMT-LIB FP operator names. fp.to_sbv and fp.to_ubv always truncate toward zero and yield a "
      "fresh unconstrained value (fpcast_fresh_<n>) for NaN, infinity and out-of-range inputs.\n"
      "Exit codes of check: 10 sat, 20 unsat, 0 unknown, 1 error. FPBLAST_SOLVER sets the default engine.");

  std::string file, engine, target, out_path, format, ops, modes;
  long timeout_ms = 0;
  unsigned budget = bv::kDefaultBruteForceBudget;
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 42;
  bool json = false;

  auto* check = app.add_subcommand("check", "Blast the assertions of a script and check satisfiability");
  check->add_option("file", file, "Script file")->required();
  check->add_option("--engine", engine, "brute, smt:<solver command> or sat:<solver command>");
  check->add_option("--timeout", timeout_ms, "Timeout in milliseconds (0 = none)");
  check->add_option("--budget", budget, "Maximum free bits for the brute-force engine");

  auto* blast = app.add_subcommand("blast", "Write the blasted assertions as SMT-LIB2 QF_BV or DIMACS CNF");
  blast->add_option("file", file, "Script file")->required();
  blast->add_option("--to", target, "smtlib or dimacs")->required()->check(CLI::IsMember({"smtlib", "dimacs"}));
  blast->add_option("-o,--output", out_path, "Output path")->required();

  auto* diff = app.add_subcommand("difftest", "Compare blasted operators with the rational oracle");
  diff->add_option("--format", format, "eb,sb or fp8/fp16/fp32/fp64/fp128")->required();
  diff->add_option("--ops", ops, "Comma-separated operators (default: all)");
  diff->add_option("--modes", modes, "Comma-separated rounding modes (default: all)");
  diff->add_option("--samples", samples, "Random cases per operator instead of an exhaustive sweep");
  diff->add_option("--seed", seed, "Random seed");

  auto* demo = app.add_subcommand("demo-fig1", "Show why 0.1 + 0.2 == 0.3 fails in double precision");

  auto* features = app.add_subcommand("features", "Print the supported SMT FP operations");
  features->add_flag("--json", json, "Machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (check->parsed()) return cmd_check(file, engine, timeout_ms, budget);
    if (blast->parsed()) return cmd_blast(file, target, out_path);
    if (diff->parsed()) return cmd_difftest(format, ops, modes, samples, seed);
    if (demo->parsed()) {
      std::cout << demo::fig1_report();
      return 0;
    }
    if (features->parsed()) {
      std::cout << (json ? features::to_json().dump(2) + "\n" : features::to_text());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
