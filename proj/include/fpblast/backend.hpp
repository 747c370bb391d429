// Emission of blasted constraints as SMT-LIB2 QF_BV or DIMACS CNF, and
// satisfiability checks through the brute-forcer or an external solver.
#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "fpblast/cnf.hpp"
#include "fpblast/sat.hpp"
#include "fpblast/sexpr.hpp"

namespace fpblast::backend {

using bv::Expr;
using bv::SatResult;
using bv::SatStatus;

// Solver output that does not follow the expected protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

struct Query {
  std::vector<Expr> assertions;
  std::map<std::string, unsigned> declarations;  // every free variable, by name
  std::map<std::string, std::string> metadata;
};

// Query over the given assertions declaring exactly their free variables plus
// any extra declarations (which may be unused).
inline Query make_query(std::vector<Expr> assertions, const std::map<std::string, unsigned>& extra = {}) {
  Query q;
  for (const auto& a : assertions) {
    if (a.width() != 1) throw Error("query assertion must have width 1, got " + std::to_string(a.width()));
  }
  q.declarations = extra;
  for (const auto& [name, width] : bv::free_variables(assertions)) {
    auto [it, inserted] = q.declarations.emplace(name, width);
    if (!inserted && it->second != width) throw Error("query: width conflict for '" + name + "'");
  }
  q.assertions = std::move(assertions);
  return q;
}

namespace detail {

inline void check_declared(const Query& q) {
  for (const auto& [name, width] : bv::free_variables(q.assertions)) {
    auto it = q.declarations.find(name);
    if (it == q.declarations.end()) throw Error("query: variable '" + name + "' is not declared");
    if (it->second != width) throw Error("query: variable '" + name + "' declared with a different width");
  }
}

inline std::string literal(const BigUint& v, unsigned width) {
  const bv::BitString b{width, v};
  return width % 4 == 0 ? "#x" + b.to_hex() : "#b" + b.to_binary();
}

inline std::string symbol(const std::string& name) {
  bool simple = !name.empty() && !(name[0] >= '0' && name[0] <= '9');
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || std::strchr("~!@$%^&*_-+=<>.?/", c) != nullptr;
    simple = simple && ok;
  }
  return simple ? name : "|" + name + "|";
}

inline std::string_view smt_op(bv::Kind k) {
  using bv::Kind;
  switch (k) {
    case Kind::Concat: return "concat";
    case Kind::Not: return "bvnot";
    case Kind::And: return "bvand";
    case Kind::Or: return "bvor";
    case Kind::Xor: return "bvxor";
    case Kind::Neg: return "bvneg";
    case Kind::Add: return "bvadd";
    case Kind::Sub: return "bvsub";
    case Kind::Mul: return "bvmul";
    case Kind::Udiv: return "bvudiv";
    case Kind::Urem: return "bvurem";
    case Kind::Shl: return "bvshl";
    case Kind::Lshr: return "bvlshr";
    case Kind::Ashr: return "bvashr";
    case Kind::Eq: return "=";
    case Kind::Ult: return "bvult";
    case Kind::Ule: return "bvule";
    case Kind::Slt: return "bvslt";
    case Kind::Sle: return "bvsle";
    default: return "";
  }
}

}  // namespace detail

// Deterministic SMT-LIB v2.6 script. Internal nodes shared by more than one
// parent become define-fun terms named t<k> in dependency order.
inline std::string emit_smtlib(const Query& q) {
  using bv::Kind;
  detail::check_declared(q);
  std::ostringstream out;
  out << "(set-logic QF_BV)\n";
  for (const auto& [name, width] : q.declarations) {
    out << "(declare-const " << detail::symbol(name) << " (_ BitVec " << width << "))\n";
  }

  std::unordered_map<const bv::Node*, unsigned> refs;
  bv::for_each_postorder(q.assertions, [&](const Expr& e) {
    for (const auto& a : e.args()) ++refs[a.get()];
  });

  std::unordered_set<std::string> taken;
  for (const auto& [name, width] : q.declarations) taken.insert(name);
  unsigned next = 0;
  const auto fresh_name = [&]() {
    std::string n;
    do n = "t" + std::to_string(next++);
    while (taken.count(n) != 0);
    return n;
  };

  std::unordered_map<const bv::Node*, std::string> text;
  bv::for_each_postorder(q.assertions, [&](const Expr& e) {
    std::string s;
    const auto arg = [&](std::size_t i) -> const std::string& { return text.at(e.arg(i).get()); };
    const auto bool_of = [&](std::size_t i) { return "(= " + arg(i) + " #b1)"; };
    switch (e.kind()) {
      case Kind::Const: s = detail::literal(e.value(), e.width()); break;
      case Kind::Var: s = detail::symbol(e.name()); break;
      case Kind::Extract:
        s = "((_ extract " + std::to_string(e.hi()) + " " + std::to_string(e.lo()) + ") " + arg(0) + ")";
        break;
      case Kind::ZeroExtend:
      case Kind::SignExtend:
        s = std::string("((_ ") + (e.kind() == Kind::ZeroExtend ? "zero_extend " : "sign_extend ") +
            std::to_string(e.width() - e.arg(0).width()) + ") " + arg(0) + ")";
        break;
      case Kind::Eq:
      case Kind::Ult:
      case Kind::Ule:
      case Kind::Slt:
      case Kind::Sle:
        s = "(ite (" + std::string(detail::smt_op(e.kind())) + " " + arg(0) + " " + arg(1) + ") #b1 #b0)";
        break;
      case Kind::Ite: s = "(ite " + bool_of(0) + " " + arg(1) + " " + arg(2) + ")"; break;
      case Kind::RedOr:
        s = "(ite (= " + arg(0) + " " + detail::literal(0, e.arg(0).width()) + ") #b0 #b1)";
        break;
      case Kind::Not:
      case Kind::Neg: s = "(" + std::string(detail::smt_op(e.kind())) + " " + arg(0) + ")"; break;
      default: s = "(" + std::string(detail::smt_op(e.kind())) + " " + arg(0) + " " + arg(1) + ")"; break;
    }
    const auto r = refs.find(e.get());
    if (!e.is_const() && !e.is_var() && r != refs.end() && r->second > 1) {
      const std::string name = fresh_name();
      out << "(define-fun " << name << " () (_ BitVec " << e.width() << ") " << s << ")\n";
      s = name;
    }
    text.emplace(e.get(), std::move(s));
  });
  for (const auto& a : q.assertions) out << "(assert (= " << text.at(a.get()) << " #b1))\n";
  out << "(check-sat)\n(get-model)\n";
  return out.str();
}

// CNF of the conjunction of the assertions. Declared variables get the lowest
// CNF variables, in name order, bit 0 first.
inline bv::CnfFormula to_cnf(const Query& q) {
  detail::check_declared(q);
  bv::TseitinEncoder enc;
  for (const auto& [name, width] : q.declarations) enc.declare(name, width);
  for (const auto& a : q.assertions) enc.assert_true(a);
  return enc.formula();
}

inline std::string emit_dimacs(const bv::CnfFormula& f) {
  std::ostringstream out;
  out << "c fpblast bit-blasted query\n";
  for (const auto& [name, range] : f.var_map) {
    out << "c var " << name << " " << range.second << " " << range.first << ".."
        << range.first + static_cast<int>(range.second) - 1 << "\n";
  }
  out << "p cnf " << f.num_vars << " " << f.clauses.size() << "\n";
  for (const auto& c : f.clauses) {
    for (int lit : c) {
      if (lit == 0 || lit > f.num_vars || -lit > f.num_vars) throw Error("emit_dimacs: literal out of range");
      out << lit << ' ';
    }
    out << "0\n";
  }
  return out.str();
}

inline std::string emit_dimacs(const Query& q) { return emit_dimacs(to_cnf(q)); }

// --- solving ----------------------------------------------------------------

struct Engine {
  enum class Kind { Brute, Smt, Sat };
  Kind kind = Kind::Brute;
  std::vector<std::string> command;  // executable and leading arguments

  // "brute", "smt:<command>" or "sat:<command>"; the command is split on spaces.
  static Engine parse(std::string_view spec) {
    if (spec == "brute") return {};
    Engine e;
    std::string_view rest;
    if (spec.substr(0, 4) == "smt:") {
      e.kind = Kind::Smt;
      rest = spec.substr(4);
    } else if (spec.substr(0, 4) == "sat:") {
      e.kind = Kind::Sat;
      rest = spec.substr(4);
    } else {
      throw Error("unknown engine '" + std::string(spec) + "' (expected brute, smt:<path> or sat:<path>)");
    }
    std::istringstream words{std::string(rest)};
    for (std::string w; words >> w;) e.command.push_back(w);
    if (e.command.empty()) throw Error("engine '" + std::string(spec) + "' names no executable");
    return e;
  }

  std::string name() const {
    if (kind == Kind::Brute) return "brute";
    std::string s = kind == Kind::Smt ? "smt:" : "sat:";
    for (std::size_t i = 0; i < command.size(); ++i) s += (i ? " " : "") + command[i];
    return s;
  }
};

namespace detail {

struct ProcessResult {
  bool timed_out = false;
  bool exec_failed = false;
  int exit_code = -1;
  std::string output;
};

inline std::filesystem::path write_temp(const std::string& contents, const std::string& suffix) {
  std::string pattern = (std::filesystem::temp_directory_path() / ("fpblast-XXXXXX" + suffix)).string();
  const int fd = mkstemps(pattern.data(), static_cast<int>(suffix.size()));
  if (fd < 0) throw Error("cannot create temporary file: " + std::string(std::strerror(errno)));
  std::size_t done = 0;
  while (done < contents.size()) {
    const ssize_t n = ::write(fd, contents.data() + done, contents.size() - done);
    if (n < 0) {
      ::close(fd);
      throw Error("cannot write temporary file " + pattern);
    }
    done += static_cast<std::size_t>(n);
  }
  ::close(fd);
  return pattern;
}

// Runs argv with stdout captured; stderr is discarded. The child is killed
// once the deadline passes.
inline ProcessResult run_process(const std::vector<std::string>& argv,
                                 std::optional<std::chrono::steady_clock::time_point> deadline) {
  int pipefd[2];
  if (::pipe(pipefd) != 0) throw Error("pipe failed");
  const pid_t pid = ::fork();
  if (pid < 0) throw Error("fork failed");
  if (pid == 0) {
    ::dup2(pipefd[1], STDOUT_FILENO);
    const int null = ::open("/dev/null", O_RDWR);
    if (null >= 0) {
      ::dup2(null, STDERR_FILENO);
      ::dup2(null, STDIN_FILENO);
    }
    ::close(pipefd[0]);
    ::close(pipefd[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    ::_exit(127);
  }
  ::close(pipefd[1]);
  ProcessResult res;
  char buf[4096];
  while (true) {
    int wait_ms = -1;
    if (deadline) {
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(*deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        res.timed_out = true;
        break;
      }
      wait_ms = static_cast<int>(std::min<long long>(left.count(), 1000));
    }
    pollfd p{pipefd[0], POLLIN, 0};
    const int r = ::poll(&p, 1, wait_ms);
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) continue;
    const ssize_t n = ::read(pipefd[0], buf, sizeof buf);
    if (n <= 0) break;
    res.output.append(buf, static_cast<std::size_t>(n));
  }
  ::close(pipefd[0]);
  if (res.timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    res.exit_code = WEXITSTATUS(status);
    res.exec_failed = res.exit_code == 127 && res.output.empty();
  }
  return res;
}

inline std::optional<BigUint> parse_bv_value(const sexpr::SExpr& v, unsigned width) {
  BigUint value = 0;
  unsigned digits_width = 0;
  if (v.is_atom() && v.text.size() > 2 && v.text[0] == '#' && (v.text[1] == 'b' || v.text[1] == 'x')) {
    const bool bin = v.text[1] == 'b';
    for (std::size_t i = 2; i < v.text.size(); ++i) {
      const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(v.text[i])));
      int d = -1;
      if (c >= '0' && c <= '9') d = c - '0';
      else if (!bin && c >= 'a' && c <= 'f') d = c - 'a' + 10;
      if (d < 0 || (bin && d > 1)) return std::nullopt;
      value = (value << (bin ? 1 : 4)) | d;
      digits_width += bin ? 1 : 4;
    }
    if (digits_width != width) return std::nullopt;
    return value;
  }
  if (v.is_list() && v.size() == 3 && v[0].is_atom("_") && v[1].is_atom() && v[1].text.rfind("bv", 0) == 0 &&
      v[2].is_atom(std::to_string(width))) {
    const std::string digits = v[1].text.substr(2);
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
    value = BigUint(digits.find_first_not_of('0') == std::string::npos ? "0" : digits.substr(digits.find_first_not_of('0')));
    if (value > low_mask(width)) return std::nullopt;
    return value;
  }
  return std::nullopt;
}

inline void collect_define_funs(const sexpr::SExpr& e, const Query& q, bv::Env& model) {
  if (!e.is_list()) return;
  if (e.size() == 5 && e[0].is_atom("define-fun") && e[1].is_atom() && e[2].is_list() && e[2].size() == 0) {
    auto it = q.declarations.find(e[1].text);
    if (it == q.declarations.end()) return;  // solver-internal or auxiliary definition
    const auto value = parse_bv_value(e[4], it->second);
    if (!value) throw ProtocolError("cannot read model value for '" + e[1].text + "': " + sexpr::to_string(e[4]));
    model[e[1].text] = bv::BitString{it->second, *value};
    return;
  }
  for (const auto& item : e.items) collect_define_funs(item, q, model);
}

inline void complete_model(const Query& q, bv::Env& model) {
  for (const auto& [name, width] : q.declarations) {
    if (model.count(name) == 0) model[name] = bv::BitString{width, 0};
  }
}

}  // namespace detail

inline SatResult parse_smt_output(const std::string& output, const Query& q) {
  std::vector<sexpr::SExpr> items;
  try {
    items = sexpr::parse(output);
  } catch (const sexpr::ParseError& e) {
    throw ProtocolError(std::string("unreadable solver output: ") + e.what());
  }
  std::size_t i = 0;
  while (i < items.size() && items[i].is_list() && items[i].size() > 0 && items[i][0].is_atom("error")) ++i;
  if (i == items.size()) throw ProtocolError("solver printed no sat/unsat/unknown answer");
  const auto& answer = items[i];
  if (answer.is_atom("unsat")) return {SatStatus::Unsat, std::nullopt, {}};
  if (answer.is_atom("unknown")) return {SatStatus::Unknown, std::nullopt, "solver answered unknown"};
  if (!answer.is_atom("sat")) throw ProtocolError("unexpected solver answer '" + sexpr::to_string(answer) + "'");
  bv::Env model;
  for (std::size_t k = i + 1; k < items.size(); ++k) detail::collect_define_funs(items[k], q, model);
  detail::complete_model(q, model);
  return {SatStatus::Sat, std::move(model), {}};
}

inline SatResult parse_dimacs_output(const std::string& output, const bv::CnfFormula& f, const Query& q) {
  std::istringstream in(output);
  std::optional<SatStatus> status;
  std::vector<int> lits;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("s ", 0) == 0) {
      const std::string s = line.substr(2);
      if (s == "SATISFIABLE") status = SatStatus::Sat;
      else if (s == "UNSATISFIABLE") status = SatStatus::Unsat;
      else if (s == "UNKNOWN" || s == "INDETERMINATE") status = SatStatus::Unknown;
      else throw ProtocolError("unexpected status line '" + line + "'");
    } else if (line.rfind("v ", 0) == 0 || line == "v") {
      std::istringstream vs(line.substr(1));
      for (int lit; vs >> lit;) lits.push_back(lit);
    }
  }
  if (!status) throw ProtocolError("SAT solver printed no 's' status line");
  if (*status == SatStatus::Unsat) return {SatStatus::Unsat, std::nullopt, {}};
  if (*status == SatStatus::Unknown) return {SatStatus::Unknown, std::nullopt, "solver answered UNKNOWN"};
  std::vector<bool> value(static_cast<std::size_t>(f.num_vars) + 1, false);
  for (int lit : lits) {
    if (lit == 0) continue;
    const int v = lit < 0 ? -lit : lit;
    if (v > f.num_vars) throw ProtocolError("model literal " + std::to_string(lit) + " out of range");
    value[static_cast<std::size_t>(v)] = lit > 0;
  }
  bv::Env model;
  for (const auto& [name, range] : f.var_map) {
    BigUint bits = 0;
    for (unsigned b = 0; b < range.second; ++b) {
      if (value[static_cast<std::size_t>(range.first) + b]) bits |= BigUint(1) << b;
    }
    model[name] = bv::BitString{range.second, bits};
  }
  detail::complete_model(q, model);
  return {SatStatus::Sat, std::move(model), {}};
}

// Whether every assertion evaluates to 1 under the model.
inline bool model_satisfies(const Query& q, const bv::Env& model) {
  if (q.assertions.empty()) return true;
  bv::Evaluator ev(q.assertions);
  for (const auto& [name, idx] : ev.inputs()) {
    auto it = model.find(name);
    if (it == model.end()) return false;
    ev.set(idx, it->second.value);
  }
  ev.run();
  for (std::size_t i = 0; i < q.assertions.size(); ++i) {
    if (ev.big(i) != 1) return false;
  }
  return true;
}

// Checks the conjunction of the assertions. Process failures and timeouts
// give Unknown with a note; malformed solver output throws ProtocolError, as
// does a sat model that does not satisfy the assertions.
inline SatResult solve(const Query& q, const Engine& engine, std::optional<std::chrono::milliseconds> timeout = {},
                       unsigned brute_budget = bv::kDefaultBruteForceBudget) {
  detail::check_declared(q);
  std::optional<std::chrono::steady_clock::time_point> deadline;
  if (timeout) deadline = std::chrono::steady_clock::now() + *timeout;

  SatResult result;
  if (engine.kind == Engine::Kind::Brute) {
    result = bv::brute_force_sat(q.assertions, brute_budget, deadline);
    if (result.model) detail::complete_model(q, *result.model);
  } else {
    const bool smt = engine.kind == Engine::Kind::Smt;
    std::optional<bv::CnfFormula> cnf;
    std::string text;
    if (smt) {
      text = emit_smtlib(q);
    } else {
      cnf = to_cnf(q);
      text = emit_dimacs(*cnf);
    }
    const auto path = detail::write_temp(text, smt ? ".smt2" : ".cnf");
    std::vector<std::string> argv = engine.command;
    argv.push_back(path.string());
    detail::ProcessResult proc;
    try {
      proc = detail::run_process(argv, deadline);
    } catch (...) {
      std::filesystem::remove(path);
      throw;
    }
    std::filesystem::remove(path);
    if (proc.timed_out) return {SatStatus::Unknown, std::nullopt, "timeout"};
    if (proc.exec_failed) return {SatStatus::Unknown, std::nullopt, "could not execute '" + engine.command[0] + "'"};
    if (proc.output.find_first_not_of(" \t\r\n") == std::string::npos) {
      return {SatStatus::Unknown, std::nullopt,
              "solver produced no output (exit status " + std::to_string(proc.exit_code) + ")"};
    }
    result = smt ? parse_smt_output(proc.output, q) : parse_dimacs_output(proc.output, *cnf, q);
  }
  if (result.status == SatStatus::Sat && result.model && !model_satisfies(q, *result.model)) {
    throw ProtocolError("solver model does not satisfy the assertions");
  }
  return result;
}

// FPBLAST_SOLVER, when set, names the default external engine: either a full
// engine spec or a bare path to an SMT-LIB solver.
inline Engine default_engine() {
  const char* env = std::getenv("FPBLAST_SOLVER");
  if (env == nullptr || *env == '\0') return {};
  const std::string_view s(env);
  if (s == "brute" || s.substr(0, 4) == "smt:" || s.substr(0, 4) == "sat:") return Engine::parse(s);
  return Engine::parse("smt:" + std::string(s));
}

}  // namespace fpblast::backend
