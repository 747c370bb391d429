// Exhaustive satisfiability checking for small bit-vector formulas.
#pragma once

#include <chrono>
#include <optional>

#include "fpblast/eval.hpp"

namespace fpblast::bv {

enum class SatStatus { Sat, Unsat, Unknown };

inline std::string_view status_name(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "sat";
    case SatStatus::Unsat: return "unsat";
    case SatStatus::Unknown: return "unknown";
  }
  return "unknown";
}

struct SatResult {
  SatStatus status = SatStatus::Unknown;
  std::optional<Env> model;  // present iff status == Sat
  std::string note;
};

inline constexpr unsigned kDefaultBruteForceBudget = 20;

// Enumerates every assignment of the free variables of `formulas` (a
// conjunction). Variables are enumerated as one counter, first variable in
// name order in the low bits.
inline SatResult brute_force_sat(std::span<const Expr> formulas, unsigned budget = kDefaultBruteForceBudget,
                                 std::optional<std::chrono::steady_clock::time_point> deadline = {}) {
  for (const auto& f : formulas) {
    if (f.width() != 1) throw Error("brute_force_sat: formula must have width 1");
  }
  const auto vars = free_variables(formulas);
  unsigned total = 0;
  for (const auto& [name, w] : vars) total += w;
  if (total > budget || total > 62) {
    return {SatStatus::Unknown, std::nullopt,
            "free bits " + std::to_string(total) + " exceed brute-force budget " + std::to_string(budget)};
  }
  Evaluator ev(std::vector<Expr>(formulas.begin(), formulas.end()));
  struct Slot {
    std::string name;
    unsigned width;
    unsigned shift;
    std::optional<unsigned> input;
  };
  std::vector<Slot> slots;
  unsigned shift = 0;
  for (const auto& [name, w] : vars) {
    slots.push_back({name, w, shift, ev.input(name)});
    shift += w;
  }
  const std::uint64_t count = std::uint64_t{1} << total;
  for (std::uint64_t k = 0; k < count; ++k) {
    if (deadline && (k & 0x3F) == 0 && std::chrono::steady_clock::now() > *deadline) {
      return {SatStatus::Unknown, std::nullopt, "timeout"};
    }
    for (const auto& s : slots) {
      if (s.input) ev.set(*s.input, (k >> s.shift) & detail::mask64(s.width));
    }
    ev.run();
    bool all = true;
    for (std::size_t i = 0; i < formulas.size() && all; ++i) all = ev.word(i) != 0;
    if (all) {
      Env model;
      for (const auto& s : slots) model[s.name] = BitString{s.width, BigUint((k >> s.shift) & detail::mask64(s.width))};
      return {SatStatus::Sat, std::move(model), {}};
    }
  }
  return {SatStatus::Unsat, std::nullopt, {}};
}

inline SatResult brute_force_sat(const Expr& formula, unsigned budget = kDefaultBruteForceBudget) {
  return brute_force_sat(std::span<const Expr>(&formula, 1), budget);
}

}  // namespace fpblast::bv
