// Support matrix of the SMT FP operations in this library.
#pragma once

#include "json.hpp"
#include <sstream>
#include <string>
#include <vector>

namespace fpblast::features {

struct Feature {
  std::string row;
  bool supported;
  std::string surface;  // script syntax providing the feature
};

inline const std::vector<Feature>& table() {
  static const std::vector<Feature> rows = {
      {"Create floating point sort", true, "declare-fp"},
      {"Create rounding mode sort", true, "RNE RNA RTP RTN RTZ"},
      {"Create floating point literal", true, "(fp <format> <decimal>)"},
      {"Create plus and minus infinity", true, "(_ +oo eb sb) (_ -oo eb sb)"},
      {"Create plus and minus zeroes", true, "(_ +zero eb sb) (_ -zero eb sb)"},
      {"Create NaN", true, "(_ NaN eb sb)"},
      {"Absolute value operator", true, "fp.abs"},
      {"Negation operator", true, "fp.neg"},
      {"Addition operator", true, "fp.add"},
      {"Subtraction operator", true, "fp.sub"},
      {"Multiplication operator", true, "fp.mul"},
      {"Division operator", true, "fp.div"},
      {"Fused multiply-add operator", true, "fp.fma"},
      {"Square root operator", true, "fp.sqrt"},
      {"Remainder operator", false, "fp.rem"},
      {"Rounding to Integral operator", true, "fp.roundToIntegral"},
      {"Minimum operator", false, "fp.min"},
      {"Maximum operator", false, "fp.max"},
      {"Less than or equal to operator", true, "fp.leq"},
      {"Less than operator", true, "fp.lt"},
      {"Greater than or equal to operator", true, "fp.geq"},
      {"Greater than operator", true, "fp.gt"},
      {"Equality operator", true, "fp.eq"},
      {"IsNormal check", true, "fp.isNormal"},
      {"IsSubnormal check", true, "fp.isSubnormal"},
      {"IsZero check", true, "fp.isZero"},
      {"IsInfinite check", true, "fp.isInfinite"},
      {"IsNaN check", true, "fp.isNaN"},
      {"IsNegative check", true, "fp.isNegative"},
      {"IsPositive check", true, "fp.isPositive"},
      {"Convert to FP from real", false, "((_ to_fp eb sb) rm <real>)"},
      {"Convert to FP from signed BV", true, "((_ to_fp eb sb) rm <bv>)"},
      {"Convert to FP from unsigned BV", true, "((_ to_fp_unsigned eb sb) rm <bv>)"},
      {"Convert to FP from another FP", true, "((_ to_fp eb sb) rm <fp>)"},
      {"Convert to unsigned BV from FP", true, "((_ fp.to_ubv w) rm <fp>)"},
      {"Convert to signed BV from FP", true, "((_ fp.to_sbv w) rm <fp>)"},
      {"Convert to real from FP", false, "fp.to_real"},
      {"Convert to IEEE BV from FP", true, "fp.to_ieee_bv"},
      {"Convert to floating-point from IEEE BV", true, "((_ to_fp eb sb) <bv>)"},
  };
  return rows;
}

inline nlohmann::ordered_json to_json() {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& f : table()) {
    rows.push_back({{"feature", f.row}, {"supported", f.supported}});
  }
  return {{"features", rows}};
}

inline std::string to_text() {
  std::size_t w = 0;
  for (const auto& f : table()) w = std::max(w, f.row.size());
  std::ostringstream out;
  for (const auto& f : table()) {
    out << f.row << std::string(w - f.row.size() + 2, ' ') << (f.supported ? "supported  " : "unsupported") << "  "
        << f.surface << '\n';
  }
  return out.str();
}

}  // namespace fpblast::features
