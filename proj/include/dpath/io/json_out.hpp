#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>

#include "json.hpp"

namespace dpath::io {

using Json = nlohmann::ordered_json;

/// Shortest text that still carries all 17 significant digits.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline void dump_into(const Json& j, std::string& out, int indent, int level) {
  auto newline = [&](int lvl) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * lvl), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        out += Json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump_into(it.value(), out, indent, level + 1);
      }
      newline(level);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += ',';
        first = false;
        newline(level + 1);
        dump_into(e, out, indent, level + 1);
      }
      newline(level);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

/** JSON text with every float written at 17 significant digits. */
inline std::string dump(const Json& j, int indent = 2) {
  std::string out;
  detail::dump_into(j, out, indent, 0);
  return out;
}

inline Json complex_json(const std::complex<double>& z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

}  // namespace dpath::io
