#pragma once

// Plain-text system definitions.
//
// A config is line-oriented `key = value` with # comments:
//
//   n = 2
//   h = x1
//   f = [2*lam^2 - 1, -lam]
//   x0 = [0.5, 0]
//   t_span = [0, 10]
//
// A pre-split system replaces f with the three keys fplus, fminus, g.
// Errors carry the 1-based line (and column where it is known).
// serialize_config inverts parse_config exactly: numbers keep 17 significant
// digits and expressions print in a form that reparses to the same tree.

#include <charconv>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hidyn/expr.hpp"
#include "hidyn/system.hpp"

namespace hidyn {

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParsedConfig {
  SwitchedSystem system;
  std::vector<double> x0;
  double t0 = 0.0;
  double t1 = 0.0;
};

namespace detail {

struct ConfigEntry {
  std::string value;
  int line = 0;  // 1-based
  int col = 0;   // 0-based offset of value within the line
};

inline std::string_view trim(std::string_view s, std::size_t* lead = nullptr) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  if (lead) *lead = a;
  return s.substr(a, b - a);
}

[[noreturn]] inline void fail_at(int line, int col, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(col + 1) +
                    ": " + msg);
}

[[noreturn]] inline void fail_line(int line, const std::string& msg) {
  throw ConfigError("line " + std::to_string(line) + ": " + msg);
}

// Elements of a top-level [a, b, c] list with their offsets in the value.
inline std::vector<std::pair<std::string_view, int>> split_list(const ConfigEntry& e,
                                                                const char* key) {
  std::string_view v = e.value;
  if (v.empty() || v.front() != '[' || v.back() != ']')
    fail_at(e.line, e.col, std::string(key) + " must be a [..] list");
  std::vector<std::pair<std::string_view, int>> out;
  int depth = 0;
  std::size_t start = 1;
  const std::size_t end = v.size() - 1;  // the closing ']'
  for (std::size_t i = 1; i <= end; ++i) {
    char c = i == end ? ',' : v[i];  // treat the ']' as a final separator
    if (c == '(' || c == '[') {
      ++depth;
    } else if (c == ')' || c == ']') {
      --depth;
    } else if (c == ',' && depth == 0) {
      std::size_t lead = 0;
      std::string_view elem = trim(v.substr(start, i - start), &lead);
      if (elem.empty())
        fail_at(e.line, e.col + static_cast<int>(start), "empty list element");
      out.push_back({elem, e.col + static_cast<int>(start + lead)});
      start = i + 1;
    }
  }
  if (depth != 0) fail_at(e.line, e.col, "unbalanced brackets in list");
  return out;
}

inline double parse_number(std::string_view text, int line, int col) {
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  double out = 0.0;
  auto [p, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || p != e) fail_at(line, col, "expected a number");
  return out;
}

inline Expr parse_entry_expr(std::string_view text, int n, int line, int col) {
  try {
    return Expr::parse(text, n);
  } catch (const ParseError& pe) {
    fail_at(line, col + pe.position(), std::string("invalid expression: ") + pe.what());
  }
}

}  // namespace detail

inline ParsedConfig parse_config(std::string_view text) {
  using detail::ConfigEntry;
  std::vector<std::pair<std::string, ConfigEntry>> entries;
  auto find = [&](std::string_view key) -> const ConfigEntry* {
    for (auto& [k, e] : entries)
      if (k == key) return &e;
    return nullptr;
  };

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::string_view line = raw.substr(0, std::min(raw.find('#'), raw.size()));
    std::size_t lead = 0;
    std::string_view body = detail::trim(line, &lead);
    if (body.empty()) continue;

    std::size_t eq = body.find('=');
    if (eq == std::string_view::npos)
      detail::fail_line(line_no, "expected `key = value`");
    std::string_view key = detail::trim(body.substr(0, eq));
    std::size_t vlead = 0;
    std::string_view value = detail::trim(body.substr(eq + 1), &vlead);
    if (key.empty()) detail::fail_line(line_no, "missing key before `=`");
    if (value.empty()) detail::fail_line(line_no, "missing value for '" + std::string(key) + "'");

    static const char* known[] = {"n", "h", "f", "fplus", "fminus", "g", "x0", "t_span"};
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) detail::fail_line(line_no, "unknown key '" + std::string(key) + "'");
    if (find(key)) detail::fail_line(line_no, "duplicate key '" + std::string(key) + "'");

    int vcol = static_cast<int>(lead + eq + 1 + vlead);
    entries.push_back({std::string(key), {std::string(value), line_no, vcol}});
  }

  auto require = [&](std::string_view key) -> const ConfigEntry& {
    if (const ConfigEntry* e = find(key)) return *e;
    throw ConfigError("missing key '" + std::string(key) + "'");
  };

  const ConfigEntry& ne = require("n");
  int n = 0;
  {
    const char* b = ne.value.data();
    const char* e = b + ne.value.size();
    auto [p, ec] = std::from_chars(b, e, n);
    if (ec != std::errc{} || p != e || n <= 0)
      detail::fail_at(ne.line, ne.col, "n must be a positive integer");
  }

  auto expr_list = [&](const ConfigEntry& e, const char* key) {
    std::vector<Expr> out;
    for (auto [elem, col] : detail::split_list(e, key))
      out.push_back(detail::parse_entry_expr(elem, n, e.line, col));
    if (out.size() != static_cast<std::size_t>(n))
      detail::fail_at(e.line, e.col,
                      std::string(key) + " must list " + std::to_string(n) + " components");
    return out;
  };

  const ConfigEntry& he = require("h");
  Expr h = detail::parse_entry_expr(he.value, n, he.line, he.col);

  ParsedConfig out;
  const ConfigEntry* fe = find("f");
  const ConfigEntry* fpe = find("fplus");
  const ConfigEntry* fme = find("fminus");
  const ConfigEntry* ge = find("g");
  try {
    if (fe) {
      if (fpe || fme || ge)
        detail::fail_line(fe->line, "give either f or the fplus/fminus/g triple, not both");
      out.system = SwitchedSystem::combined(n, std::move(h), expr_list(*fe, "f"));
    } else {
      if (!fpe || !fme || !ge)
        throw ConfigError("a split system needs all three of fplus, fminus, g");
      out.system = SwitchedSystem::split(n, std::move(h), expr_list(*fpe, "fplus"),
                                         expr_list(*fme, "fminus"), expr_list(*ge, "g"));
    }
  } catch (const ValidationError& ve) {
    throw ConfigError(std::string("invalid system: ") + ve.what());
  }

  const ConfigEntry& xe = require("x0");
  for (auto [elem, col] : detail::split_list(xe, "x0"))
    out.x0.push_back(detail::parse_number(elem, xe.line, col));
  if (out.x0.size() != static_cast<std::size_t>(n))
    detail::fail_at(xe.line, xe.col, "x0 must list " + std::to_string(n) + " components");

  const ConfigEntry& te = require("t_span");
  auto span = detail::split_list(te, "t_span");
  if (span.size() != 2) detail::fail_at(te.line, te.col, "t_span must be [t0, t1]");
  out.t0 = detail::parse_number(span[0].first, te.line, span[0].second);
  out.t1 = detail::parse_number(span[1].first, te.line, span[1].second);
  if (!(out.t0 < out.t1)) detail::fail_at(te.line, te.col, "t_span needs t0 < t1");

  return out;
}

inline std::string serialize_config(const ParsedConfig& c) {
  std::string out;
  auto expr_line = [&](const char* key, const std::vector<Expr>& es) {
    out += key;
    out += " = [";
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (i) out += ", ";
      out += es[i].print();
    }
    out += "]\n";
  };
  out += "n = " + std::to_string(c.system.n) + "\n";
  out += "h = " + c.system.h.print() + "\n";
  if (c.system.is_split()) {
    const auto& s = std::get<SplitForm>(c.system.form);
    expr_line("fplus", s.fplus);
    expr_line("fminus", s.fminus);
    expr_line("g", s.g);
  } else {
    expr_line("f", std::get<CombinedForm>(c.system.form).f);
  }
  out += "x0 = [";
  for (std::size_t i = 0; i < c.x0.size(); ++i) {
    if (i) out += ", ";
    out += format_double(c.x0[i]);
  }
  out += "]\n";
  out += "t_span = [" + format_double(c.t0) + ", " + format_double(c.t1) + "]\n";
  return out;
}

}  // namespace hidyn
