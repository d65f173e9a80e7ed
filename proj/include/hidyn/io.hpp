#pragma once

// Trajectory output.
//
// CSV: header `t,x1,...,xn,lambda,mode`, one row per sample, numbers at
// 17 significant digits.  Events go to a sibling file (run.csv ->
// run.events.csv) with header `t,kind`.
//
// JSON is a single object {meta, samples, events} carrying the same data
// plus run metadata supplied by the caller as ready-made JSON fragments.

#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hidyn/expr.hpp"
#include "hidyn/trajectory.hpp"

namespace hidyn {

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  for (int i = 1; i <= traj.dim(); ++i) os << ",x" << i;
  os << ",lambda,mode\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << format_double(traj.t(i));
    for (double v : traj.x(i)) os << ',' << format_double(v);
    os << ',' << format_double(traj.lam(i)) << ',' << to_string(traj.mode(i)) << '\n';
  }
}

inline void write_events_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,kind\n";
  for (const Event& e : traj.events())
    os << format_double(e.t) << ',' << to_string(e.kind) << '\n';
}

// run.csv -> run.events.csv; a path with no extension gets .events.csv.
inline std::string events_sibling_path(std::string_view csv_path) {
  std::size_t slash = csv_path.find_last_of("/\\");
  std::size_t dot = csv_path.find_last_of('.');
  if (dot == std::string_view::npos || (slash != std::string_view::npos && dot < slash))
    return std::string(csv_path) + ".events.csv";
  std::string out(csv_path.substr(0, dot));
  out += ".events";
  out += csv_path.substr(dot);
  return out;
}

inline std::string json_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
  return out;
}

// meta entries are (key, fragment) pairs; fragments must already be valid
// JSON values (use json_quote for strings, format_double for numbers).
inline void write_run_json(std::ostream& os, const Trajectory& traj,
                           const std::vector<std::pair<std::string, std::string>>& meta) {
  os << "{\n  \"meta\": {";
  for (std::size_t i = 0; i < meta.size(); ++i) {
    if (i) os << ", ";
    os << json_quote(meta[i].first) << ": " << meta[i].second;
  }
  os << "},\n  \"samples\": [";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << (i ? ",\n    " : "\n    ");
    os << "{\"t\": " << format_double(traj.t(i)) << ", \"x\": [";
    bool first = true;
    for (double v : traj.x(i)) {
      if (!first) os << ", ";
      first = false;
      os << format_double(v);
    }
    os << "], \"lambda\": " << format_double(traj.lam(i)) << ", \"mode\": "
       << json_quote(to_string(traj.mode(i))) << "}";
  }
  os << "\n  ],\n  \"events\": [";
  for (std::size_t i = 0; i < traj.events().size(); ++i) {
    const Event& e = traj.events()[i];
    os << (i ? ",\n    " : "\n    ");
    os << "{\"t\": " << format_double(e.t) << ", \"kind\": " << json_quote(to_string(e.kind))
       << "}";
  }
  os << "\n  ]\n}\n";
}

}  // namespace hidyn
