#pragma once

// JSON and CSV serialization for bracket tables, trajectories and reduction
// reports.

#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "glome/geodesics.hpp"
#include "glome/reduction.hpp"
#include "glome/symmetries.hpp"

namespace glome {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const BracketTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.entries) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& e : row) r.push_back({{"id", e.id.str()}, {"residual", e.residual}});
    rows.push_back(std::move(r));
  }
  return {{"entries", std::move(rows)}};
}

inline BracketTable bracket_table_from_json(const nlohmann::json& j) {
  BracketTable t;
  const auto& rows = j.at("entries");
  if (!rows.is_array() || rows.size() != 6) throw ParseError("bracket table: need 6 rows");
  for (std::size_t i = 0; i < 6; ++i) {
    if (!rows[i].is_array() || rows[i].size() != 6) throw ParseError("bracket table: need 6 columns");
    for (std::size_t k = 0; k < 6; ++k) {
      t.entries[i][k].id = BracketId::parse(rows[i][k].at("id").get<std::string>());
      t.entries[i][k].residual = rows[i][k].at("residual").get<double>();
    }
  }
  return t;
}

inline nlohmann::json to_json(const ReductionReport& r) {
  return {{"k", r.k},
          {"branch", std::string(1, branch_symbol(r.branch))},
          {"alpha_mean", r.alpha_mean},
          {"alpha_rel_dev", r.alpha_rel_dev},
          {"samples", r.samples},
          {"excluded", r.excluded}};
}

inline constexpr const char* kTrajectoryHeader =
    "x,y,v,y_x,v_x,noether_c,lagrangian,ambient_norm_residual";

/// Shortest round-trip-safe rendering would vary in width; 17 significant
/// digits is fixed and exact for doubles.
inline std::string format_double(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

inline void write_csv(std::ostream& os, const Trajectory& t) {
  os << kTrajectoryHeader << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = t.samples[i];
    const auto& d = t.diagnostics[i];
    const double row[] = {s.base.x, s.base.y,    s.base.v,     s.y_x,
                          s.v_x,    d.noether_c, d.lagrangian, d.ambient_norm_residual};
    for (std::size_t c = 0; c < 8; ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
}

/// Parses the trajectory CSV; diagnostics are recomputed from the state
/// columns rather than trusted from the file.
inline Trajectory read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("trajectory csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTrajectoryHeader) throw ParseError("trajectory csv: unexpected header '" + line + "'");
  Trajectory t;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t start = 0;
    while (start <= line.size()) {
      std::size_t end = line.find(',', start);
      if (end == std::string::npos) end = line.size();
      std::string cell = line.substr(start, end - start);
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("trajectory csv: bad number '" + cell + "' on line " + std::to_string(lineno));
      }
      start = end + 1;
    }
    if (vals.size() != 8) {
      throw ParseError("trajectory csv: expected 8 columns on line " + std::to_string(lineno));
    }
    t.push({{vals[0], vals[1], vals[2]}, vals[3], vals[4]});
  }
  if (t.empty()) throw ParseError("trajectory csv: no samples");
  return t;
}

}  // namespace glome
