#pragma once

/// @file io.hpp
/// @brief File formats: CSV artifacts (17-significant-digit, LF, atomic
///        write-then-rename), the RegimeModel JSON schema, and the hourly
///        inflow record reader.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "resop/errors.hpp"
#include "resop/regime.hpp"
#include "resop/scheme.hpp"
#include "resop/sim.hpp"
#include "resop/solver.hpp"

namespace resop {

/// Shortest-faithful decimal rendering used in every CSV cell.
inline std::string format_value(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes content to path via a sibling temporary file and an atomic rename.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw config_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw config_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// One CSV table: a header row and numeric rows, LF-terminated.
inline std::string render_csv(const std::string& header,
                              const std::vector<std::vector<double>>& rows) {
  std::string out = header + "\n";
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_value(row[c]);
    }
    out += '\n';
  }
  return out;
}

inline void write_csv(const std::filesystem::path& path, const std::string& header,
                      const std::vector<std::vector<double>>& rows) {
  write_text_atomic(path, render_csv(header, rows));
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  ///< raw cells
};

/// Reads a comma-separated table; rejects ragged rows with the line number.
inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open: " + path.string());
  CsvTable table;
  std::string line;
  long line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.push_back("");
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (line_no == 1) {
      table.header = std::move(cells);
    } else {
      if (cells.size() != table.header.size())
        throw config_error(path.string() + ": line " + std::to_string(line_no) +
                           ": expected " + std::to_string(table.header.size()) +
                           " columns");
      table.rows.push_back(std::move(cells));
    }
  }
  if (table.header.empty())
    throw config_error(path.string() + ": missing header row");
  return table;
}

inline double parse_double(const std::string& cell, const std::string& where) {
  char* end = nullptr;
  const double x = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0')
    throw config_error(where + ": not a number: '" + cell + "'");
  return x;
}

// ---------------------------------------------------------------------------
// Timestamps (hourly inflow records)

namespace io_detail {

/// Days since 1970-01-01 for a proleptic Gregorian date (civil-calendar
/// counting; valid across the whole double range used here).
inline long long days_from_civil(long long y, unsigned m, unsigned d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

}  // namespace io_detail

/// Parses "YYYY-MM-DD HH:MM[:SS]" (or with a 'T' separator) to hours since
/// the epoch; minutes and seconds contribute fractionally.
inline double parse_timestamp_hours(const std::string& s, const std::string& where) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  char sep = ' ';
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &year, &month, &day, &sep, &hour,
                      &minute, &second);
  if (n < 6 || (sep != ' ' && sep != 'T') || month < 1 || month > 12 || day < 1 ||
      day > 31 || hour < 0 || hour > 23 || minute < 0 || minute > 59 || second < 0 ||
      second > 59)
    throw config_error(where + ": bad timestamp '" + s + "'");
  const long long days = io_detail::days_from_civil(year, static_cast<unsigned>(month),
                                                    static_cast<unsigned>(day));
  return static_cast<double>(days) * 24.0 + hour + minute / 60.0 + second / 3600.0;
}

/// Reads an hourly inflow record CSV with columns `timestamp,discharge_m3s`.
/// Consecutive rows must be exactly `lag_hours` apart; gaps are rejected,
/// not interpolated.
inline std::vector<double> read_inflow_csv(const std::filesystem::path& path,
                                           double lag_hours) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2 || table.header[0] != "timestamp" ||
      table.header[1] != "discharge_m3s")
    throw config_error(path.string() + ": expected header 'timestamp,discharge_m3s'");
  std::vector<double> discharges;
  discharges.reserve(table.rows.size());
  double prev_hours = 0.0;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = path.string() + ": line " + std::to_string(r + 2);
    const double hours = parse_timestamp_hours(table.rows[r][0], where);
    if (r > 0 && std::abs(hours - prev_hours - lag_hours) > 1e-9)
      throw config_error(where + ": record gap (expected " + format_value(lag_hours) +
                         " h spacing)");
    prev_hours = hours;
    const double q = parse_double(table.rows[r][1], where);
    if (!(q >= 0.0)) throw config_error(where + ": negative discharge");
    discharges.push_back(q);
  }
  return discharges;
}

// ---------------------------------------------------------------------------
// RegimeModel JSON

/// Serialization drops the final +inf bin edge (JSON has no infinity);
/// loading appends it back.
inline nlohmann::json model_to_json(const RegimeModel& model) {
  nlohmann::json j;
  j["bin_edges"] = std::vector<double>(model.bin_edges.begin(), model.bin_edges.end() - 1);
  j["representatives"] = model.representatives;
  j["rates"] = model.rates;
  j["lag_hours"] = model.lag_hours;
  return j;
}

inline RegimeModel model_from_json(const nlohmann::json& j) {
  RegimeModel model;
  try {
    model.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    model.representatives = j.at("representatives").get<std::vector<double>>();
    model.rates = j.at("rates").get<Matrix>();
    model.lag_hours = j.at("lag_hours").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("RegimeModel JSON: ") + e.what());
  }
  model.bin_edges.push_back(std::numeric_limits<double>::infinity());
  model.validate();
  return model;
}

inline void write_model_json(const std::filesystem::path& path, const RegimeModel& model) {
  write_text_atomic(path, model_to_json(model).dump(2) + "\n");
}

inline RegimeModel read_model_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw config_error(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

// ---------------------------------------------------------------------------
// Grid-field CSV artifacts

inline void write_value_csv(const std::filesystem::path& path, const ValueField& field,
                            double scale = 1.0) {
  std::vector<std::vector<double>> rows;
  rows.reserve(field.phi.size() * field.phi[0].size());
  for (std::size_t i = 0; i < field.phi.size(); ++i)
    for (std::size_t k = 0; k < field.phi[i].size(); ++k)
      rows.push_back({static_cast<double>(i), static_cast<double>(k),
                      field.grid.vertex(static_cast<int>(k)), field.phi[i][k] * scale});
  write_csv(path, "regime,k,v,phi", rows);
}

inline void write_policy_csv(const std::filesystem::path& path, const PolicyField& policy) {
  std::vector<std::vector<double>> rows;
  rows.reserve(policy.q.size() * policy.q[0].size());
  for (std::size_t i = 0; i < policy.q.size(); ++i)
    for (std::size_t k = 0; k < policy.q[i].size(); ++k)
      rows.push_back({static_cast<double>(i), static_cast<double>(k),
                      policy.grid.vertex(static_cast<int>(k)), policy.q[i][k]});
  write_csv(path, "regime,k,v,q_star", rows);
}

/// Loads a policy CSV against an expected grid; any shape mismatch is a
/// configuration error.
inline PolicyField read_policy_csv(const std::filesystem::path& path, const Grid& grid,
                                   int num_regimes) {
  const CsvTable table = read_csv(path);
  const std::vector<std::string> want{"regime", "k", "v", "q_star"};
  if (table.header != want)
    throw config_error(path.string() + ": expected header 'regime,k,v,q_star'");
  const std::size_t expected =
      static_cast<std::size_t>(num_regimes) * static_cast<std::size_t>(grid.K + 1);
  if (table.rows.size() != expected)
    throw config_error(path.string() + ": policy shape mismatch (have " +
                       std::to_string(table.rows.size()) + " rows, config expects " +
                       std::to_string(expected) + ")");
  PolicyField pol;
  pol.grid = grid;
  pol.q.assign(static_cast<std::size_t>(num_regimes),
               std::vector<double>(static_cast<std::size_t>(grid.K + 1), 0.0));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string where = path.string() + ": line " + std::to_string(r + 2);
    const long i = std::lround(parse_double(table.rows[r][0], where));
    const long k = std::lround(parse_double(table.rows[r][1], where));
    if (i < 0 || i >= num_regimes || k < 0 || k > grid.K)
      throw config_error(where + ": row outside the configured grid");
    pol.q[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
        parse_double(table.rows[r][3], where);
  }
  return pol;
}

inline void write_convergence_csv(const std::filesystem::path& path,
                                  const std::vector<ConvergenceEntry>& log) {
  std::vector<std::vector<double>> rows;
  rows.reserve(log.size());
  for (const auto& e : log)
    rows.push_back({static_cast<double>(e.step), e.t, e.residual});
  write_csv(path, "step,t,residual", rows);
}

inline void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                             const std::string& header = "i,j,value") {
  std::vector<std::vector<double>> rows;
  rows.reserve(m.size() * m.size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j)
      rows.push_back({static_cast<double>(i), static_cast<double>(j), m[i][j]});
  write_csv(path, header, rows);
}

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.times.size());
  for (std::size_t s = 0; s < traj.times.size(); ++s)
    rows.push_back({traj.times[s], static_cast<double>(traj.regimes[s]), traj.volumes[s],
                    traj.discharges[s], traj.cost_increments[s]});
  write_csv(path, "t,regime,v,q,cost_increment", rows);
}

}  // namespace resop
