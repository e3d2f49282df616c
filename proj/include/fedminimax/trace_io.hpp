#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedminimax/error.hpp"
#include "fedminimax/trace.hpp"

namespace fedminimax {

inline constexpr const char* kTraceHeader =
    "round,algo,seed,grad_phi_norm,f_value,grad_err_x,grad_err_y,max_drift_x,max_drift_y,server_step_x,"
    "server_step_y,potential,auc";

/// Thrown for malformed trace files; carries the 1-based line number.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t row, const std::string& what)
      : std::runtime_error("trace CSV row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// 17 significant digits, enough to round-trip every double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_trace_csv(const RunTrace& trace, std::ostream& os) {
  os << kTraceHeader << '\n';
  const std::string algo(to_string(trace.algorithm));
  const std::string seed = std::to_string(trace.seed);
  for (const auto& r : trace.records) {
    os << r.t << ',' << algo << ',' << seed;
    for (double v : {r.grad_phi_norm, r.f_value, r.grad_err_x, r.grad_err_y, r.max_drift_x, r.max_drift_y,
                     r.server_step_x, r.server_step_y, r.potential})
      os << ',' << format_double(v);
    os << ',';
    if (r.auc) os << format_double(*r.auc);
    os << '\n';
  }
}

inline std::string trace_to_csv(const RunTrace& trace) {
  std::ostringstream os;
  write_trace_csv(trace, os);
  return os.str();
}

namespace detail {

inline double parse_csv_double(const std::string& cell, std::size_t row, const char* column) {
  // strtod accepts nan/inf, which is how non-finite values are written.
  if (cell.empty()) throw TraceParseError(row, std::string("empty value in column ") + column);
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size())
    throw TraceParseError(row, std::string("bad number '") + cell + "' in column " + column);
  return v;
}

}  // namespace detail

/// Reads a trace written by write_trace_csv. The CSV carries no diagnostics
/// beyond the documented columns, so the returned records leave them unset.
/// rounds_planned is set to the number of rows; cols_x / cols_y default to 1
/// and must be supplied by the caller for matrix-shaped Muon runs.
inline RunTrace read_trace_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw TraceParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw TraceParseError(1, "header does not match the trace schema");

  static constexpr const char* kColumns[] = {"round",         "algo",          "seed",        "grad_phi_norm",
                                             "f_value",       "grad_err_x",    "grad_err_y",  "max_drift_x",
                                             "max_drift_y",   "server_step_x", "server_step_y", "potential",
                                             "auc"};
  RunTrace trace;
  std::size_t row = 1;
  bool first = true;
  while (std::getline(is, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw TraceParseError(row, "empty line");

    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 13)
      throw TraceParseError(row, "expected 13 fields, found " + std::to_string(cells.size()));

    RoundRecord r;
    try {
      std::size_t used = 0;
      r.t = std::stoi(cells[0], &used);
      if (used != cells[0].size() || r.t < 0) throw std::invalid_argument(cells[0]);
    } catch (const std::exception&) {
      throw TraceParseError(row, "bad round index '" + cells[0] + "'");
    }
    const auto alg = parse_algorithm(cells[1]);
    if (!alg) throw TraceParseError(row, "unknown algorithm '" + cells[1] + "'");
    std::uint64_t seed = 0;
    try {
      std::size_t used = 0;
      seed = std::stoull(cells[2], &used);
      if (used != cells[2].size() || cells[2].front() == '-') throw std::invalid_argument(cells[2]);
    } catch (const std::exception&) {
      throw TraceParseError(row, "bad seed '" + cells[2] + "'");
    }
    if (first) {
      trace.algorithm = *alg;
      trace.seed = seed;
      first = false;
    } else if (*alg != trace.algorithm || seed != trace.seed) {
      throw TraceParseError(row, "algorithm/seed differ from the first row");
    }
    if (r.t != static_cast<int>(trace.records.size()))
      throw TraceParseError(row, "round index " + cells[0] + " out of sequence");

    double* fields[] = {&r.grad_phi_norm, &r.f_value,       &r.grad_err_x,    &r.grad_err_y, &r.max_drift_x,
                        &r.max_drift_y,   &r.server_step_x, &r.server_step_y, &r.potential};
    for (std::size_t k = 0; k < 9; ++k) *fields[k] = detail::parse_csv_double(cells[3 + k], row, kColumns[3 + k]);
    if (!cells[12].empty()) r.auc = detail::parse_csv_double(cells[12], row, "auc");
    r.invariants_ok = true;
    trace.records.push_back(r);
  }
  trace.rounds_planned = static_cast<int>(trace.records.size());
  return trace;
}

}  // namespace fedminimax
