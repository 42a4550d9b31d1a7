#pragma once

#include <string>
#include <vector>

#include "accel/guessing.hpp"
#include "accel/problems.hpp"
#include "accel/solvers.hpp"
#include "accel/verify.hpp"

namespace accel {

// Entire file as a string; io_error when unreadable.
std::string read_text_file(const std::string& path);

// Overwrites path with content; io_error when unwritable.
void write_text_file(const std::string& path, const std::string& content);

// Trace CSV with header `iter,grad_norm,f_value,beta_t`, one row per iterate,
// numbers printed round-trip exactly (%.17g).
std::string trace_csv(const std::vector<trace_row>& rows);
void write_trace_csv(const std::string& path, const run_trace& trace);
void write_trace_csv(const std::string& path, const std::vector<trace_row>& rows);

// Quadratic instance as self-describing JSON: explicit dimension, row-major
// matrix entries, right-hand side, spectrum metadata, seed. Values round-trip
// bit exactly.
std::string quadratic_json(const quadratic_problem& p);
void save_quadratic(const std::string& path, const quadratic_problem& p);
quadratic_problem load_quadratic(const std::string& path);
quadratic_problem parse_quadratic_json(const std::string& text);

// Oracle report as pretty-printed JSON.
std::string oracle_report_json(const oracle_report& rep);

// Guess trace as pretty-printed JSON (runs, guards, totals; history lives in
// the CSV next to it).
std::string guess_trace_json(const guess_trace& trace);

} // namespace accel
