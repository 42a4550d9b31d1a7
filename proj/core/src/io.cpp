#include "accel/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "accel/errors.hpp"

namespace accel {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

// JSON null for non-finite diagnostics; traces themselves never hold them.
json num_or_null(double v) {
  if (std::isfinite(v)) return json(v);
  return json(nullptr);
}

json parse_document(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw format_error(what + ": invalid JSON");
  return doc;
}

} // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open '" + path + "' for reading");
  std::ostringstream out;
  out << in.rdbuf();
  if (in.bad()) throw io_error("failed reading '" + path + "'");
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) throw io_error("failed writing '" + path + "'");
}

std::string trace_csv(const std::vector<trace_row>& rows) {
  std::string out = "iter,grad_norm,f_value,beta_t\n";
  for (const auto& row : rows) {
    out += std::to_string(row.t);
    out += ',';
    out += fmt17(row.grad_norm);
    out += ',';
    out += fmt17(row.f);
    out += ',';
    out += fmt17(row.beta_used);
    out += '\n';
  }
  return out;
}

void write_trace_csv(const std::string& path, const run_trace& trace) {
  write_text_file(path, trace_csv(trace.rows));
}

void write_trace_csv(const std::string& path, const std::vector<trace_row>& rows) {
  write_text_file(path, trace_csv(rows));
}

std::string quadratic_json(const quadratic_problem& p) {
  const std::size_t d = p.b.size();
  json doc;
  doc["dim"] = d;
  doc["mu"] = p.mu;
  doc["l"] = p.l;
  doc["seed"] = p.seed;
  doc["matrix"] = p.a.entries(); // row-major
  doc["rhs"] = p.b;
  return doc.dump(2) + "\n";
}

void save_quadratic(const std::string& path, const quadratic_problem& p) {
  write_text_file(path, quadratic_json(p));
}

quadratic_problem parse_quadratic_json(const std::string& text) {
  json doc = parse_document(text, "quadratic instance");
  for (const char* key : {"dim", "mu", "l", "seed", "matrix", "rhs"}) {
    if (!doc.contains(key)) {
      throw format_error(std::string("quadratic instance: missing field '") + key + "'");
    }
  }
  quadratic_problem p;
  std::size_t d = 0;
  try {
    d = doc.at("dim").get<std::size_t>();
    p.mu = doc.at("mu").get<double>();
    p.l = doc.at("l").get<double>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    const auto entries = doc.at("matrix").get<std::vector<double>>();
    const auto rhs = doc.at("rhs").get<std::vector<double>>();
    if (d == 0) throw format_error("quadratic instance: dim must be positive");
    if (entries.size() != d * d) {
      throw format_error("quadratic instance: matrix entry count does not match dim");
    }
    if (rhs.size() != d) {
      throw format_error("quadratic instance: rhs length does not match dim");
    }
    p.a = dense_matrix(d, d, entries);
    p.b = rhs;
  } catch (const json::exception&) {
    throw format_error("quadratic instance: field has the wrong type");
  }
  if (!all_finite(p.a) || !all_finite(p.b)) {
    throw format_error("quadratic instance: non-finite entries");
  }
  return p;
}

quadratic_problem load_quadratic(const std::string& path) {
  return parse_quadratic_json(read_text_file(path));
}

std::string oracle_report_json(const oracle_report& rep) {
  json doc;
  doc["name"] = rep.name;
  doc["pass"] = rep.pass;
  doc["tolerance"] = rep.tolerance;
  doc["notes"] = rep.notes;
  json records = json::array();
  for (const auto& r : rep.records) {
    records.push_back({{"t", r.t},
                       {"lhs", num_or_null(r.lhs)},
                       {"rhs", num_or_null(r.rhs)},
                       {"slack", num_or_null(r.slack)}});
  }
  doc["records"] = records;
  return doc.dump(2) + "\n";
}

std::string guess_trace_json(const guess_trace& trace) {
  json doc;
  doc["total_iterations"] = trace.total_iterations;
  doc["i_max"] = trace.i_max;
  doc["j_max"] = trace.j_max;
  json runs = json::array();
  for (const auto& r : trace.runs) {
    runs.push_back({{"i", r.i},
                    {"j", r.j},
                    {"kappa_i", r.kappa_i},
                    {"mu_i", r.mu_i},
                    {"l_i", r.l_i},
                    {"t_i", r.t_i},
                    {"t_before", r.t_before},
                    {"grad_before", num_or_null(r.grad_before)},
                    {"grad_after", num_or_null(r.grad_after)},
                    {"ratio_held", r.ratio_held}});
  }
  doc["runs"] = runs;
  json guards = json::array();
  for (const auto& g : trace.guards) {
    guards.push_back({{"i", g.i},
                      {"j", g.j},
                      {"rolled_back", g.rolled_back},
                      {"retained_grad_norm", num_or_null(g.retained_grad_norm)}});
  }
  doc["guards"] = guards;
  return doc.dump(2) + "\n";
}

} // namespace accel
