// Command-line harness: instance generation, solver comparison runs, guessing
// searches, and bound/identity oracles, driven by JSON configs.
//
// Exit codes: 0 success (or oracle pass), 1 runtime failure (I/O, numerics,
// oracle fail), 2 usage or configuration error.

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "accel/chebyshev.hpp"
#include "accel/errors.hpp"
#include "accel/guessing.hpp"
#include "accel/io.hpp"
#include "accel/problems.hpp"
#include "accel/rng.hpp"
#include "accel/solvers.hpp"
#include "accel/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace accel;

namespace {

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("ACCEL_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t value = 0;
  const char* last = raw;
  while (*last != '\0') ++last;
  auto [ptr, ec] = std::from_chars(raw, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw input_error("ACCEL_SEED must be an unsigned integer");
  }
  return value;
}

json load_config(const std::string& path) {
  json doc = json::parse(read_text_file(path), nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw format_error("config '" + path + "': invalid JSON");
  if (!doc.is_object()) throw format_error("config '" + path + "': expected an object");
  return doc;
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw format_error(std::string("config field '") + key + "' has the wrong type");
  }
}

template <typename T>
T require(const json& obj, const char* key, const char* where) {
  if (!obj.contains(key)) {
    throw format_error(std::string(where) + ": missing required field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw format_error(std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

struct problem_bundle {
  objective obj;
  std::string type;
  std::size_t dim = 0;
  std::optional<quadratic_problem> quad;
  std::optional<double> kappa;
  json effective; // problem section with defaults resolved
};

problem_bundle build_problem(const json& cfg, std::optional<std::uint64_t> seed_override) {
  if (!cfg.contains("problem")) throw format_error("config: missing 'problem' section");
  const json& pc = cfg.at("problem");
  const auto type = require<std::string>(pc, "type", "problem");

  problem_bundle out;
  out.type = type;
  if (type == "quadratic") {
    const auto d = require<std::size_t>(pc, "d", "problem");
    const auto mu = require<double>(pc, "mu", "problem");
    const auto l = require<double>(pc, "l", "problem");
    auto seed = get_or<std::uint64_t>(pc, "seed", 0);
    if (seed_override.has_value()) seed = *seed_override;
    const bool btb = get_or<bool>(pc, "btb", false);
    quadratic_problem p;
    if (btb) {
      const auto rows = get_or<std::size_t>(pc, "rows", 2 * d);
      p = quadratic_generate_btb(d, rows, seed);
    } else {
      p = quadratic_generate(d, mu, l, seed);
    }
    out.dim = d;
    out.kappa = p.l / p.mu;
    out.obj = make_objective(p);
    out.effective = {{"type", "quadratic"}, {"d", d},     {"mu", p.mu},
                     {"l", p.l},           {"seed", seed}, {"btb", btb}};
    out.quad = std::move(p);
  } else if (type == "quadratic_file") {
    const auto path = require<std::string>(pc, "path", "problem");
    quadratic_problem p = load_quadratic(path);
    out.dim = p.b.size();
    out.kappa = p.mu > 0.0 ? p.l / p.mu : std::optional<double>{};
    out.obj = make_objective(p);
    out.effective = {{"type", "quadratic_file"}, {"path", path}, {"d", out.dim},
                     {"mu", p.mu},               {"l", p.l}};
    out.quad = std::move(p);
  } else if (type == "logistic") {
    const auto csv = require<std::string>(pc, "csv", "problem");
    const auto label = require<std::string>(pc, "label", "problem");
    const double ridge = get_or<double>(pc, "ridge", 0.0);
    const bool standardize = get_or<bool>(pc, "standardize", true);
    const bool intercept = get_or<bool>(pc, "intercept", true);
    dataset ds = load_dataset_csv(csv, label, standardize);
    if (intercept) ds = with_intercept(ds);
    const auto [mu_est, l_est] = estimate_smoothness(ds, ridge);
    const double mu_floor = solver_mu_floor(ridge, l_est);
    out.dim = ds.features.cols();
    out.obj = make_objective(ds, ridge);
    out.obj.known_l = l_est;
    out.obj.known_mu = mu_floor;
    out.kappa = l_est / mu_floor;
    out.effective = {{"type", "logistic"},       {"csv", csv},
                     {"label", label},           {"ridge", ridge},
                     {"standardize", standardize}, {"intercept", intercept},
                     {"l_estimate", l_est},      {"mu_floor", mu_floor}};
    (void)mu_est;
  } else {
    throw format_error("problem: unknown type '" + type + "'");
  }
  return out;
}

vec build_x0(const json& cfg, std::size_t dim,
             std::optional<std::uint64_t> seed_override, json& echo) {
  vec x0(dim, 0.0);
  echo = {{"type", "zero"}};
  if (!cfg.contains("x0")) return x0;
  const json& xc = cfg.at("x0");
  const auto type = get_or<std::string>(xc, "type", "zero");
  if (type == "zero") return x0;
  if (type == "gaussian") {
    const double scale = get_or<double>(xc, "scale", 1.0);
    auto seed = get_or<std::uint64_t>(xc, "seed", 0);
    if (seed_override.has_value()) seed = *seed_override;
    rng r(seed);
    for (auto& v : x0) v = scale * r.gaussian();
    echo = {{"type", "gaussian"}, {"scale", scale}, {"seed", seed}};
    return x0;
  }
  throw format_error("x0: unknown type '" + type + "'");
}

fs::path prepare_out_dir(const json& cfg) {
  const auto dir = get_or<std::string>(cfg, "out_dir", ".");
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) {
    throw io_error("cannot create output directory '" + dir + "'");
  }
  return p;
}

std::string sanitize_name(const std::string& name) {
  std::string out;
  for (char c : name) {
    out.push_back((std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_');
  }
  return out.empty() ? std::string("solver") : out;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct solver_run {
  std::string name;
  json effective;
  run_trace trace;
  double wall_ms = 0.0;
};

const char* status_string(run_status s) {
  switch (s) {
    case run_status::converged: return "converged";
    case run_status::horizon_reached: return "horizon_reached";
    case run_status::diverged: return "diverged";
  }
  return "unknown";
}

solver_run run_one_solver(const json& sc, const problem_bundle& prob, const vec& x0,
                          std::optional<std::size_t> horizon,
                          std::optional<double> grad_tol, bool snapshots) {
  solver_run out;
  out.name = require<std::string>(sc, "name", "solver");
  const auto t0 = std::chrono::steady_clock::now();

  if (out.name == "gd") {
    std::optional<double> step;
    if (sc.contains("step")) step = require<double>(sc, "step", "solver gd");
    out.trace = run_gd(prob.obj, x0, step, horizon, grad_tol, snapshots);
    out.effective = {{"name", "gd"}, {"step", out.trace.lambda_used}};
  } else if (out.name == "nagd") {
    if (!prob.obj.known_mu || !prob.obj.known_l) {
      throw input_error("solver nagd: curvature bounds unavailable for this problem");
    }
    const double mu = get_or<double>(sc, "mu", *prob.obj.known_mu);
    const double l = get_or<double>(sc, "l", *prob.obj.known_l);
    out.trace = run_nagd(prob.obj, x0, mu, l, horizon, grad_tol, snapshots);
    out.effective = {{"name", "nagd"}, {"mu", mu}, {"l", l}};
  } else if (out.name == "rmpe" || out.name == "rmpe5") {
    const auto k = get_or<std::size_t>(sc, "k", 5);
    out.trace = run_rmpe(prob.obj, x0, k, horizon, grad_tol, snapshots);
    out.effective = {{"name", out.name}, {"k", k}};
  } else if (out.name == "aa" || out.name == "aa_cheby") {
    solver_config cfg;
    cfg.m = get_or<std::size_t>(sc, "m", 5);
    if (sc.contains("lambda")) cfg.lambda = require<double>(sc, "lambda", "solver");
    cfg.rank_tol = get_or<double>(sc, "rank_tol", 0.0);
    cfg.grad_tol = grad_tol;
    // The CLI horizon budgets new iterates; the bootstrap consumes the first.
    if (horizon.has_value()) {
      if (*horizon < 1) throw input_error("horizon must be at least 1");
      cfg.horizon = *horizon - 1;
    }
    if (out.name == "aa_cheby") {
      if (!prob.obj.known_mu || !prob.obj.known_l) {
        throw input_error("solver aa_cheby: curvature bounds unavailable");
      }
      if (!horizon.has_value()) {
        throw input_error("solver aa_cheby: a horizon is required to size the schedule");
      }
      const double mu = get_or<double>(sc, "mu", *prob.obj.known_mu);
      const double l = get_or<double>(sc, "l", *prob.obj.known_l);
      const auto ordering_name = get_or<std::string>(sc, "ordering", "stable");
      schedule_order ord;
      if (ordering_name == "stable") {
        ord = schedule_order::stable;
      } else if (ordering_name == "natural") {
        ord = schedule_order::natural;
      } else {
        throw format_error("solver aa_cheby: unknown ordering '" + ordering_name + "'");
      }
      const std::size_t sched_len = std::max<std::size_t>(*horizon - 1, 1);
      cfg.mixing = chebyshev_mixing{make_beta_schedule(mu, l, sched_len), ord};
      out.trace = run_anderson(prob.obj, x0, cfg, snapshots);
      out.effective = {{"name", "aa_cheby"}, {"m", cfg.m},
                       {"lambda", out.trace.lambda_used}, {"mu", mu},
                       {"l", l},            {"ordering", ordering_name},
                       {"rank_tol", cfg.rank_tol}};
    } else {
      cfg.mixing = constant_mixing{get_or<double>(sc, "beta", 1.0)};
      out.trace = run_anderson(prob.obj, x0, cfg, snapshots);
      out.effective = {{"name", "aa"},
                       {"m", cfg.m},
                       {"lambda", out.trace.lambda_used},
                       {"beta", std::get<constant_mixing>(cfg.mixing).beta},
                       {"rank_tol", cfg.rank_tol}};
    }
  } else {
    throw format_error("unknown solver '" + out.name + "'");
  }

  const auto t1 = std::chrono::steady_clock::now();
  out.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

json summarize_run(const solver_run& run, std::optional<double> grad_tol,
                   const std::string& trace_file) {
  json entry;
  entry["name"] = run.name;
  entry["config"] = run.effective;
  entry["status"] = status_string(run.trace.status);
  entry["trace_file"] = trace_file;
  entry["wall_ms"] = run.wall_ms;
  entry["final_grad_norm"] =
      run.trace.rows.empty() ? json(nullptr) : json(run.trace.rows.back().grad_norm);
  if (grad_tol.has_value()) {
    json its = nullptr;
    for (const auto& row : run.trace.rows) {
      if (row.grad_norm <= *grad_tol) {
        its = row.t;
        break;
      }
    }
    entry["iterations_to_tol"] = its;
    entry["dnf"] = its.is_null();
  } else {
    entry["iterations_to_tol"] = nullptr;
    entry["dnf"] = false;
  }
  return entry;
}

const char* k_plot_stub = R"PY(#!/usr/bin/env python3
"""Renders plot_data.csv (long format: solver,iter,grad_norm) as gradient-norm
curves on a log axis. Matplotlib is optional; without it the script prints a
per-solver summary instead."""
import csv
import sys
from collections import defaultdict
from pathlib import Path

data_path = Path(__file__).resolve().parent / "plot_data.csv"
series = defaultdict(list)
with open(data_path, newline="") as fh:
    for row in csv.DictReader(fh):
        series[row["solver"]].append((int(row["iter"]), float(row["grad_norm"])))

try:
    import matplotlib.pyplot as plt
except ImportError:
    for name, points in series.items():
        print(f"{name}: {len(points)} points, final grad_norm {points[-1][1]:.3e}")
    sys.exit(0)

fig, ax = plt.subplots(figsize=(7, 4.5))
for name, points in sorted(series.items()):
    xs, ys = zip(*points)
    ax.semilogy(xs, ys, label=name)
ax.set_xlabel("iteration")
ax.set_ylabel("gradient norm")
ax.legend()
fig.tight_layout()
out = data_path.with_name("comparison.png")
fig.savefig(out, dpi=150)
print(f"wrote {out}")
)PY";

int cmd_compare(const std::string& config_path) {
  const json cfg = load_config(config_path);
  const auto seed_override = env_seed();
  problem_bundle prob = build_problem(cfg, seed_override);

  if (!cfg.contains("solvers") || !cfg.at("solvers").is_array() ||
      cfg.at("solvers").empty()) {
    throw format_error("config: 'solvers' must be a nonempty array");
  }

  std::optional<std::size_t> horizon;
  if (cfg.contains("horizon")) horizon = require<std::size_t>(cfg, "horizon", "config");
  std::optional<double> grad_tol;
  if (cfg.contains("grad_tol")) grad_tol = require<double>(cfg, "grad_tol", "config");
  if (!horizon.has_value() && !grad_tol.has_value()) {
    throw format_error("config: set 'horizon' or 'grad_tol' (or both)");
  }
  const bool snapshots = get_or<bool>(cfg, "snapshot_iterates", false);
  const fs::path out_dir = prepare_out_dir(cfg);

  json x0_echo;
  const vec x0 = build_x0(cfg, prob.dim, seed_override, x0_echo);

  json summary;
  summary["problem"] = prob.effective;
  if (prob.kappa.has_value()) summary["problem"]["kappa"] = *prob.kappa;
  summary["horizon"] = horizon.has_value() ? json(*horizon) : json(nullptr);
  summary["grad_tol"] = grad_tol.has_value() ? json(*grad_tol) : json(nullptr);
  json solver_entries = json::array();
  json effective_solvers = json::array();

  std::string plot_data = "solver,iter,grad_norm\n";
  std::vector<std::string> used_names;
  for (const auto& sc : cfg.at("solvers")) {
    solver_run run = run_one_solver(sc, prob, x0, horizon, grad_tol, snapshots);

    std::string base = sanitize_name(run.name);
    std::size_t repeats = 0;
    for (const auto& n : used_names) {
      if (n == base) ++repeats;
    }
    used_names.push_back(base);
    if (repeats > 0) base += "_" + std::to_string(repeats + 1);

    const std::string trace_file = "trace_" + base + ".csv";
    write_trace_csv((out_dir / trace_file).string(), run.trace);
    for (const auto& row : run.trace.rows) {
      plot_data += base + "," + std::to_string(row.t) + "," +
                   std::to_string(row.grad_norm);
      plot_data += '\n';
    }
    solver_entries.push_back(summarize_run(run, grad_tol, trace_file));
    effective_solvers.push_back(run.effective);

    std::cout << run.name << ": " << status_string(run.trace.status)
              << ", final grad norm "
              << (run.trace.rows.empty() ? 0.0 : run.trace.rows.back().grad_norm)
              << ", rows " << run.trace.rows.size() << "\n";
  }
  summary["solvers"] = solver_entries;

  json effective = cfg;
  effective["problem"] = prob.effective;
  effective["x0"] = x0_echo;
  effective["solvers"] = effective_solvers;
  effective["horizon"] = summary["horizon"];
  effective["grad_tol"] = summary["grad_tol"];
  effective["snapshot_iterates"] = snapshots;
  effective["out_dir"] = out_dir.string();
  if (seed_override.has_value()) effective["seed_override"] = *seed_override;

  write_text_file((out_dir / "summary.json").string(), summary.dump(2) + "\n");
  write_text_file((out_dir / "effective_config.json").string(), effective.dump(2) + "\n");
  write_text_file((out_dir / "plot_data.csv").string(), plot_data);
  write_text_file((out_dir / "plot.py").string(), k_plot_stub);
  std::cout << "summary written to " << (out_dir / "summary.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

int cmd_generate(std::size_t d, double mu, double l, std::uint64_t seed,
                 const std::string& out_path, bool btb, std::size_t rows) {
  const auto seed_override = env_seed();
  if (seed_override.has_value()) seed = *seed_override;
  quadratic_problem p = btb ? quadratic_generate_btb(d, rows == 0 ? 2 * d : rows, seed)
                            : quadratic_generate(d, mu, l, seed);
  save_quadratic(out_path, p);
  std::cout << "wrote " << out_path << " (d=" << d << ", kappa=" << p.l / p.mu
            << ")\n";
  return 0;
}

// ---------------------------------------------------------------------------
// guess
// ---------------------------------------------------------------------------

int cmd_guess(const std::string& config_path) {
  const json cfg = load_config(config_path);
  const auto seed_override = env_seed();
  problem_bundle prob = build_problem(cfg, seed_override);

  if (!cfg.contains("guess")) throw format_error("config: missing 'guess' section");
  const json& gc = cfg.at("guess");
  guess_config g;
  g.delta = require<double>(gc, "delta", "guess");
  g.b_range = require<double>(gc, "b_range", "guess");
  g.budget = require<std::size_t>(gc, "budget", "guess");
  g.m = get_or<std::size_t>(gc, "m", 5);
  const auto inner_name = get_or<std::string>(gc, "inner", "anderson_cheby");
  if (inner_name == "anderson_cheby") {
    g.inner = inner_solver::anderson_cheby;
  } else if (inner_name == "anderson") {
    g.inner = inner_solver::anderson;
  } else if (inner_name == "gd") {
    g.inner = inner_solver::gd;
  } else if (inner_name == "nagd") {
    g.inner = inner_solver::nagd;
  } else {
    throw format_error("guess: unknown inner solver '" + inner_name + "'");
  }

  const fs::path out_dir = prepare_out_dir(cfg);
  json x0_echo;
  const vec x0 = build_x0(cfg, prob.dim, seed_override, x0_echo);

  guess_trace gt = run_guessing(prob.obj, x0, g);
  write_trace_csv((out_dir / "guess_history.csv").string(), gt.history);
  write_text_file((out_dir / "guess_trace.json").string(), guess_trace_json(gt));

  // Counterpart: the same inner solver pinned to the misestimated bracket
  // (delta, b_range*delta) for the whole budget, from the same start.
  const double mu_fixed = g.delta;
  const double l_fixed = g.delta * g.b_range;
  run_trace fixed;
  switch (g.inner) {
    case inner_solver::anderson_cheby: {
      solver_config sc;
      sc.m = g.m;
      sc.lambda = 1.0;
      const std::size_t sched_len = std::max<std::size_t>(g.budget - 1, 1);
      sc.mixing = chebyshev_mixing{make_beta_schedule(mu_fixed, l_fixed, sched_len),
                                   schedule_order::stable};
      sc.horizon = g.budget - 1;
      fixed = run_anderson(prob.obj, x0, sc);
      break;
    }
    case inner_solver::anderson: {
      solver_config sc;
      sc.m = g.m;
      sc.lambda = 2.0 / (mu_fixed + l_fixed);
      sc.mixing = constant_mixing{1.0};
      sc.horizon = g.budget - 1;
      fixed = run_anderson(prob.obj, x0, sc);
      break;
    }
    case inner_solver::gd:
      fixed = run_gd(prob.obj, x0, 2.0 / (mu_fixed + l_fixed), g.budget, std::nullopt);
      break;
    case inner_solver::nagd:
      fixed = run_nagd(prob.obj, x0, mu_fixed, l_fixed, g.budget, std::nullopt);
      break;
  }
  write_trace_csv((out_dir / "fixed_history.csv").string(), fixed);

  json summary;
  summary["problem"] = prob.effective;
  summary["guess"] = {{"delta", g.delta},   {"b_range", g.b_range},
                      {"budget", g.budget}, {"inner", inner_name},
                      {"m", g.m}};
  json coverage = nullptr;
  if (prob.obj.known_mu && prob.obj.known_l) {
    const bool violated =
        !(g.delta <= *prob.obj.known_mu && *prob.obj.known_l <= g.delta * g.b_range);
    coverage = violated;
    if (violated) std::cout << "coverage violated\n";
  }
  summary["coverage_violated"] = coverage;
  if (prob.obj.known_mu && prob.obj.known_l) {
    auto witness =
        guess_grid_covers(g.delta, g.b_range, *prob.obj.known_mu, *prob.obj.known_l);
    summary["grid_witness"] =
        witness.has_value()
            ? json({{"i", witness->i}, {"j", witness->j}, {"kappa_i", witness->kappa_i}})
            : json(nullptr);
  }
  summary["with_guessing"] = {
      {"total_iterations", gt.total_iterations},
      {"final_grad_norm", gt.history.empty() ? 0.0 : gt.history.back().grad_norm},
      {"history_file", "guess_history.csv"}};
  summary["without_guessing"] = {
      {"iterations", fixed.rows.empty() ? 0 : fixed.rows.back().t},
      {"final_grad_norm", fixed.rows.empty() ? 0.0 : fixed.rows.back().grad_norm},
      {"history_file", "fixed_history.csv"},
      {"mu_fixed", mu_fixed},
      {"l_fixed", l_fixed}};

  json effective = cfg;
  effective["problem"] = prob.effective;
  effective["x0"] = x0_echo;
  effective["guess"] = summary["guess"];
  effective["out_dir"] = out_dir.string();
  if (seed_override.has_value()) effective["seed_override"] = *seed_override;

  write_text_file((out_dir / "summary.json").string(), summary.dump(2) + "\n");
  write_text_file((out_dir / "effective_config.json").string(), effective.dump(2) + "\n");
  std::cout << "guessing: " << gt.total_iterations << " iterations, final grad norm "
            << (gt.history.empty() ? 0.0 : gt.history.back().grad_norm) << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int cmd_verify(const std::string& config_path, std::string oracle_name) {
  const json cfg = load_config(config_path);
  const auto seed_override = env_seed();
  if (oracle_name.empty()) oracle_name = get_or<std::string>(cfg, "oracle", "");
  const std::vector<std::string> known = {"recursion", "gmres", "cheby_bound",
                                          "contraction", "general_bound"};
  bool ok = false;
  for (const auto& k : known) ok = ok || k == oracle_name;
  if (!ok) throw format_error("unknown oracle '" + oracle_name + "'");

  problem_bundle prob = build_problem(cfg, seed_override);
  const fs::path out_dir = prepare_out_dir(cfg);
  json x0_echo;
  const vec x0 = build_x0(cfg, prob.dim, seed_override, x0_echo);
  const json params = cfg.contains("params") ? cfg.at("params") : json::object();

  auto need_quadratic = [&]() -> const quadratic_problem& {
    if (!prob.quad.has_value()) {
      throw input_error("oracle '" + oracle_name + "' needs a quadratic problem");
    }
    return *prob.quad;
  };

  oracle_report rep;
  bool informational = false;

  if (oracle_name == "recursion") {
    const auto& p = need_quadratic();
    const auto m = get_or<std::size_t>(params, "m", 3);
    const auto horizon = get_or<std::size_t>(params, "horizon", 30);
    rep = check_residual_recursion(p, x0, m, make_beta_schedule(p.mu, p.l, horizon),
                                   horizon);
  } else if (oracle_name == "gmres") {
    const auto& p = need_quadratic();
    const auto horizon =
        get_or<std::size_t>(params, "horizon", std::min<std::size_t>(prob.dim, 20));
    rep = check_gmres_equivalence(p, horizon);
  } else if (oracle_name == "cheby_bound") {
    const auto& p = need_quadratic();
    const double kappa = p.l / p.mu;
    const std::size_t default_T = static_cast<std::size_t>(
        std::ceil(2.0 * (std::sqrt(kappa) + 1.0) * std::log(2e6)));
    const auto horizon = get_or<std::size_t>(params, "horizon", default_T);
    const auto m = get_or<std::size_t>(params, "m", 0);
    solver_config sc;
    sc.m = m;
    sc.lambda = 1.0;
    sc.mixing = chebyshev_mixing{make_beta_schedule(p.mu, p.l, horizon),
                                 schedule_order::stable};
    sc.horizon = horizon;
    run_trace trace = run_anderson(prob.obj, x0, sc);
    rep = check_cheby_bound(p, trace);
    informational = m > 0;
  } else if (oracle_name == "contraction") {
    const auto& p = need_quadratic();
    const auto horizon = get_or<std::size_t>(params, "horizon", 200);
    const auto m = get_or<std::size_t>(params, "m", 0);
    solver_config sc;
    sc.m = m;
    sc.lambda = 2.0 / (p.mu + p.l);
    sc.mixing = constant_mixing{1.0};
    sc.horizon = horizon;
    run_trace trace = run_anderson(prob.obj, x0, sc);
    rep = check_linear_contraction(p, trace);
  } else { // general_bound
    if (!prob.obj.known_mu || !prob.obj.known_l) {
      throw input_error("general_bound: curvature bounds unavailable");
    }
    const auto horizon = get_or<std::size_t>(params, "horizon", 100);
    const auto m = get_or<std::size_t>(params, "m", 3);
    const double beta = get_or<double>(params, "beta", 1.0);
    solver_config sc;
    sc.m = m;
    sc.lambda = 2.0 / (*prob.obj.known_mu + *prob.obj.known_l);
    sc.mixing = constant_mixing{beta};
    sc.horizon = horizon;
    run_trace trace = run_anderson(prob.obj, x0, sc, /*snapshot_iterates=*/true);
    general_bound_params gp;
    gp.gamma = get_or<double>(params, "gamma", 0.0);
    gp.mu = *prob.obj.known_mu;
    gp.l = *prob.obj.known_l;
    gp.beta = beta;
    for (const auto& row : trace.rows) gp.kappa_tilde = std::max(gp.kappa_tilde, row.kappa_tilde);
    rep = check_general_bound(trace, gp, m);
    informational = true;
  }

  const std::string report_file = "report_" + sanitize_name(oracle_name) + ".json";
  write_text_file((out_dir / report_file).string(), oracle_report_json(rep));
  std::cout << rep.name << ": " << (rep.pass ? "PASS" : "FAIL")
            << (informational ? " (informational)" : "") << ", report "
            << (out_dir / report_file).string() << "\n";
  if (informational) return 0;
  return rep.pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed-point acceleration workbench"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Write a quadratic instance to JSON");
  std::size_t g_d = 2;
  double g_mu = 1.0, g_l = 10.0;
  std::uint64_t g_seed = 0;
  std::string g_out = "problem.json";
  bool g_btb = false;
  std::size_t g_rows = 0;
  gen->add_option("-d,--dim", g_d, "dimension (>= 2)")->required();
  gen->add_option("--mu", g_mu, "smallest eigenvalue");
  gen->add_option("--l", g_l, "largest eigenvalue");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("-o,--out", g_out, "output path")->required();
  gen->add_flag("--btb", g_btb, "sample-covariance instance with measured spectrum");
  gen->add_option("--rows", g_rows, "sample count for --btb (default 2d)");

  std::string compare_config, guess_config_path, verify_config, verify_oracle;
  auto* cmp = app.add_subcommand("compare", "Run configured solvers from one start");
  cmp->add_option("-c,--config", compare_config, "JSON config path")->required();
  auto* gss = app.add_subcommand("guess", "Run the parameter-guessing search");
  gss->add_option("-c,--config", guess_config_path, "JSON config path")->required();
  auto* ver = app.add_subcommand("verify", "Run a bound/identity oracle");
  ver->add_option("-c,--config", verify_config, "JSON config path")->required();
  ver->add_option("--oracle", verify_oracle,
                  "recursion|gmres|cheby_bound|contraction|general_bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2; // usage errors map to 2; help/version to 0
  }

  try {
    if (gen->parsed()) return cmd_generate(g_d, g_mu, g_l, g_seed, g_out, g_btb, g_rows);
    if (cmp->parsed()) return cmd_compare(compare_config);
    if (gss->parsed()) return cmd_guess(guess_config_path);
    if (ver->parsed()) return cmd_verify(verify_config, verify_oracle);
  } catch (const input_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const format_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
