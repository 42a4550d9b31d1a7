#include "accel/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>

#include "accel/errors.hpp"
#include "accel/qr.hpp"

namespace accel {

namespace {

void finalize(oracle_report& rep) {
  double min_slack = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.records) min_slack = std::min(min_slack, r.slack);
  rep.pass = rep.records.empty() || min_slack >= -rep.tolerance;
}

void add_record(oracle_report& rep, std::size_t t, double lhs, double rhs) {
  rep.records.push_back({t, lhs, rhs, rhs - lhs});
}

std::string format_note(const char* fmt, ...) {
  char buf[256];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

vec residual_of(const quadratic_problem& p, const vec& x) {
  // lambda = 1 residual: F = -(A x - b) = b - A x.
  vec f = matvec(p.a, x);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = p.b[i] - f[i];
  return f;
}

} // namespace

oracle_report check_residual_recursion(const quadratic_problem& p, const vec& x0,
                                       std::size_t m, const beta_schedule& betas,
                                       std::size_t horizon) {
  oracle_report rep;
  rep.name = "residual_recursion";
  rep.tolerance = 0.0;

  objective obj = make_objective(p);
  solver_config cfg;
  cfg.m = m;
  cfg.lambda = 1.0;
  cfg.mixing = chebyshev_mixing{betas, schedule_order::stable};
  cfg.horizon = horizon;
  run_trace trace = run_anderson(obj, x0, cfg, /*snapshot_iterates=*/true);

  if (trace.rows.size() < 2) {
    rep.notes.push_back("run too short for any recursion step");
    finalize(rep);
    return rep;
  }

  // Residuals recomputed directly from the snapshots: an oracle independent
  // of the solver's internal window state.
  std::vector<vec> f;
  f.reserve(trace.rows.size());
  for (const auto& row : trace.rows) f.push_back(residual_of(p, *row.x));

  const double f1_norm = nrm2(f[1]);
  const double bound = 1e-9 * f1_norm;
  double worst = 0.0;

  for (std::size_t t = 1; t + 1 < trace.rows.size(); ++t) {
    const std::size_t m_t = std::min(m, t);
    dense_matrix b(f[t].size(), m_t);
    for (std::size_t i = 1; i <= m_t; ++i) {
      for (std::size_t r = 0; r < f[t].size(); ++r) {
        b(r, i - 1) = f[t][r] - f[t - i][r];
      }
    }
    vec proj = project_complement(b, f[t]);
    // (I - beta_t A) proj, with beta_t as the step actually used.
    const double beta_t = trace.rows[t + 1].beta_used;
    vec pred = proj;
    vec aproj = matvec(p.a, proj);
    axpy(-beta_t, aproj, pred);

    vec diff = f[t + 1];
    axpy(-1.0, pred, diff);
    const double disc = nrm2(diff);
    worst = std::max(worst, disc);
    add_record(rep, t, disc, bound);
  }
  rep.notes.push_back(format_note("max discrepancy %.3e against %.3e", worst, bound));
  finalize(rep);
  return rep;
}

oracle_report check_gmres_equivalence(const quadratic_problem& p, std::size_t horizon) {
  oracle_report rep;
  rep.name = "gmres_equivalence";
  rep.tolerance = 0.0;

  const std::size_t d = p.b.size();
  const std::size_t steps = std::min(horizon, d);
  if (steps < horizon) {
    rep.notes.push_back(format_note("horizon clamped to the dimension %zu", d));
  }
  const vec x0(d, 0.0);

  objective obj = make_objective(p);
  solver_config cfg;
  cfg.m = steps; // full window over the checked range
  cfg.lambda = 1.0;
  cfg.mixing = constant_mixing{1.0};
  cfg.horizon = steps;
  run_trace aa = run_anderson(obj, x0, cfg, /*snapshot_iterates=*/true);

  std::vector<vec> krylov = gmres_solve(p.a, p.b, x0, steps);

  std::vector<double> res_norms;
  res_norms.reserve(krylov.size());
  for (const auto& xk : krylov) res_norms.push_back(nrm2(residual_of(p, xk)));
  const double stagnation_floor = 100.0 * std::numeric_limits<double>::epsilon() *
                                  std::max(res_norms[0], 1e-300);

  std::size_t excluded = 0;
  for (std::size_t t = 0; t + 1 < krylov.size(); ++t) {
    // The identity needs strictly decreasing residuals through step t and a
    // residual meaningfully above rounding noise.
    bool admissible = res_norms[t] > stagnation_floor;
    for (std::size_t i = 1; i <= t && admissible; ++i) {
      admissible = res_norms[i] < res_norms[i - 1] && res_norms[i] > 0.0;
    }
    if (!admissible || t + 1 >= aa.rows.size()) {
      ++excluded;
      continue;
    }
    vec g_of_kry = krylov[t];
    axpy(1.0, residual_of(p, krylov[t]), g_of_kry); // G(x) = x + F(x)
    vec diff = *aa.rows[t + 1].x;
    axpy(-1.0, g_of_kry, diff);
    const double lhs = nrm2(diff);
    const double rhs = 1e-8 * (1.0 + nrm2(krylov[t]));
    add_record(rep, t, lhs, rhs);
  }
  if (excluded > 0) {
    rep.notes.push_back(
        format_note("%zu step(s) excluded (stagnation or converged residual)", excluded));
  }
  finalize(rep);
  return rep;
}

oracle_report check_cheby_bound(const quadratic_problem& p, const run_trace& trace) {
  oracle_report rep;
  rep.name = "cheby_bound";

  if (trace.rows.size() < 3) throw input_error("check_cheby_bound: trace too short");
  if (std::abs(trace.lambda_used - 1.0) > 1e-12) {
    throw input_error("check_cheby_bound: trace was not produced with lambda = 1");
  }
  const std::size_t horizon = trace.rows.size() - 2; // mixing steps recorded

  // The damping values used must match the schedule this problem prescribes;
  // consumption order is free (stable reorderings included), so compare as
  // multisets.
  beta_schedule expected = make_beta_schedule(p.mu, p.l, horizon);
  std::vector<double> used;
  for (std::size_t t = 2; t < trace.rows.size(); ++t) used.push_back(trace.rows[t].beta_used);
  std::vector<double> want = expected.betas;
  std::sort(used.begin(), used.end());
  std::sort(want.begin(), want.end());
  for (std::size_t i = 0; i < want.size(); ++i) {
    if (std::abs(used[i] - want[i]) > 1e-12 * std::abs(want[i])) {
      throw input_error("check_cheby_bound: trace damping does not match the schedule");
    }
  }

  const double kappa = p.l / p.mu;
  const double q = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const double g1 = trace.rows[1].grad_norm;
  const double lhs = trace.rows[horizon + 1].grad_norm;
  const double rhs = 2.0 * std::pow(q, double(horizon) / 2.0) * g1;
  rep.tolerance = 1e-9 * rhs;
  add_record(rep, horizon, lhs, rhs);

  for (std::size_t t = 1; t <= horizon; ++t) {
    rep.notes.push_back(format_note("profile t=%zu grad=%.6e envelope=%.6e", t,
                                    trace.rows[t + 1].grad_norm,
                                    2.0 * std::pow(q, double(t) / 2.0) * g1));
  }
  if (trace.window_m > 0) {
    rep.notes.push_back(
        "informational: window > 0, the bound's window hypothesis is not machine-checked");
  }
  finalize(rep);
  return rep;
}

oracle_report check_linear_contraction(const quadratic_problem& p,
                                       const run_trace& trace) {
  oracle_report rep;
  rep.name = "linear_contraction";
  rep.tolerance = 0.0;

  if (trace.rows.size() < 2) throw input_error("check_linear_contraction: trace too short");
  const double lam_expected = 2.0 / (p.mu + p.l);
  if (std::abs(trace.lambda_used - lam_expected) > 1e-12 * lam_expected) {
    throw input_error("check_linear_contraction: trace step is not 2/(l+mu)");
  }
  for (std::size_t t = 1; t < trace.rows.size(); ++t) {
    if (trace.rows[t].beta_used != 1.0) {
      throw input_error("check_linear_contraction: trace was not produced with beta = 1");
    }
  }

  const double factor = 1.0 - 2.0 * p.mu / (p.l + p.mu);
  const double g1 = trace.rows[1].grad_norm;
  for (std::size_t t = 0; t + 1 < trace.rows.size(); ++t) {
    const double lhs = trace.rows[t + 1].grad_norm;
    const double rhs = factor * trace.rows[t].grad_norm + 1e-12 * g1;
    add_record(rep, t, lhs, rhs);
  }
  finalize(rep);
  return rep;
}

oracle_report check_general_bound(const run_trace& trace,
                                  const general_bound_params& params,
                                  std::size_t m) {
  oracle_report rep;
  rep.name = "general_bound";
  rep.tolerance = 0.0;

  if (trace.rows.size() < 2) throw input_error("check_general_bound: trace too short");
  for (const auto& row : trace.rows) {
    if (!row.x.has_value()) {
      throw input_error("check_general_bound: trace lacks iterate snapshots");
    }
  }

  const double denom = (params.l + params.mu) * (params.l + params.mu);
  const double kt = params.kappa_tilde;
  const double c1 = 3.0 * kt * kt * params.gamma * double(m) / denom;
  const double c2 = 2.0 * kt * params.beta * params.gamma * std::sqrt(double(m)) / denom;
  const double c3 = params.beta * 2.0 * params.mu / (params.l + params.mu);
  rep.notes.push_back(format_note("c1=%.6e c2=%.6e c3=%.6e", c1, c2, c3));
  rep.notes.push_back("informational: assumption set not machine-checkable");

  for (std::size_t t = 0; t + 1 < trace.rows.size(); ++t) {
    const std::size_t m_t = std::min(m, t);
    double delta_t = 0.0;
    const vec& xt = *trace.rows[t].x;
    for (std::size_t i = 1; i <= m_t; ++i) {
      vec diff = xt;
      axpy(-1.0, *trace.rows[t - i].x, diff);
      delta_t = std::max(delta_t, nrm2(diff));
    }
    const double gt = trace.rows[t].grad_norm;
    const double lhs = trace.rows[t + 1].grad_norm;
    const double rhs = c1 * delta_t * delta_t + c2 * delta_t * gt + (1.0 - c3) * gt;
    add_record(rep, t, lhs, rhs);
  }
  finalize(rep);
  return rep;
}

} // namespace accel
