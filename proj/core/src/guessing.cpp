#include "accel/guessing.hpp"

#include <cmath>
#include <limits>

#include "accel/chebyshev.hpp"
#include "accel/errors.hpp"

namespace accel {

namespace {

run_trace inner_run(const objective& obj, const vec& x, inner_solver inner,
                    std::size_t t_i, double mu_i, double l_i, std::size_t m) {
  switch (inner) {
    case inner_solver::anderson_cheby: {
      solver_config cfg;
      cfg.m = m;
      cfg.lambda = 1.0;
      // Fresh schedule sized to this run; t_i counts new iterates, of which
      // the first is the bootstrap step.
      cfg.mixing = chebyshev_mixing{make_beta_schedule(mu_i, l_i, t_i),
                                    schedule_order::stable};
      cfg.horizon = t_i - 1;
      return run_anderson(obj, x, cfg);
    }
    case inner_solver::anderson: {
      solver_config cfg;
      cfg.m = m;
      cfg.lambda = 2.0 / (mu_i + l_i);
      cfg.mixing = constant_mixing{1.0};
      cfg.horizon = t_i - 1;
      return run_anderson(obj, x, cfg);
    }
    case inner_solver::gd:
      return run_gd(obj, x, 2.0 / (mu_i + l_i), t_i, std::nullopt);
    case inner_solver::nagd:
      return run_nagd(obj, x, mu_i, l_i, t_i, std::nullopt);
  }
  throw input_error("run_guessing: unknown inner solver");
}

} // namespace

guess_trace run_guessing(const objective& obj, const vec& x0,
                         const guess_config& cfg) {
  if (!(cfg.delta > 0.0)) throw input_error("run_guessing: delta must be positive");
  if (!(cfg.b_range > 1.0)) throw input_error("run_guessing: b_range must exceed 1");
  if (cfg.budget < 1) throw input_error("run_guessing: budget must be at least 1");
  if (!obj.eval_fn) throw input_error("run_guessing: objective has no evaluator");
  if (x0.size() != obj.dim) throw input_error("run_guessing: dimension mismatch");

  guess_trace trace;
  const double ln_b = std::log(cfg.b_range);
  trace.j_max = static_cast<std::size_t>(std::ceil(ln_b));
  trace.i_max = trace.j_max + 2;

  auto start = obj.eval_fn(x0);
  const double gn0 = nrm2(start.second);
  if (!std::isfinite(start.first) || !std::isfinite(gn0) || !all_finite(start.second)) {
    throw numeric_error("run_guessing: non-finite gradient at the start point");
  }
  trace_row row0;
  row0.t = 0;
  row0.grad_norm = gn0;
  row0.f = start.first;
  trace.history.push_back(row0);

  vec x = x0;
  vec x_prev = x0;       // snapshot variable of the restore guard
  double gn_x = gn0;
  double gn_prev = gn0;
  std::size_t t = 0;

  for (std::size_t i = 1; i <= trace.i_max; ++i) {
    const double kappa_i = std::exp(static_cast<double>(i) + 2.0);
    const double q_i = (std::sqrt(kappa_i) - 1.0) / (std::sqrt(kappa_i) + 1.0);
    for (std::size_t j = 1; j <= trace.j_max; ++j) {
      const double mu_i = std::exp(static_cast<double>(j)) * cfg.delta;
      const double l_i = mu_i * kappa_i;
      std::size_t t_i = 1;
      bool ratio_held = true;
      do {
        t_i = static_cast<std::size_t>(std::floor(std::exp(1.0) * double(t_i)));
        if (t + t_i > cfg.budget) break;

        x_prev = x;
        gn_prev = gn_x;

        run_trace run = inner_run(obj, x, cfg.inner, t_i, mu_i, l_i, cfg.m);
        for (std::size_t r = 1; r < run.rows.size(); ++r) {
          trace_row row = run.rows[r];
          row.t = trace.history.size();
          row.x.reset();
          trace.history.push_back(std::move(row));
        }

        guess_inner_record rec;
        rec.i = i;
        rec.j = j;
        rec.kappa_i = kappa_i;
        rec.mu_i = mu_i;
        rec.l_i = l_i;
        rec.t_i = t_i;
        rec.t_before = t;
        rec.grad_before = gn_prev;

        t += t_i; // charged in full even when the run stopped early
        x = run.final_x;
        gn_x = run.rows.back().grad_norm;
        const double ratio_gn = run.status == run_status::diverged
                                    ? std::numeric_limits<double>::infinity()
                                    : gn_x;
        rec.grad_after = ratio_gn;
        ratio_held =
            gn_prev > 0.0 && ratio_gn / gn_prev <= 2.0 * std::pow(q_i, double(t_i));
        rec.ratio_held = ratio_held;
        trace.runs.push_back(rec);
      } while (ratio_held);

      guess_pair_record guard;
      guard.i = i;
      guard.j = j;
      if (!(gn_x <= gn_prev)) { // increase or non-finite: restore the snapshot
        x = x_prev;
        gn_x = gn_prev;
        guard.rolled_back = true;
      }
      guard.retained_grad_norm = gn_x;
      trace.guards.push_back(guard);
    }
  }

  trace.total_iterations = t;
  trace.final_x = x;
  return trace;
}

std::optional<coverage_witness> guess_grid_covers(double delta, double b_range,
                                                  double mu, double l) {
  if (!(delta > 0.0) || !(b_range > 1.0) || !(mu > 0.0) || !(l >= mu)) {
    return std::nullopt;
  }
  const std::size_t j_max = static_cast<std::size_t>(std::ceil(std::log(b_range)));
  const std::size_t i_max = j_max + 2;
  std::optional<coverage_witness> best;
  // The structural check admits j = 0 (the bracket's own lower endpoint delta)
  // so that a bracket with delta <= mu <= l <= b_range*delta always yields a
  // covering pair; the search loop itself starts at j = 1.
  for (std::size_t i = 1; i <= i_max; ++i) {
    const double kappa_i = std::exp(static_cast<double>(i) + 2.0);
    for (std::size_t j = 0; j <= j_max; ++j) {
      const double mu_i = std::exp(static_cast<double>(j)) * delta;
      const double l_i = mu_i * kappa_i;
      if (mu_i <= mu && l_i >= l) {
        if (!best.has_value() || kappa_i < best->kappa_i) {
          best = coverage_witness{i, j, kappa_i};
        }
      }
    }
  }
  return best;
}

} // namespace accel
