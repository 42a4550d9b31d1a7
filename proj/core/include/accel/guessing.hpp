#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "accel/problems.hpp"
#include "accel/solvers.hpp"

namespace accel {

enum class inner_solver { anderson_cheby, anderson, gd, nagd };

struct guess_config {
  double delta = 0.0;   // spectrum floor guess, > 0
  double b_range = 0.0; // spectrum assumed inside [delta, b_range*delta], > 1
  std::size_t budget = 0; // total iteration budget, >= 1
  inner_solver inner = inner_solver::anderson_cheby;
  std::size_t m = 5; // window for the accelerated inner solvers
};

// One inner run at guesses (mu_i, l_i): the run length t_i is charged against
// the budget in full even when the run stops early.
struct guess_inner_record {
  std::size_t i = 0;
  std::size_t j = 0;
  double kappa_i = 0.0;
  double mu_i = 0.0;
  double l_i = 0.0;
  std::size_t t_i = 0;
  std::size_t t_before = 0;
  double grad_before = 0.0;
  double grad_after = 0.0; // +inf when the run diverged
  bool ratio_held = false; // doubling condition after this run
};

// Outcome of the keep-or-restore guard closing each (i, j) pair.
struct guess_pair_record {
  std::size_t i = 0;
  std::size_t j = 0;
  bool rolled_back = false;
  double retained_grad_norm = 0.0;
};

struct guess_trace {
  std::vector<guess_inner_record> runs;
  std::vector<guess_pair_record> guards;
  std::vector<trace_row> history; // row 0 = start, then every produced iterate
  std::size_t total_iterations = 0; // budget consumed (charged run lengths)
  vec final_x;
  std::size_t i_max = 0; // outer guess range used: i = 1..i_max
  std::size_t j_max = 0; // inner guess range used: j = 1..j_max
};

// Doubling search: outer guesses kappa_i = e^{i+2} (i up to ceil(ln B)+2),
// inner guesses mu_i = e^j * delta (j up to ceil(ln B)), run lengths grow
// t_i <- floor(e * t_i) from 1 while the post-run gradient ratio stays below
// 2 ((sqrt(kappa_i)-1)/(sqrt(kappa_i)+1))^{t_i}; each run is pre-checked
// against the remaining budget. A guard closes every (i, j) pair, restoring
// the previous iterate when the gradient norm increased (non-finite runs are
// always restored).
guess_trace run_guessing(const objective& obj, const vec& x0,
                         const guess_config& cfg);

struct coverage_witness {
  std::size_t i = 0;
  std::size_t j = 0;
  double kappa_i = 0.0;
};

// Structural coverage of the guess grid: the smallest-kappa pair (i, j) with
// [mu, l] inside [mu_i, l_i], if one exists. Independent of any run.
std::optional<coverage_witness> guess_grid_covers(double delta, double b_range,
                                                  double mu, double l);

} // namespace accel
