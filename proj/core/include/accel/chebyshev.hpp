#pragma once

#include <cstddef>
#include <vector>

namespace accel {

// Mixing-parameter schedule over a spectrum bound [mu, l]:
// betas[t-1] = 1 / ((l+mu)/2 + (l-mu)/2 * cos((2t-1) pi / (2T))), t = 1..T.
// Stored in natural index order; consumers may permute application order.
struct beta_schedule {
  double mu = 0.0;
  double l = 0.0;
  std::size_t horizon = 0;
  std::vector<double> betas;
};

// First-kind Chebyshev polynomial P_degree(x) by three-term recurrence.
double cheb_eval(std::size_t degree, double x);

// Roots cos((2i-1) pi / (2 degree)), i = 1..degree, descending.
std::vector<double> cheb_roots(std::size_t degree);

beta_schedule make_beta_schedule(double mu, double l, std::size_t horizon);

// Permutation of {0..T-1} giving a rounding-stable application order for
// the schedule's first-order factors. The natural order lets intermediate
// products swell by factors exponential in T before late terms cancel
// them, amplifying rounding noise the same way; this interleaving keeps
// every prefix product moderate.
std::vector<std::size_t> stable_order(std::size_t horizon);

// (sqrt(kappa)-1)/(sqrt(kappa)+1)
double q_factor(double kappa);

} // namespace accel
