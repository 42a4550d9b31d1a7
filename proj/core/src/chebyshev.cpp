#include "accel/chebyshev.hpp"

#include <cmath>
#include <numbers>

#include "accel/errors.hpp"

namespace accel {

double cheb_eval(std::size_t degree, double x) {
  if (degree == 0) return 1.0;
  double pm = 1.0, p = x;
  for (std::size_t k = 2; k <= degree; ++k) {
    double next = 2.0 * x * p - pm;
    pm = p;
    p = next;
  }
  return p;
}

std::vector<double> cheb_roots(std::size_t degree) {
  if (degree == 0) throw input_error("cheb_roots: degree 0 has no roots");
  std::vector<double> roots(degree);
  for (std::size_t i = 1; i <= degree; ++i)
    roots[i - 1] = std::cos((2.0 * static_cast<double>(i) - 1.0) *
                            std::numbers::pi / (2.0 * static_cast<double>(degree)));
  return roots;
}

beta_schedule make_beta_schedule(double mu, double l, std::size_t horizon) {
  if (!(mu > 0.0) || l < mu)
    throw input_error("make_beta_schedule: need 0 < mu <= l");
  if (horizon == 0) throw input_error("make_beta_schedule: horizon must be >= 1");
  beta_schedule s;
  s.mu = mu;
  s.l = l;
  s.horizon = horizon;
  s.betas.resize(horizon);
  const double mid = (l + mu) / 2.0, half = (l - mu) / 2.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    double c = std::cos((2.0 * static_cast<double>(t) - 1.0) * std::numbers::pi /
                        (2.0 * static_cast<double>(horizon)));
    s.betas[t - 1] = 1.0 / (mid + half * c);
  }
  return s;
}

namespace {

void build_order(std::size_t n, std::vector<std::size_t>& out) {
  // Recursive interleaving: each index s of the half-size order pairs with
  // its mirror n-1-s, so large and small damping factors alternate. Odd n
  // pairs around the middle index and appends it last.
  if (n == 0) return;
  if (n == 1) {
    out.push_back(0);
    return;
  }
  std::vector<std::size_t> sub;
  build_order(n / 2, sub);
  out.reserve(out.size() + n);
  for (std::size_t s : sub) {
    out.push_back(s);
    out.push_back(n - 1 - s);
  }
  if (n % 2 == 1) out.push_back(n / 2);
}

} // namespace

std::vector<std::size_t> stable_order(std::size_t horizon) {
  std::vector<std::size_t> order;
  build_order(horizon, order);
  return order;
}

double q_factor(double kappa) {
  double rt = std::sqrt(kappa);
  return (rt - 1.0) / (rt + 1.0);
}

} // namespace accel
