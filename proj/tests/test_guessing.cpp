#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "accel/errors.hpp"
#include "accel/guessing.hpp"
#include "accel/problems.hpp"
#include "test_support.hpp"

using namespace accel;
using test_support::random_vec;

namespace {

guess_trace run_small(std::size_t budget, inner_solver inner = inner_solver::anderson_cheby) {
  quadratic_problem p = quadratic_generate(12, 1.0, 10.0, 2);
  objective obj = make_objective(p);
  guess_config cfg;
  cfg.delta = 0.5;
  cfg.b_range = 40.0;
  cfg.budget = budget;
  cfg.inner = inner;
  cfg.m = 5;
  return run_guessing(obj, random_vec(12, 7), cfg);
}

} // namespace

TEST_SUITE("guessing") {

TEST_CASE("configuration validation") {
  quadratic_problem p = quadratic_generate(4, 1.0, 4.0, 1);
  objective obj = make_objective(p);
  vec x0(4, 1.0);

  guess_config cfg;
  cfg.delta = 0.0;
  cfg.b_range = 10.0;
  cfg.budget = 10;
  CHECK_THROWS_AS(run_guessing(obj, x0, cfg), input_error);
  cfg.delta = 0.5;
  cfg.b_range = 1.0;
  CHECK_THROWS_AS(run_guessing(obj, x0, cfg), input_error);
  cfg.b_range = 10.0;
  cfg.budget = 0;
  CHECK_THROWS_AS(run_guessing(obj, x0, cfg), input_error);
  cfg.budget = 10;
  CHECK_THROWS_AS(run_guessing(obj, vec(3, 1.0), cfg), input_error);
}

TEST_CASE("grid ranges follow the bracket width") {
  guess_trace t40 = run_small(50);
  CHECK(t40.j_max == 4); // ceil(ln 40)
  CHECK(t40.i_max == 6);

  quadratic_problem p = quadratic_generate(4, 1.0, 4.0, 1);
  objective obj = make_objective(p);
  guess_config cfg;
  cfg.delta = 1e-3;
  cfg.b_range = 1000.0;
  cfg.budget = 3;
  guess_trace t1000 = run_guessing(obj, vec(4, 1.0), cfg);
  CHECK(t1000.j_max == 7); // ceil(ln 1000)
  CHECK(t1000.i_max == 9);
}

TEST_CASE("outer guesses walk an exponential ladder of condition numbers") {
  guess_trace tr = run_small(4000);
  REQUIRE(!tr.runs.empty());
  bool saw_i2 = false;
  for (const guess_inner_record& rec : tr.runs) {
    CHECK(rec.kappa_i ==
          doctest::Approx(std::exp(double(rec.i) + 2.0)).epsilon(1e-14));
    CHECK(rec.mu_i ==
          doctest::Approx(std::exp(double(rec.j)) * 0.5).epsilon(1e-14));
    CHECK(rec.l_i == doctest::Approx(rec.mu_i * rec.kappa_i).epsilon(1e-14));
    if (rec.i == 2) saw_i2 = true;
  }
  CHECK(tr.runs.front().kappa_i == doctest::Approx(20.085536923187668).epsilon(1e-14));
  if (saw_i2) {
    for (const guess_inner_record& rec : tr.runs) {
      if (rec.i == 2) {
        CHECK(rec.kappa_i == doctest::Approx(54.598150033144236).epsilon(1e-14));
        break;
      }
    }
  }
}

TEST_CASE("run lengths inside a pair grow by factor e, floored") {
  guess_trace tr = run_small(4000);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> next_len;
  std::size_t charged = 0;
  for (const guess_inner_record& rec : tr.runs) {
    auto key = std::make_pair(rec.i, rec.j);
    auto it = next_len.find(key);
    std::size_t expected;
    if (it == next_len.end()) {
      expected = 2; // floor(e * 1)
    } else {
      expected = static_cast<std::size_t>(std::floor(std::exp(1.0) * double(it->second)));
    }
    CHECK(rec.t_i == expected);
    next_len[key] = expected;

    CHECK(rec.t_before == charged);
    charged += rec.t_i;
  }
  CHECK(charged == tr.total_iterations);
  CHECK(tr.total_iterations <= 4000);
}

TEST_CASE("tiny budgets stay valid") {
  guess_trace one = run_small(1);
  CHECK(one.runs.empty());
  CHECK(one.total_iterations == 0);
  CHECK(one.history.size() == 1);
  CHECK(one.history[0].t == 0);
  CHECK(one.guards.size() == one.i_max * one.j_max);

  guess_trace two = run_small(2);
  REQUIRE(two.runs.size() == 1);
  CHECK(two.runs[0].t_i == 2);
  CHECK(two.total_iterations == 2);
}

TEST_CASE("history is renumbered consecutively and stays finite") {
  guess_trace tr = run_small(600);
  REQUIRE(tr.history.size() >= 2);
  for (std::size_t k = 0; k < tr.history.size(); ++k) {
    CHECK(tr.history[k].t == k);
    CHECK(std::isfinite(tr.history[k].grad_norm));
    CHECK_FALSE(tr.history[k].x.has_value());
  }
  // charged lengths can exceed produced rows (early inner stops), never trail
  CHECK(tr.history.size() - 1 <= tr.total_iterations);
}

TEST_CASE("the guard never keeps an iterate worse than its snapshot") {
  guess_trace tr = run_small(2500);
  REQUIRE(!tr.guards.empty());
  CHECK(tr.guards.size() == tr.i_max * tr.j_max);
  for (const guess_pair_record& g : tr.guards) {
    // last run of this pair, if any
    const guess_inner_record* last = nullptr;
    for (const guess_inner_record& rec : tr.runs) {
      if (rec.i == g.i && rec.j == g.j) last = &rec;
    }
    if (last != nullptr) {
      CHECK(g.retained_grad_norm <= last->grad_before * (1.0 + 1e-12));
      if (!g.rolled_back && std::isfinite(last->grad_after)) {
        CHECK(g.retained_grad_norm == last->grad_after);
      }
    }
    CHECK(std::isfinite(g.retained_grad_norm));
  }
}

TEST_CASE("a generous budget solves a well-bracketed quadratic") {
  quadratic_problem p = quadratic_generate(30, 1.0, 10.0, 2);
  objective obj = make_objective(p);
  vec x0 = random_vec(30, 7);
  const double gn0 = nrm2(obj.grad_fn(x0));

  guess_config cfg;
  cfg.delta = 0.5;
  cfg.b_range = 40.0;
  cfg.budget = 5000;
  guess_trace tr = run_guessing(obj, x0, cfg);
  const double gn_final = nrm2(obj.grad_fn(tr.final_x));
  CHECK(gn_final <= gn0);
  CHECK(gn_final <= 1e-6);
  CHECK(tr.total_iterations <= 5000);

  // two identical calls agree bit for bit
  guess_trace tr2 = run_guessing(obj, x0, cfg);
  CHECK(tr.final_x == tr2.final_x);
  CHECK(tr.total_iterations == tr2.total_iterations);
}

TEST_CASE("alternative inner solvers run under the same protocol") {
  for (inner_solver inner : {inner_solver::anderson, inner_solver::gd,
                             inner_solver::nagd}) {
    guess_trace tr = run_small(300, inner);
    CHECK(tr.total_iterations <= 300);
    CHECK(!tr.history.empty());
    CHECK(all_finite(tr.final_x));
  }
}

TEST_CASE("guessing needs no spectrum knowledge: logistic objective") {
  dataset ds;
  ds.features = test_support::random_matrix(60, 6, 99);
  ds.labels.assign(60, 0.0);
  for (std::size_t i = 0; i < 60; i += 2) ds.labels[i] = 1.0;
  ds.feature_names = {"c1", "c2", "c3", "c4", "c5", "c6"};
  objective obj = make_objective(ds, 1e-3);

  guess_config cfg;
  cfg.delta = 1e-4;
  cfg.b_range = 1e5;
  cfg.budget = 800;
  vec x0(6, 0.0);
  const double gn0 = nrm2(obj.grad_fn(x0));
  guess_trace tr = run_guessing(obj, x0, cfg);
  CHECK(tr.total_iterations <= 800);
  CHECK(nrm2(obj.grad_fn(tr.final_x)) <= gn0);
}

TEST_CASE("structural coverage of the guess grid") {
  // invalid inputs
  CHECK_FALSE(guess_grid_covers(0.0, 10.0, 1.0, 2.0).has_value());
  CHECK_FALSE(guess_grid_covers(1.0, 1.0, 1.0, 2.0).has_value());
  CHECK_FALSE(guess_grid_covers(1.0, 10.0, 0.0, 2.0).has_value());
  CHECK_FALSE(guess_grid_covers(1.0, 10.0, 3.0, 2.0).has_value());

  // a floor guess above the whole spectrum cannot cover it
  CHECK_FALSE(guess_grid_covers(20.0, 40.0, 1.0, 10.0).has_value());

  // pinned witness: the bracket's own endpoint covers [1, 10]
  auto w = guess_grid_covers(0.5, 40.0, 1.0, 10.0);
  REQUIRE(w.has_value());
  CHECK(w->i == 1);
  CHECK(w->j == 0);
  CHECK(w->kappa_i == doctest::Approx(std::exp(3.0)).epsilon(1e-14));

  // property: any spectrum inside the bracket is covered, and the witness
  // really brackets it
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double delta = std::exp(6.0 * unit(gen) - 3.0);
    const double b = std::exp(1.0 + 6.0 * unit(gen));
    const double mu = delta * std::exp(std::log(b) * unit(gen) * 0.5);
    const double l = std::min(mu * std::exp(std::log(b) * unit(gen) * 0.5),
                              delta * b);
    REQUIRE(delta <= mu);
    REQUIRE(l <= delta * b);
    auto wit = guess_grid_covers(delta, b, mu, std::max(l, mu));
    REQUIRE(wit.has_value());
    const double mu_i = std::exp(double(wit->j)) * delta;
    const double l_i = mu_i * wit->kappa_i;
    CHECK(mu_i <= mu * (1.0 + 1e-12));
    CHECK(l_i >= std::max(l, mu) * (1.0 - 1e-12));
    // the smallest covering guess is within e^2 of the true conditioning
    const double kappa = std::max(l, mu) / mu;
    if (kappa >= std::exp(1.0)) {
      CHECK(wit->kappa_i <= std::exp(2.0) * kappa * (1.0 + 1e-12));
    }
  }
}

} // TEST_SUITE
