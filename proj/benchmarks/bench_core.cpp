// Microbenchmarks for the hot paths: objective evaluation, sliding-window
// updates, mixing steps, schedule construction, and a short full run.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "accel/chebyshev.hpp"
#include "accel/dense.hpp"
#include "accel/problems.hpp"
#include "accel/rng.hpp"
#include "accel/solvers.hpp"

namespace {

accel::vec gaussian_vec(std::size_t n, std::uint64_t seed) {
  accel::rng r(seed);
  accel::vec v(n);
  for (auto& x : v) x = r.gaussian();
  return v;
}

void bm_quadratic_eval(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  accel::quadratic_problem p = accel::quadratic_generate(d, 1.0, 100.0, 1);
  accel::objective obj = accel::make_objective(p);
  accel::vec x = gaussian_vec(d, 2);
  for (auto _ : state) benchmark::DoNotOptimize(obj.eval_fn(x));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_quadratic_eval)->Arg(50)->Arg(200)->Arg(800)->Complexity();

void bm_window_push(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::vector<accel::vec> xs, fs;
  for (std::uint64_t i = 0; i < 32; ++i) {
    xs.push_back(gaussian_vec(d, 10 + i));
    fs.push_back(gaussian_vec(d, 100 + i));
  }
  accel::history_window h(5, 0.0, d);
  std::size_t k = 0;
  for (auto _ : state) {
    h.push(xs[k & 31], fs[k & 31]);
    ++k;
  }
}
BENCHMARK(bm_window_push)->Arg(100)->Arg(1000);

void bm_mixing_step(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  accel::quadratic_problem p = accel::quadratic_generate(d, 1.0, 100.0, 3);
  accel::objective obj = accel::make_objective(p);
  const double lambda = 2.0 / (p.l + p.mu);
  accel::history_window h(5, 0.0, d);
  accel::vec x = gaussian_vec(d, 4);
  for (int i = 0; i < 6; ++i) {
    auto [g, f] = accel::fixed_point_map(obj, lambda, x);
    h.push(x, f);
    x = g;
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(accel::anderson_step(obj, h, 1.0, lambda));
}
BENCHMARK(bm_mixing_step)->Arg(100)->Arg(1000);

void bm_beta_schedule(benchmark::State& state) {
  const auto horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state)
    benchmark::DoNotOptimize(accel::make_beta_schedule(1.0, 500.0, horizon));
}
BENCHMARK(bm_beta_schedule)->Arg(128)->Arg(1024)->Arg(8192);

void bm_stable_order(benchmark::State& state) {
  const auto horizon = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(accel::stable_order(horizon));
}
BENCHMARK(bm_stable_order)->Arg(128)->Arg(1024)->Arg(8192);

void bm_windowed_run(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  accel::quadratic_problem p = accel::quadratic_generate(d, 1.0, 100.0, 5);
  accel::objective obj = accel::make_objective(p);
  accel::vec x0 = gaussian_vec(d, 6);
  accel::solver_config cfg;
  cfg.m = 5;
  cfg.horizon = 50;
  for (auto _ : state) benchmark::DoNotOptimize(accel::run_anderson(obj, x0, cfg));
}
BENCHMARK(bm_windowed_run)->Arg(100)->Arg(400);

} // namespace

BENCHMARK_MAIN();
