#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "accel/io.hpp"
#include "test_support.hpp"

using nlohmann::json;
namespace fs = std::filesystem;
using test_support::fresh_dir;
using test_support::read_file;
using test_support::write_file;

namespace {

struct cli_result {
  int code = -1;
  std::string out;
  std::string err;
};

cli_result run_cli(const std::string& args, const std::string& env_prefix = "") {
  const fs::path dir = fresh_dir("cli_io");
  const std::string out_path = (dir / "out.txt").string();
  const std::string err_path = (dir / "err.txt").string();
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(ACCEL_CLI_PATH) + " " + args + " > " + out_path + " 2> " +
         err_path;
  const int raw = std::system(cmd.c_str());
  cli_result res;
  res.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  res.out = read_file(out_path);
  res.err = read_file(err_path);
  return res;
}

json quadratic_problem_section(std::size_t d, double mu, double l,
                               std::uint64_t seed) {
  return json{{"type", "quadratic"}, {"d", d}, {"mu", mu}, {"l", l}, {"seed", seed}};
}

std::string write_config(const fs::path& dir, const json& cfg) {
  fs::create_directories(dir);
  const std::string path = (dir / "config.json").string();
  write_file(path, cfg.dump(2) + "\n");
  return path;
}

json basic_compare_config(const fs::path& out_dir) {
  json cfg;
  cfg["problem"] = quadratic_problem_section(8, 1.0, 100.0, 5);
  cfg["x0"] = {{"type", "gaussian"}, {"scale", 1.0}, {"seed", 2}};
  cfg["solvers"] = json::array({json{{"name", "gd"}},
                                json{{"name", "aa"}, {"m", 5}},
                                json{{"name", "nagd"}}});
  cfg["horizon"] = 4000;
  cfg["grad_tol"] = 1e-6;
  cfg["out_dir"] = out_dir.string();
  return cfg;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2, help with 0") {
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("generate").code == 2);            // missing required flags
  CHECK(run_cli("compare").code == 2);             // missing --config
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("generate writes a loadable instance and reports its conditioning") {
  const fs::path dir = fresh_dir("gen");
  const std::string out = (dir / "q.json").string();
  cli_result r = run_cli("generate -d 6 --mu 1 --l 50 --seed 3 -o " + out);
  CHECK(r.code == 0);
  CHECK(r.out.find("kappa") != std::string::npos);
  accel::quadratic_problem p = accel::load_quadratic(out);
  CHECK(p.b.size() == 6);
  CHECK(p.mu == 1.0);
  CHECK(p.l == 50.0);

  CHECK(run_cli("generate -d 1 -o " + (dir / "bad.json").string()).code == 2);
}

TEST_CASE("compare produces traces, summaries, and a plot bundle") {
  const fs::path dir = fresh_dir("cmp");
  const std::string cfg_path = write_config(dir, basic_compare_config(dir / "run"));
  cli_result r = run_cli("compare -c " + cfg_path);
  CHECK(r.code == 0);
  CHECK(r.out.find("gd:") != std::string::npos);

  const fs::path run = dir / "run";
  for (const char* f : {"summary.json", "effective_config.json", "plot_data.csv",
                        "plot.py", "trace_gd.csv", "trace_aa.csv",
                        "trace_nagd.csv"}) {
    CHECK(fs::exists(run / f));
  }

  const std::string trace = read_file((run / "trace_gd.csv").string());
  CHECK(trace.rfind("iter,grad_norm,f_value,beta_t\n", 0) == 0);

  json summary = json::parse(read_file((run / "summary.json").string()));
  REQUIRE(summary["solvers"].size() == 3);
  CHECK(summary["problem"]["kappa"].get<double>() == doctest::Approx(100.0).epsilon(1e-6));
  for (const auto& entry : summary["solvers"]) {
    CHECK(entry.contains("status"));
    CHECK(entry.contains("iterations_to_tol"));
    CHECK(entry.contains("final_grad_norm"));
    CHECK(entry["status"] == "converged");
    CHECK_FALSE(entry["dnf"].get<bool>());
  }

  json effective = json::parse(read_file((run / "effective_config.json").string()));
  CHECK(effective["x0"]["type"] == "gaussian");
  CHECK(effective["solvers"][1]["name"] == "aa");
  CHECK(effective["solvers"][1].contains("lambda"));
  CHECK(effective["solvers"][1].contains("beta"));
  CHECK(effective["snapshot_iterates"] == false);

  const std::string plot_data = read_file((run / "plot_data.csv").string());
  CHECK(plot_data.rfind("solver,iter,grad_norm\n", 0) == 0);
}

TEST_CASE("compare deduplicates repeated solver names") {
  const fs::path dir = fresh_dir("cmpdup");
  json cfg = basic_compare_config(dir / "run");
  cfg["solvers"] = json::array({json{{"name", "gd"}}, json{{"name", "gd"}, {"step", 0.005}}});
  cli_result r = run_cli("compare -c " + write_config(dir, cfg));
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "run" / "trace_gd.csv"));
  CHECK(fs::exists(dir / "run" / "trace_gd_2.csv"));
}

TEST_CASE("compare configuration failures exit with code 2") {
  const fs::path dir = fresh_dir("cmpbad");

  json no_solvers = basic_compare_config(dir / "a");
  no_solvers["solvers"] = json::array();
  CHECK(run_cli("compare -c " + write_config(dir / "d1", no_solvers)).code == 2);

  json no_stop = basic_compare_config(dir / "b");
  no_stop.erase("horizon");
  no_stop.erase("grad_tol");
  CHECK(run_cli("compare -c " + write_config(dir / "d2", no_stop)).code == 2);

  json bad_solver = basic_compare_config(dir / "c");
  bad_solver["solvers"] = json::array({json{{"name", "sgd"}}});
  CHECK(run_cli("compare -c " + write_config(dir / "d3", bad_solver)).code == 2);

  const std::string invalid = (dir / "invalid.json").string();
  write_file(invalid, "{ not json");
  CHECK(run_cli("compare -c " + invalid).code == 2);

  // unreadable config is a runtime failure, not a usage error
  CHECK(run_cli("compare -c " + (dir / "missing.json").string()).code == 1);
}

TEST_CASE("identical configurations reproduce byte-identical traces") {
  const fs::path dir = fresh_dir("cmprepro");
  json cfg_a = basic_compare_config(dir / "a");
  json cfg_b = basic_compare_config(dir / "b");
  REQUIRE(run_cli("compare -c " + write_config(dir / "ca", cfg_a)).code == 0);
  REQUIRE(run_cli("compare -c " + write_config(dir / "cb", cfg_b)).code == 0);
  CHECK(read_file((dir / "a" / "trace_aa.csv").string()) ==
        read_file((dir / "b" / "trace_aa.csv").string()));
}

TEST_CASE("the seed environment override changes and pins the run") {
  const fs::path dir = fresh_dir("cmpseed");
  json base = basic_compare_config(dir / "base");
  REQUIRE(run_cli("compare -c " + write_config(dir / "c0", base)).code == 0);

  json seeded_a = basic_compare_config(dir / "sa");
  json seeded_b = basic_compare_config(dir / "sb");
  REQUIRE(run_cli("compare -c " + write_config(dir / "c1", seeded_a),
                  "ACCEL_SEED=99").code == 0);
  REQUIRE(run_cli("compare -c " + write_config(dir / "c2", seeded_b),
                  "ACCEL_SEED=99").code == 0);

  const std::string base_trace = read_file((dir / "base" / "trace_gd.csv").string());
  const std::string a_trace = read_file((dir / "sa" / "trace_gd.csv").string());
  const std::string b_trace = read_file((dir / "sb" / "trace_gd.csv").string());
  CHECK(a_trace == b_trace);
  CHECK(a_trace != base_trace);

  json eff = json::parse(read_file((dir / "sa" / "effective_config.json").string()));
  CHECK(eff["seed_override"] == 99);
  CHECK(eff["problem"]["seed"] == 99);
  CHECK(eff["x0"]["seed"] == 99);

  CHECK(run_cli("compare -c " + write_config(dir / "c3", base),
                "ACCEL_SEED=ninety-nine").code == 2);
}

TEST_CASE("guess emits search artifacts and a fixed-bracket counterpart") {
  const fs::path dir = fresh_dir("guess");
  json cfg;
  cfg["problem"] = quadratic_problem_section(10, 1.0, 10.0, 2);
  cfg["x0"] = {{"type", "gaussian"}, {"scale", 1.0}, {"seed", 7}};
  cfg["guess"] = {{"delta", 0.5}, {"b_range", 40.0}, {"budget", 400}};
  cfg["out_dir"] = (dir / "run").string();
  cli_result r = run_cli("guess -c " + write_config(dir, cfg));
  CHECK(r.code == 0);

  const fs::path run = dir / "run";
  for (const char* f : {"guess_history.csv", "guess_trace.json", "fixed_history.csv",
                        "summary.json", "effective_config.json"}) {
    CHECK(fs::exists(run / f));
  }
  CHECK(read_file((run / "guess_history.csv").string())
            .rfind("iter,grad_norm,f_value,beta_t\n", 0) == 0);

  json trace = json::parse(read_file((run / "guess_trace.json").string()));
  CHECK(trace["total_iterations"].get<std::size_t>() <= 400);
  CHECK(trace["i_max"] == 6);
  CHECK(trace["j_max"] == 4);

  json summary = json::parse(read_file((run / "summary.json").string()));
  CHECK(summary["coverage_violated"] == false);
  REQUIRE(summary["grid_witness"].is_object());
  CHECK(summary["grid_witness"]["i"] == 1);
  CHECK(summary["grid_witness"]["j"] == 0);
  CHECK(summary["with_guessing"].contains("final_grad_norm"));
  CHECK(summary["without_guessing"].contains("final_grad_norm"));
  CHECK(summary["without_guessing"]["mu_fixed"] == 0.5);
  CHECK(summary["without_guessing"]["l_fixed"] == 20.0);
}

TEST_CASE("guess flags a bracket that misses the spectrum") {
  const fs::path dir = fresh_dir("guessmiss");
  json cfg;
  cfg["problem"] = quadratic_problem_section(6, 1.0, 10.0, 2);
  cfg["guess"] = {{"delta", 20.0}, {"b_range", 40.0}, {"budget", 50}};
  cfg["out_dir"] = (dir / "run").string();
  cli_result r = run_cli("guess -c " + write_config(dir, cfg));
  CHECK(r.code == 0);
  CHECK(r.out.find("coverage violated") != std::string::npos);
  json summary = json::parse(read_file((dir / "run" / "summary.json").string()));
  CHECK(summary["coverage_violated"] == true);
  CHECK(summary["grid_witness"].is_null());
}

TEST_CASE("a budget of one still produces a valid guessing trace") {
  const fs::path dir = fresh_dir("guessone");
  json cfg;
  cfg["problem"] = quadratic_problem_section(6, 1.0, 10.0, 2);
  cfg["guess"] = {{"delta", 0.5}, {"b_range", 40.0}, {"budget", 1}};
  cfg["out_dir"] = (dir / "run").string();
  CHECK(run_cli("guess -c " + write_config(dir, cfg)).code == 0);
  json trace = json::parse(read_file((dir / "run" / "guess_trace.json").string()));
  CHECK(trace["total_iterations"] == 0);
  CHECK(trace["runs"].empty());
}

TEST_CASE("verify runs oracles and reports pass or failure through exit codes") {
  const fs::path dir = fresh_dir("verify");
  json cfg;
  cfg["problem"] = quadratic_problem_section(10, 1.0, 10.0, 6);
  cfg["x0"] = {{"type", "gaussian"}, {"scale", 1.0}, {"seed", 3}};
  cfg["out_dir"] = (dir / "run").string();
  const std::string cfg_path = write_config(dir, cfg);

  cli_result rec = run_cli("verify --oracle recursion -c " + cfg_path);
  CHECK(rec.code == 0);
  CHECK(rec.out.find("PASS") != std::string::npos);
  json report = json::parse(read_file((dir / "run" / "report_recursion.json").string()));
  CHECK(report["pass"] == true);
  CHECK(report["name"] == "residual_recursion");

  CHECK(run_cli("verify --oracle gmres -c " + cfg_path).code == 0);
  CHECK(run_cli("verify --oracle contraction -c " + cfg_path).code == 0);
  cli_result gen = run_cli("verify --oracle general_bound -c " + cfg_path);
  CHECK(gen.code == 0);
  CHECK(gen.out.find("informational") != std::string::npos);

  CHECK(run_cli("verify --oracle bogus -c " + cfg_path).code == 2);

  // oracle may come from the config file instead of the flag
  json with_oracle = cfg;
  with_oracle["oracle"] = "recursion";
  with_oracle["out_dir"] = (dir / "run2").string();
  CHECK(run_cli("verify -c " + write_config(dir / "d2", with_oracle)).code == 0);
}

TEST_CASE("logistic problems are reachable from the command line") {
  const fs::path dir = fresh_dir("clilog");
  json cfg;
  cfg["problem"] = {{"type", "logistic"},
                    {"csv", std::string(ACCEL_DATA_DIR) + "/clinic_synth.csv"},
                    {"label", "y"}};
  cfg["solvers"] = json::array({json{{"name", "gd"}}});
  cfg["horizon"] = 40;
  cfg["out_dir"] = (dir / "run").string();
  cli_result r = run_cli("compare -c " + write_config(dir, cfg));
  CHECK(r.code == 0);
  json summary = json::parse(read_file((dir / "run" / "summary.json").string()));
  CHECK(summary["problem"]["type"] == "logistic");
  CHECK(summary["problem"].contains("l_estimate"));
  CHECK(fs::exists(dir / "run" / "trace_gd.csv"));
}

} // TEST_SUITE
