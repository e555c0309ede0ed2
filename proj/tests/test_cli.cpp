// Process-level checks of the command line tool. The binary path comes from
// the build system.
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "edgesched/core.hpp"
#include "edgesched/greedy.hpp"
#include "edgesched/workload.hpp"
#include "oracle.hpp"

#ifndef EDGESCHED_CLI_PATH
#error "EDGESCHED_CLI_PATH must be defined by the build"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const fs::path out_file = fs::temp_directory_path() / ("edgesched_cli_out_" +
                                                           std::to_string(counter++) + ".txt");
    const std::string cmd =
        std::string(EDGESCHED_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>/dev/null";
    const int raw = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out_file);
    fs::remove(out_file);
    return r;
}

fs::path write_i1_fixture() {
    const fs::path p = fs::temp_directory_path() / "edgesched_i1.csv";
    std::ofstream out(p, std::ios::binary);
    out << "task_id,user_id,arrival_ms,proc_ms,deadline_ms\n"
           "1,1,0,5,10\n"
           "2,1,0,2,4\n"
           "3,1,1,2,9\n";
    return p;
}

double parse_metric(const std::string& text, const std::string& key) {
    const auto pos = text.find(key + ": ");
    REQUIRE(pos != std::string::npos);
    return std::stod(text.substr(pos + key.size() + 2));
}

}  // namespace

TEST_CASE("schedule prints the fixture metrics") {
    const fs::path i1 = write_i1_fixture();
    const RunResult r =
        run_cli("schedule --algo stf --instance " + i1.string() + " --cpus 1 --lambda 0.5");
    CHECK(r.exit_code == 0);
    CHECK(parse_metric(r.out, "mean_delay_ms") == doctest::Approx(1.667).epsilon(1e-3));
    CHECK(parse_metric(r.out, "dropped_ratio") == 0.0);
    CHECK(parse_metric(r.out, "objective") == doctest::Approx(0.48333).epsilon(1e-4));

    const RunResult f =
        run_cli("schedule --algo fcfs --instance " + i1.string() + " --cpus 1 --lambda 0.5");
    CHECK(parse_metric(f.out, "mean_delay_ms") == doctest::Approx(2.0));
    CHECK(parse_metric(f.out, "dropped_ratio") == doctest::Approx(1.0 / 3.0));

    const RunResult m =
        run_cli("schedule --algo milp --instance " + i1.string() + " --cpus 1 --lambda 0.5");
    CHECK(parse_metric(m.out, "objective") == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(m.out.find("status: optimal") != std::string::npos);
}

TEST_CASE("unknown flags exit with the usage code") {
    CHECK(run_cli("schedule --bogus-flag 1").exit_code == 2);
    CHECK(run_cli("no-such-subcommand").exit_code == 2);
}

TEST_CASE("missing instance files exit with the runtime code") {
    CHECK(run_cli("schedule --algo stf --instance /nonexistent.csv").exit_code == 1);
}

TEST_CASE("generate emits a deterministic csv that round-trips") {
    const RunResult a = run_cli("generate --users 4 --tasks-per-user 2 --seed 9");
    const RunResult b = run_cli("generate --users 4 --tasks-per-user 2 --seed 9");
    CHECK(a.exit_code == 0);
    CHECK(a.out == b.out);

    std::istringstream in(a.out);
    const edgesched::TaskSet ts = edgesched::parse_taskset_csv(in);
    CHECK(ts.tasks.size() == 8);

    // Feeding the file back through `schedule` matches the in-process result.
    const fs::path p = fs::temp_directory_path() / "edgesched_gen.csv";
    std::ofstream(p, std::ios::binary) << a.out;
    const RunResult sched = run_cli("schedule --algo fcfs --instance " + p.string() + " --cpus 2");
    const edgesched::RunMetrics want = edgesched::compute_metrics(
        edgesched::schedule_fcfs(ts.tasks, 2), ts.tasks, edgesched::ObjectiveWeights{0.5});
    CHECK(parse_metric(sched.out, "objective") == doctest::Approx(want.objective).epsilon(1e-5));
}

TEST_CASE("experiment runs are file-level reproducible") {
    const fs::path dir_a = fs::temp_directory_path() / "edgesched_exp_a";
    const fs::path dir_b = fs::temp_directory_path() / "edgesched_exp_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);

    const fs::path cfg = fs::temp_directory_path() / "edgesched_cfg.json";
    std::ofstream(cfg) << R"({
      "users": [3], "tasks_per_user": [2], "n_runs": 2, "base_seed": 5,
      "ga": {"population": 8, "generations": 3},
      "milp": {"max_nodes": 5000},
      "workload": {"arrival_rate_per_ms": 0.05}
    })";

    CHECK(run_cli("experiment --config " + cfg.string() + " --out-dir " + dir_a.string()).exit_code ==
          0);
    CHECK(run_cli("experiment --config " + cfg.string() + " --out-dir " + dir_b.string() +
                  " --threads 3")
              .exit_code == 0);

    for (const char* name : {"results.csv", "results.json", "raw_runs.csv", "plot_delay_tpu2.csv",
                             "plot_dropped_ratio_tpu2.csv"}) {
        CAPTURE(name);
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
    }
    CHECK(fs::exists(dir_a / "timings.csv"));
}

TEST_CASE("config files with unknown keys are rejected") {
    const fs::path cfg = fs::temp_directory_path() / "edgesched_bad_cfg.json";
    std::ofstream(cfg) << R"({"users": [2], "type": "oops"})";
    CHECK(run_cli("experiment --config " + cfg.string()).exit_code == 2);

    std::ofstream(cfg, std::ios::trunc) << R"({"users": "not-a-list"})";
    CHECK(run_cli("experiment --config " + cfg.string()).exit_code == 2);
}

TEST_CASE("the GA fitness history lands where asked") {
    const fs::path i1 = write_i1_fixture();
    const fs::path hist = fs::temp_directory_path() / "edgesched_hist.csv";
    const RunResult r = run_cli("schedule --algo ga --instance " + i1.string() +
                                " --cpus 1 --seed 3 --ga-population 10 --ga-generations 4 " +
                                "--ga-history-out " + hist.string());
    CHECK(r.exit_code == 0);
    const std::string csv = slurp(hist);
    CHECK(csv.rfind("generation,best_objective\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 + 1);  // header + gen 0..4
}

TEST_CASE("the environment variable sets the default output directory") {
    const fs::path dir = fs::temp_directory_path() / "edgesched_envdir";
    fs::remove_all(dir);
    const fs::path cfg = fs::temp_directory_path() / "edgesched_env_cfg.json";
    std::ofstream(cfg) << R"({
      "users": [2], "tasks_per_user": [1], "n_runs": 1,
      "ga": {"population": 6, "generations": 2}, "milp": {"max_nodes": 2000}
    })";
    const std::string cmd = "EDGESCHED_OUT_DIR=" + dir.string() + " " + EDGESCHED_CLI_PATH +
                            " experiment --config " + cfg.string() + " >/dev/null 2>&1";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(dir / "results.csv"));
}

TEST_CASE("export-lp writes the model file") {
    const fs::path i1 = write_i1_fixture();
    const fs::path lp = fs::temp_directory_path() / "edgesched_i1.lp";
    const RunResult r = run_cli("export-lp --instance " + i1.string() + " --cpus 1 --out " + lp.string());
    CHECK(r.exit_code == 0);
    const std::string text = slurp(lp);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("x_1_1") != std::string::npos);

    const RunResult again =
        run_cli("export-lp --instance " + i1.string() + " --cpus 1 --out " + lp.string());
    CHECK(slurp(lp) == text);
}

TEST_CASE("bench emits measured and reference columns") {
    const RunResult r = run_cli("bench --sizes 10 --runs 1");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("n_tasks,algorithm,mean_runtime_ms,reference_ms") == 0);
    CHECK(r.out.find("42.2") != std::string::npos);
    CHECK(r.out.find("62.5") != std::string::npos);
}
