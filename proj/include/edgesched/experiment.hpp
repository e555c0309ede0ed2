#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgesched/core.hpp"
#include "edgesched/ga.hpp"
#include "edgesched/milp.hpp"
#include "edgesched/workload.hpp"

namespace edgesched {

enum class Algo { Fcfs, Stf, Ga, Milp };

const char* algo_name(Algo a);                    // "FCFS", "STF", "GA", "MILP"
std::optional<Algo> algo_from_string(const std::string& s);  // case-insensitive

/// A replicated experiment over a (users x tasks_per_user) grid. Run r uses
/// seed base_seed + r, and within one run every algorithm sees the identical
/// TaskSet.
struct Scenario {
    std::vector<int> users_grid{20};
    std::vector<int> tasks_per_user_grid{5};
    WorkloadConfig workload;  // template; n_users/tasks_per_user/seed overwritten per cell/run
    int m_cpus = 2;
    ObjectiveWeights weights;
    std::vector<Algo> algorithms{Algo::Fcfs, Algo::Stf, Algo::Ga, Algo::Milp};
    int n_runs = 10;
    std::uint64_t base_seed = 1;
    GaParams ga;
    SolveBudget milp_budget{200000, 0.0};
};

void validate_scenario(const Scenario& s);

struct RunRecord {
    int users = 0;
    int tasks_per_user = 0;
    Algo algo = Algo::Fcfs;
    int run = 0;  // 0-based replication index
    std::uint64_t seed = 0;
    RunMetrics metrics;  // solver_runtime_ms filled with wall-clock
};

struct CiCell {
    double mean = 0.0;
    double half_width = 0.0;
    bool available = false;  // false when n_runs < 2
};

struct ResultRow {
    int users = 0;
    int tasks_per_user = 0;
    Algo algo = Algo::Fcfs;
    int n_runs = 0;
    CiCell mean_delay, dropped_ratio, objective;
    double mean_runtime_ms = 0.0;
};

struct ResultTable {
    std::vector<RunRecord> raw;    // row-major: cell by cell, run by run, algo by algo
    std::vector<ResultRow> rows;   // aggregated, deterministic order
    double ci_level = 0.95;
};

/// Runs the whole grid. Worker threads split (cell, run) jobs; results are
/// merged in a fixed order so every output is byte-identical regardless of
/// thread count. Any solver emitting an invalid schedule aborts with
/// std::runtime_error naming the algorithm and seed. The MILP column is
/// warm-started with the best heuristic schedule of the same run, so its
/// objective never exceeds theirs even when the node budget is exhausted.
ResultTable run_experiment(const Scenario& scenario, int threads = 1);

/// Deterministic serializations. Wall-clock runtimes are deliberately kept
/// out of these three (see timings_csv) so repeated runs produce identical
/// bytes.
std::string result_table_csv(const ResultTable& table);
std::string result_table_json(const ResultTable& table);
std::string raw_records_csv(const ResultTable& table);

/// Per-run and aggregated wall-clock times; the only output that varies
/// between repetitions.
std::string timings_csv(const ResultTable& table);

enum class PlotMetric { Delay, DroppedRatio };

/// One CSV per tasks_per_user value, columns users,algorithm,mean,ci_half_width.
/// Keyed by the tasks_per_user value. Throws std::runtime_error listing any
/// missing (users, tasks_per_user, algorithm) grid cell.
std::map<int, std::string> emit_plot_data(const ResultTable& table, PlotMetric metric);

struct BenchRow {
    int n_tasks = 0;
    Algo algo = Algo::Ga;
    double mean_runtime_ms = 0.0;
    std::optional<double> reference_ms;  // published values for a comparable setup, display only
};

/// Wall-clock per solve averaged over scenario.n_runs for instances of
/// users=N, tasks_per_user=1. Reference values are attached where available;
/// they come from a different solver and hardware and are not reproduction
/// targets.
std::vector<BenchRow> runtime_benchmark(const std::vector<int>& sizes, const Scenario& scenario);

std::string bench_csv(const std::vector<BenchRow>& rows);

/// The caveat line printed next to every benchmark table.
extern const char* kBenchReferenceNote;

}  // namespace edgesched
