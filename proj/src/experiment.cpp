#include "edgesched/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "edgesched/greedy.hpp"

namespace edgesched {

const char* kBenchReferenceNote =
    "reference runtimes come from a different solver stack and hardware; they are shown for "
    "qualitative comparison only and are not reproduction targets";

const char* algo_name(Algo a) {
    switch (a) {
        case Algo::Fcfs: return "FCFS";
        case Algo::Stf: return "STF";
        case Algo::Ga: return "GA";
        case Algo::Milp: return "MILP";
    }
    return "?";
}

std::optional<Algo> algo_from_string(const std::string& s) {
    std::string lower;
    for (char c : s) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "fcfs") return Algo::Fcfs;
    if (lower == "stf") return Algo::Stf;
    if (lower == "ga") return Algo::Ga;
    if (lower == "milp") return Algo::Milp;
    return std::nullopt;
}

void validate_scenario(const Scenario& s) {
    if (s.users_grid.empty() || s.tasks_per_user_grid.empty())
        throw std::invalid_argument("empty experiment grid");
    for (int u : s.users_grid)
        if (u < 1) throw std::invalid_argument("users values must be >= 1");
    for (int t : s.tasks_per_user_grid)
        if (t < 1) throw std::invalid_argument("tasks_per_user values must be >= 1");
    if (s.m_cpus < 1) throw std::invalid_argument("m_cpus must be >= 1");
    if (s.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    if (s.algorithms.empty()) throw std::invalid_argument("no algorithms selected");
    if (s.weights.lambda < 0.0 || s.weights.lambda > 1.0)
        throw std::invalid_argument("lambda must be in [0, 1]");
    validate_config(s.workload);
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

double wall_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Canonical algorithm ordering for all outputs.
std::vector<Algo> ordered_algos(const std::vector<Algo>& requested) {
    std::vector<Algo> out;
    for (Algo a : {Algo::Fcfs, Algo::Stf, Algo::Ga, Algo::Milp})
        if (std::find(requested.begin(), requested.end(), a) != requested.end()) out.push_back(a);
    return out;
}

struct Job {
    int users = 0;
    int tasks_per_user = 0;
    int run = 0;
    std::uint64_t seed = 0;
};

// One (cell, run): every algorithm sees the same generated TaskSet.
std::vector<RunRecord> execute_job(const Job& job, const Scenario& scenario,
                                   const std::vector<Algo>& algos) {
    WorkloadConfig cfg = scenario.workload;
    cfg.n_users = job.users;
    cfg.tasks_per_user = job.tasks_per_user;
    cfg.seed = job.seed;
    const TaskSet ts = generate_workload(cfg);

    std::vector<RunRecord> records;
    Schedule best_heuristic;
    double best_heuristic_obj = 0.0;
    bool have_heuristic = false;

    auto run_algo = [&](Algo a) -> std::pair<Schedule, double> {
        const auto t0 = std::chrono::steady_clock::now();
        Schedule sched;
        switch (a) {
            case Algo::Fcfs: sched = schedule_fcfs(ts.tasks, scenario.m_cpus); break;
            case Algo::Stf: sched = schedule_stf(ts.tasks, scenario.m_cpus); break;
            case Algo::Ga: {
                GaParams params = scenario.ga;
                params.seed = rng::mix(job.seed, 0x47414741ULL);
                sched = run_ga(ts.tasks, scenario.m_cpus, scenario.weights, params).schedule;
                break;
            }
            case Algo::Milp: {
                const MilpModel model =
                    build_model(ts.tasks, scenario.m_cpus, scenario.weights, cfg.slot_ms);
                sched = solve_exact(model, scenario.milp_budget,
                                    have_heuristic ? &best_heuristic : nullptr)
                            .schedule;
                break;
            }
        }
        return {std::move(sched), wall_ms(t0)};
    };

    for (Algo a : algos) {
        auto [sched, elapsed] = run_algo(a);
        const auto violations = validate_schedule(sched, ts.tasks);
        if (!violations.empty())
            throw std::runtime_error(std::string("invalid schedule from ") + algo_name(a) + " at seed " +
                                     std::to_string(job.seed) + ": " + violations.front().rule);
        RunRecord rec;
        rec.users = job.users;
        rec.tasks_per_user = job.tasks_per_user;
        rec.algo = a;
        rec.run = job.run;
        rec.seed = job.seed;
        rec.metrics = compute_metrics(sched, ts.tasks, scenario.weights);
        rec.metrics.solver_runtime_ms = elapsed;
        records.push_back(rec);

        if (a != Algo::Milp) {
            const double obj = rec.metrics.objective;
            if (!have_heuristic || obj < best_heuristic_obj) {
                best_heuristic = sched;
                best_heuristic_obj = obj;
                have_heuristic = true;
            }
        }
    }
    return records;
}

CiCell aggregate(const std::vector<double>& samples, double level) {
    CiCell cell;
    if (samples.size() >= 2) {
        const ConfidenceInterval ci = confidence_interval(samples, level);
        cell.mean = ci.mean;
        cell.half_width = ci.half_width;
        cell.available = true;
    } else if (samples.size() == 1) {
        cell.mean = samples.front();
        cell.available = false;
    }
    return cell;
}

}  // namespace

ResultTable run_experiment(const Scenario& scenario, int threads) {
    validate_scenario(scenario);
    const std::vector<Algo> algos = ordered_algos(scenario.algorithms);

    std::vector<Job> jobs;
    for (int users : scenario.users_grid)
        for (int tpu : scenario.tasks_per_user_grid)
            for (int r = 0; r < scenario.n_runs; ++r)
                jobs.push_back({users, tpu, r, scenario.base_seed + static_cast<std::uint64_t>(r)});

    std::vector<std::vector<RunRecord>> job_results(jobs.size());
    std::vector<std::string> job_errors(jobs.size());

    const int worker_count = std::max(1, std::min<int>(threads, static_cast<int>(jobs.size())));
    if (worker_count == 1) {
        for (std::size_t k = 0; k < jobs.size(); ++k) job_results[k] = execute_job(jobs[k], scenario, algos);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= jobs.size()) return;
                try {
                    job_results[k] = execute_job(jobs[k], scenario, algos);
                } catch (const std::exception& e) {
                    job_errors[k] = e.what();
                }
            }
        };
        std::vector<std::thread> pool;
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
        for (const auto& err : job_errors)
            if (!err.empty()) throw std::runtime_error(err);
    }

    ResultTable table;
    for (const auto& result : job_results)
        table.raw.insert(table.raw.end(), result.begin(), result.end());

    // Aggregate in deterministic order: grid order, then algorithm order.
    for (int users : scenario.users_grid) {
        for (int tpu : scenario.tasks_per_user_grid) {
            for (Algo a : algos) {
                std::vector<double> delays, drops, objectives, runtimes;
                for (const RunRecord& rec : table.raw) {
                    if (rec.users != users || rec.tasks_per_user != tpu || rec.algo != a) continue;
                    delays.push_back(rec.metrics.mean_delay_ms);
                    drops.push_back(rec.metrics.dropped_ratio);
                    objectives.push_back(rec.metrics.objective);
                    runtimes.push_back(rec.metrics.solver_runtime_ms);
                }
                ResultRow row;
                row.users = users;
                row.tasks_per_user = tpu;
                row.algo = a;
                row.n_runs = static_cast<int>(delays.size());
                row.mean_delay = aggregate(delays, table.ci_level);
                row.dropped_ratio = aggregate(drops, table.ci_level);
                row.objective = aggregate(objectives, table.ci_level);
                double sum = 0.0;
                for (double r : runtimes) sum += r;
                row.mean_runtime_ms = runtimes.empty() ? 0.0 : sum / static_cast<double>(runtimes.size());
                table.rows.push_back(row);
            }
        }
    }
    return table;
}

namespace {

void append_metric_rows(std::ostringstream& out, const ResultRow& row, const char* metric,
                        const CiCell& cell) {
    out << row.users << ',' << row.tasks_per_user << ',' << algo_name(row.algo) << ',' << metric << ','
        << fmt(cell.mean) << ',' << (cell.available ? fmt(cell.half_width) : "") << ',' << row.n_runs
        << '\n';
}

}  // namespace

std::string result_table_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "users,tasks_per_user,algorithm,metric,mean,ci_half_width,n\n";
    for (const ResultRow& row : table.rows) {
        append_metric_rows(out, row, "mean_delay_ms", row.mean_delay);
        append_metric_rows(out, row, "dropped_ratio", row.dropped_ratio);
        append_metric_rows(out, row, "objective", row.objective);
    }
    return out.str();
}

std::string result_table_json(const ResultTable& table) {
    nlohmann::ordered_json doc;
    doc["ci_level"] = table.ci_level;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const ResultRow& row : table.rows) {
        nlohmann::ordered_json r;
        r["users"] = row.users;
        r["tasks_per_user"] = row.tasks_per_user;
        r["algorithm"] = algo_name(row.algo);
        r["n"] = row.n_runs;
        auto cell = [](const CiCell& c) {
            nlohmann::ordered_json j;
            j["mean"] = c.mean;
            if (c.available)
                j["ci_half_width"] = c.half_width;
            else
                j["ci_half_width"] = nullptr;
            return j;
        };
        r["mean_delay_ms"] = cell(row.mean_delay);
        r["dropped_ratio"] = cell(row.dropped_ratio);
        r["objective"] = cell(row.objective);
        doc["rows"].push_back(std::move(r));
    }
    return doc.dump(2) + "\n";
}

std::string raw_records_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "users,tasks_per_user,algorithm,run,seed,mean_delay_ms,dropped_ratio,objective\n";
    for (const RunRecord& rec : table.raw) {
        out << rec.users << ',' << rec.tasks_per_user << ',' << algo_name(rec.algo) << ',' << rec.run
            << ',' << rec.seed << ',' << fmt(rec.metrics.mean_delay_ms) << ','
            << fmt(rec.metrics.dropped_ratio) << ',' << fmt(rec.metrics.objective) << '\n';
    }
    return out.str();
}

std::string timings_csv(const ResultTable& table) {
    std::ostringstream out;
    out << "users,tasks_per_user,algorithm,run,seed,solver_runtime_ms\n";
    for (const RunRecord& rec : table.raw) {
        out << rec.users << ',' << rec.tasks_per_user << ',' << algo_name(rec.algo) << ',' << rec.run
            << ',' << rec.seed << ',' << fmt(rec.metrics.solver_runtime_ms) << '\n';
    }
    return out.str();
}

std::map<int, std::string> emit_plot_data(const ResultTable& table, PlotMetric metric) {
    if (table.rows.empty()) throw std::runtime_error("empty result table");

    std::set<int> users, tpus;
    std::set<std::string> algos;
    for (const ResultRow& row : table.rows) {
        users.insert(row.users);
        tpus.insert(row.tasks_per_user);
        algos.insert(algo_name(row.algo));
    }
    std::vector<std::string> missing;
    auto find_row = [&](int u, int tpu, const std::string& algo) -> const ResultRow* {
        for (const ResultRow& row : table.rows)
            if (row.users == u && row.tasks_per_user == tpu && algo_name(row.algo) == algo) return &row;
        return nullptr;
    };
    for (int tpu : tpus)
        for (int u : users)
            for (const std::string& a : algos)
                if (!find_row(u, tpu, a))
                    missing.push_back("(users=" + std::to_string(u) + ", tasks_per_user=" +
                                      std::to_string(tpu) + ", algorithm=" + a + ")");
    if (!missing.empty()) {
        std::string msg = "missing grid cells:";
        for (const auto& m : missing) msg += " " + m;
        throw std::runtime_error(msg);
    }

    std::map<int, std::string> out;
    for (int tpu : tpus) {
        std::ostringstream csv;
        csv << "users,algorithm,mean,ci_half_width\n";
        for (int u : users) {
            for (const std::string& a : algos) {
                const ResultRow* row = find_row(u, tpu, a);
                const CiCell& cell = metric == PlotMetric::Delay ? row->mean_delay : row->dropped_ratio;
                csv << u << ',' << a << ',' << fmt(cell.mean) << ','
                    << (cell.available ? fmt(cell.half_width) : "") << '\n';
            }
        }
        out[tpu] = csv.str();
    }
    return out;
}

namespace {

// Published runtimes (ms) for a comparable MILP/GA setup, keyed by task count.
std::optional<double> reference_runtime_ms(int n_tasks, Algo a) {
    struct Ref {
        int n;
        double milp_ms, ga_ms;
    };
    static constexpr Ref refs[] = {
        {10, 42.2, 62.5},        {50, 90.8, 1800.0},     {100, 3800.0, 4600.0},
        {500, 11600.0, 19500.0}, {1000, 21800.0, 30500.0}, {2500, 40300.0, 57600.0},
        {5000, 60100.0, 90900.0}, {10000, 125600.0, 165800.0},
    };
    for (const Ref& r : refs) {
        if (r.n != n_tasks) continue;
        if (a == Algo::Milp) return r.milp_ms;
        if (a == Algo::Ga) return r.ga_ms;
    }
    return std::nullopt;
}

}  // namespace

std::vector<BenchRow> runtime_benchmark(const std::vector<int>& sizes, const Scenario& scenario) {
    validate_scenario(scenario);
    const std::vector<Algo> algos = ordered_algos(scenario.algorithms);
    std::vector<BenchRow> rows;

    for (int n : sizes) {
        if (n < 1) throw std::invalid_argument("benchmark sizes must be >= 1");
        std::map<Algo, std::vector<double>> times;
        for (int r = 0; r < scenario.n_runs; ++r) {
            const Job job{n, 1, r, scenario.base_seed + static_cast<std::uint64_t>(r)};
            const auto records = execute_job(job, scenario, algos);
            for (const RunRecord& rec : records) times[rec.algo].push_back(rec.metrics.solver_runtime_ms);
        }
        for (Algo a : algos) {
            BenchRow row;
            row.n_tasks = n;
            row.algo = a;
            double sum = 0.0;
            for (double t : times[a]) sum += t;
            row.mean_runtime_ms = times[a].empty() ? 0.0 : sum / static_cast<double>(times[a].size());
            row.reference_ms = reference_runtime_ms(n, a);
            rows.push_back(row);
        }
    }
    return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "n_tasks,algorithm,mean_runtime_ms,reference_ms\n";
    for (const BenchRow& row : rows) {
        out << row.n_tasks << ',' << algo_name(row.algo) << ',' << fmt(row.mean_runtime_ms) << ','
            << (row.reference_ms ? fmt(*row.reference_ms) : "") << '\n';
    }
    return out.str();
}

}  // namespace edgesched
