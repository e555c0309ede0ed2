// Command-line front end: workload generation, single-instance scheduling,
// replicated experiments, LP export and runtime benchmarks.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "edgesched/experiment.hpp"
#include "edgesched/greedy.hpp"

namespace es = edgesched;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::string default_out_dir() {
    if (const char* env = std::getenv("EDGESCHED_OUT_DIR")) return env;
    return "out";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
}

// "uniform:10:100", "constant:25", "exponential:40"
es::DistSpec parse_dist_flag(const std::string& text) {
    std::istringstream ss(text);
    std::string kind;
    std::getline(ss, kind, ':');
    es::DistSpec d;
    std::string a, b;
    std::getline(ss, a, ':');
    std::getline(ss, b, ':');
    if (kind == "constant") {
        d.kind = es::DistSpec::Kind::Constant;
        d.a = std::stod(a);
    } else if (kind == "uniform") {
        d.kind = es::DistSpec::Kind::Uniform;
        d.a = std::stod(a);
        d.b = std::stod(b);
    } else if (kind == "exponential") {
        d.kind = es::DistSpec::Kind::Exponential;
        d.a = std::stod(a);
    } else {
        throw std::invalid_argument("unknown distribution kind: " + kind);
    }
    return d;
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) { ok = true; break; }
        if (!ok) throw std::invalid_argument("unknown key \"" + it.key() + "\" in " + context);
    }
}

es::DistSpec parse_dist_json(const json& j, const std::string& context) {
    if (!j.is_object()) throw std::invalid_argument(context + " must be an object");
    reject_unknown_keys(j, {"dist", "min", "max", "value", "mean"}, context);
    const std::string kind = j.at("dist").get<std::string>();
    es::DistSpec d;
    if (kind == "uniform") {
        d.kind = es::DistSpec::Kind::Uniform;
        d.a = j.at("min").get<double>();
        d.b = j.at("max").get<double>();
    } else if (kind == "constant") {
        d.kind = es::DistSpec::Kind::Constant;
        d.a = j.at("value").get<double>();
    } else if (kind == "exponential") {
        d.kind = es::DistSpec::Kind::Exponential;
        d.a = j.at("mean").get<double>();
    } else {
        throw std::invalid_argument(context + ": unknown dist \"" + kind + "\"");
    }
    return d;
}

struct CliConfig {
    es::Scenario scenario;
    std::string output_dir = default_out_dir();
    int threads = 1;
    int verbosity = 1;
};

// Parses and schema-validates the experiment configuration. Every field has
// a default; unknown keys are rejected.
CliConfig parse_config_json(const json& doc) {
    if (!doc.is_object()) throw std::invalid_argument("config root must be an object");
    reject_unknown_keys(doc,
                        {"users", "tasks_per_user", "m_cpus", "lambda", "algorithms", "n_runs",
                         "base_seed", "workload", "ga", "milp", "output_dir", "threads", "verbosity"},
                        "config");
    CliConfig cfg;
    es::Scenario& sc = cfg.scenario;

    if (doc.contains("users")) sc.users_grid = doc["users"].get<std::vector<int>>();
    if (doc.contains("tasks_per_user"))
        sc.tasks_per_user_grid = doc["tasks_per_user"].get<std::vector<int>>();
    if (doc.contains("m_cpus")) sc.m_cpus = doc["m_cpus"].get<int>();
    if (doc.contains("lambda")) sc.weights.lambda = doc["lambda"].get<double>();
    if (doc.contains("n_runs")) sc.n_runs = doc["n_runs"].get<int>();
    if (doc.contains("base_seed")) sc.base_seed = doc["base_seed"].get<std::uint64_t>();
    if (doc.contains("algorithms")) {
        sc.algorithms.clear();
        for (const auto& name : doc["algorithms"]) {
            const auto algo = es::algo_from_string(name.get<std::string>());
            if (!algo) throw std::invalid_argument("unknown algorithm \"" + name.get<std::string>() + "\"");
            sc.algorithms.push_back(*algo);
        }
    }
    if (doc.contains("workload")) {
        const json& w = doc["workload"];
        reject_unknown_keys(w,
                            {"arrival_rate_per_ms", "packet_bits", "datarate_bits_per_ms",
                             "proc_time_ms", "slack_factor", "slot_ms"},
                            "workload");
        if (w.contains("arrival_rate_per_ms"))
            sc.workload.arrival_rate_per_ms = w["arrival_rate_per_ms"].get<double>();
        if (w.contains("packet_bits")) sc.workload.packet_bits = w["packet_bits"].get<double>();
        if (w.contains("datarate_bits_per_ms"))
            sc.workload.datarate_bits_per_ms = w["datarate_bits_per_ms"].get<double>();
        if (w.contains("proc_time_ms"))
            sc.workload.proc_time_ms = parse_dist_json(w["proc_time_ms"], "workload.proc_time_ms");
        if (w.contains("slack_factor"))
            sc.workload.slack_factor = parse_dist_json(w["slack_factor"], "workload.slack_factor");
        if (w.contains("slot_ms")) sc.workload.slot_ms = w["slot_ms"].get<es::TimeMs>();
    }
    if (doc.contains("ga")) {
        const json& g = doc["ga"];
        reject_unknown_keys(
            g, {"population", "generations", "mutation_rate", "tournament_size", "seed_with_greedy"},
            "ga");
        if (g.contains("population")) sc.ga.population = g["population"].get<int>();
        if (g.contains("generations")) sc.ga.generations = g["generations"].get<int>();
        if (g.contains("mutation_rate")) sc.ga.mutation_rate = g["mutation_rate"].get<double>();
        if (g.contains("tournament_size")) sc.ga.tournament_size = g["tournament_size"].get<int>();
        if (g.contains("seed_with_greedy")) sc.ga.seed_with_greedy = g["seed_with_greedy"].get<bool>();
    }
    if (doc.contains("milp")) {
        const json& m = doc["milp"];
        reject_unknown_keys(m, {"max_nodes", "max_millis"}, "milp");
        if (m.contains("max_nodes")) sc.milp_budget.max_nodes = m["max_nodes"].get<std::uint64_t>();
        if (m.contains("max_millis")) sc.milp_budget.max_millis = m["max_millis"].get<double>();
    }
    if (doc.contains("output_dir")) cfg.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
    if (doc.contains("verbosity")) cfg.verbosity = doc["verbosity"].get<int>();

    es::validate_scenario(sc);
    if (cfg.threads < 1) throw std::invalid_argument("threads must be >= 1");
    return cfg;
}

CliConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config: " + path);
    try {
        return parse_config_json(json::parse(in));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("bad config: ") + e.what());
    }
}

std::string metric_line(const char* name, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return std::string(name) + ": " + buf;
}

int cmd_schedule(const std::string& algo_str, const std::string& instance_path, int cpus,
                 double lambda, std::uint64_t seed, const es::GaParams& ga_flags,
                 const es::SolveBudget& budget, es::TimeMs slot_ms,
                 const std::string& ga_history_out) {
    const auto algo = es::algo_from_string(algo_str);
    if (!algo) {
        std::cerr << "unknown algorithm: " << algo_str << "\n";
        return kExitUsage;
    }
    const es::TaskSet ts = es::read_taskset_csv(instance_path);
    const es::ObjectiveWeights weights{lambda};

    es::Schedule sched;
    std::string status_note;
    switch (*algo) {
        case es::Algo::Fcfs: sched = es::schedule_fcfs(ts.tasks, cpus); break;
        case es::Algo::Stf: sched = es::schedule_stf(ts.tasks, cpus); break;
        case es::Algo::Ga: {
            es::GaParams params = ga_flags;
            params.seed = seed;
            const es::GaResult res = es::run_ga(ts.tasks, cpus, weights, params);
            sched = res.schedule;
            if (!ga_history_out.empty())
                write_file(ga_history_out, es::fitness_history_csv(res.fitness_history));
            break;
        }
        case es::Algo::Milp: {
            const es::MilpModel model = es::build_model(ts.tasks, cpus, weights, slot_ms);
            const es::Schedule fcfs = es::schedule_fcfs(ts.tasks, cpus);
            const es::Schedule stf = es::schedule_stf(ts.tasks, cpus);
            const double fo = es::evaluate_objective(fcfs, ts.tasks, weights);
            const double so = es::evaluate_objective(stf, ts.tasks, weights);
            const es::Schedule& warm = so <= fo ? stf : fcfs;
            const es::SolveResult res = es::solve_exact(model, budget, &warm);
            sched = res.schedule;
            status_note = res.status == es::SolveStatus::Optimal ? "optimal" : "budget-exhausted";
            break;
        }
    }

    const auto violations = es::validate_schedule(sched, ts.tasks);
    if (!violations.empty()) {
        std::cerr << "invalid schedule: " << violations.front().rule << "\n";
        return kExitRuntime;
    }
    const es::RunMetrics metrics = es::compute_metrics(sched, ts.tasks, weights);
    std::cout << metric_line("mean_delay_ms", metrics.mean_delay_ms) << "\n"
              << metric_line("dropped_ratio", metrics.dropped_ratio) << "\n"
              << metric_line("objective", metrics.objective) << "\n";
    if (!status_note.empty()) std::cout << "status: " << status_note << "\n";
    return kExitOk;
}

int cmd_experiment(const CliConfig& cfg) {
    std::filesystem::create_directories(cfg.output_dir);
    if (cfg.verbosity >= 1)
        std::cerr << "running experiment: " << cfg.scenario.users_grid.size() << " x "
                  << cfg.scenario.tasks_per_user_grid.size() << " grid, " << cfg.scenario.n_runs
                  << " runs, " << cfg.threads << " thread(s)\n";

    const es::ResultTable table = es::run_experiment(cfg.scenario, cfg.threads);

    const auto path = [&](const std::string& name) {
        return (std::filesystem::path(cfg.output_dir) / name).string();
    };
    write_file(path("results.csv"), es::result_table_csv(table));
    write_file(path("results.json"), es::result_table_json(table));
    write_file(path("raw_runs.csv"), es::raw_records_csv(table));
    write_file(path("timings.csv"), es::timings_csv(table));
    for (const auto& [tpu, csv] : es::emit_plot_data(table, es::PlotMetric::Delay))
        write_file(path("plot_delay_tpu" + std::to_string(tpu) + ".csv"), csv);
    for (const auto& [tpu, csv] : es::emit_plot_data(table, es::PlotMetric::DroppedRatio))
        write_file(path("plot_dropped_ratio_tpu" + std::to_string(tpu) + ".csv"), csv);

    if (cfg.verbosity >= 1) std::cerr << "wrote results to " << cfg.output_dir << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deadline-constrained edge offloading scheduling workbench"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "generate a task set and write it as CSV");
    es::WorkloadConfig gen_cfg;
    std::string gen_out;
    std::string gen_proc = "uniform:10:100", gen_slack = "uniform:1.5:4";
    gen->add_option("--users", gen_cfg.n_users, "number of users")->capture_default_str();
    gen->add_option("--tasks-per-user", gen_cfg.tasks_per_user, "tasks per user")->capture_default_str();
    gen->add_option("--rate", gen_cfg.arrival_rate_per_ms, "per-user Poisson rate, tasks/ms")
        ->capture_default_str();
    gen->add_option("--packet-bits", gen_cfg.packet_bits, "packet size in bits")->capture_default_str();
    gen->add_option("--datarate", gen_cfg.datarate_bits_per_ms, "datarate in bits/ms")
        ->capture_default_str();
    gen->add_option("--proc-dist", gen_proc, "processing time distribution, e.g. uniform:10:100")
        ->capture_default_str();
    gen->add_option("--slack-dist", gen_slack, "slack factor distribution (>= 1), e.g. uniform:1.5:4")
        ->capture_default_str();
    gen->add_option("--seed", gen_cfg.seed, "generator seed")->capture_default_str();
    gen->add_option("--slot-ms", gen_cfg.slot_ms, "slot resolution in ms")->capture_default_str();
    gen->add_option("--out", gen_out, "output CSV path (default: stdout)");

    // schedule
    auto* sch = app.add_subcommand("schedule", "run one algorithm on one instance and print metrics");
    std::string sch_algo, sch_instance;
    int sch_cpus = 2;
    double sch_lambda = 0.5;
    std::uint64_t sch_seed = 1;
    es::GaParams sch_ga;
    es::SolveBudget sch_budget{200000, 0.0};
    es::TimeMs sch_slot = 1;
    sch->add_option("--algo", sch_algo, "fcfs | stf | ga | milp")->required();
    sch->add_option("--instance", sch_instance, "instance CSV path")->required();
    sch->add_option("--cpus", sch_cpus, "number of CPUs")->capture_default_str();
    sch->add_option("--lambda", sch_lambda, "objective weight in [0,1]")->capture_default_str();
    sch->add_option("--seed", sch_seed, "GA seed")->capture_default_str();
    sch->add_option("--ga-population", sch_ga.population)->capture_default_str();
    sch->add_option("--ga-generations", sch_ga.generations)->capture_default_str();
    sch->add_option("--ga-mutation-rate", sch_ga.mutation_rate)->capture_default_str();
    sch->add_option("--milp-max-nodes", sch_budget.max_nodes)->capture_default_str();
    sch->add_option("--milp-max-millis", sch_budget.max_millis)->capture_default_str();
    sch->add_option("--slot-ms", sch_slot, "slot resolution for the exact solver")->capture_default_str();
    std::string sch_history_out;
    sch->add_option("--ga-history-out", sch_history_out,
                    "write the GA best-objective-per-generation CSV here");

    // experiment
    auto* exp = app.add_subcommand("experiment", "run a replicated experiment grid");
    std::string exp_config;
    std::string exp_out_dir;
    int exp_threads = 0;
    exp->add_option("--config", exp_config, "JSON configuration (defaults run the desk-scale scenario)");
    exp->add_option("--out-dir", exp_out_dir, "output directory (default: $EDGESCHED_OUT_DIR or ./out)");
    exp->add_option("--threads", exp_threads, "worker threads (overrides config)");

    // export-lp
    auto* lp = app.add_subcommand("export-lp", "write the time-indexed model in LP format");
    std::string lp_instance, lp_out;
    int lp_cpus = 2;
    double lp_lambda = 0.5;
    es::TimeMs lp_slot = 1;
    lp->add_option("--instance", lp_instance, "instance CSV path")->required();
    lp->add_option("--cpus", lp_cpus)->capture_default_str();
    lp->add_option("--lambda", lp_lambda)->capture_default_str();
    lp->add_option("--slot-ms", lp_slot)->capture_default_str();
    lp->add_option("--out", lp_out, "output path (default: stdout)");

    // bench
    auto* bench = app.add_subcommand("bench", "measure solver runtimes over instance sizes");
    std::vector<int> bench_sizes{10, 50, 100};
    std::string bench_config, bench_out;
    int bench_runs = 3;
    bench->add_option("--sizes", bench_sizes, "task counts to benchmark")->capture_default_str();
    bench->add_option("--config", bench_config, "JSON configuration for workload/GA/MILP parameters");
    bench->add_option("--runs", bench_runs, "replications per size")->capture_default_str();
    bench->add_option("--out", bench_out, "output CSV path (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed()) {
            gen_cfg.proc_time_ms = parse_dist_flag(gen_proc);
            gen_cfg.slack_factor = parse_dist_flag(gen_slack);
            const es::TaskSet ts = es::generate_workload(gen_cfg);
            if (gen_out.empty())
                std::cout << es::taskset_to_csv(ts);
            else
                es::write_taskset_csv(ts, gen_out);
            return kExitOk;
        }
        if (sch->parsed())
            return cmd_schedule(sch_algo, sch_instance, sch_cpus, sch_lambda, sch_seed, sch_ga,
                                sch_budget, sch_slot, sch_history_out);
        if (exp->parsed()) {
            CliConfig cfg = exp_config.empty() ? CliConfig{} : load_config(exp_config);
            if (!exp_out_dir.empty()) cfg.output_dir = exp_out_dir;
            if (exp_threads > 0) cfg.threads = exp_threads;
            es::validate_scenario(cfg.scenario);
            return cmd_experiment(cfg);
        }
        if (lp->parsed()) {
            const es::TaskSet ts = es::read_taskset_csv(lp_instance);
            const es::MilpModel model =
                es::build_model(ts.tasks, lp_cpus, es::ObjectiveWeights{lp_lambda}, lp_slot);
            const std::string text = es::export_lp(model);
            if (lp_out.empty())
                std::cout << text;
            else
                write_file(lp_out, text);
            return kExitOk;
        }
        if (bench->parsed()) {
            CliConfig cfg = bench_config.empty() ? CliConfig{} : load_config(bench_config);
            cfg.scenario.n_runs = bench_runs;
            const auto rows = es::runtime_benchmark(bench_sizes, cfg.scenario);
            const std::string csv = es::bench_csv(rows);
            if (bench_out.empty())
                std::cout << csv;
            else
                write_file(bench_out, csv);
            std::cerr << "note: " << es::kBenchReferenceNote << "\n";
            return kExitOk;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
