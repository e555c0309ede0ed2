#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "edgesched/core.hpp"

namespace edgesched {

/// Distribution descriptor for generator parameters.
struct DistSpec {
    enum class Kind { Constant, Uniform, Exponential };
    Kind kind = Kind::Constant;
    // Constant: a = value. Uniform: [a, b]. Exponential: a = mean.
    double a = 0.0;
    double b = 0.0;
};

struct WorkloadConfig {
    int n_users = 20;
    int tasks_per_user = 5;
    double arrival_rate_per_ms = 0.01;  // Poisson rate per user, tasks/ms
    double packet_bits = 1000.0;        // 1 Kb
    double datarate_bits_per_ms = 50e3; // 50 Mbps
    DistSpec proc_time_ms{DistSpec::Kind::Uniform, 10.0, 100.0};
    DistSpec slack_factor{DistSpec::Kind::Uniform, 1.5, 4.0};  // samples must be >= 1
    std::uint64_t seed = 1;
    TimeMs slot_ms = 1;  // slot resolution; all generated times are multiples
};

/// Throws std::invalid_argument describing the first violated field, if any.
void validate_config(const WorkloadConfig& config);

/// A generated instance: tasks sorted by (arrival, id), ids reassigned 1..N
/// in that order.
struct TaskSet {
    std::vector<Task> tasks;
    WorkloadConfig config;
};

/// Pure transmission delay in milliseconds (packet / datarate). The generator
/// rounds it up to the slot resolution when it lands in arrival times.
double transmission_delay_ms(double packet_bits, double datarate_bits_per_ms);

/// Seeded, deterministic workload generation. Per user, inter-generation gaps
/// are i.i.d. exponential(arrival_rate); server-side arrival adds the
/// transmission delay and is rounded up to the slot grid. Processing times
/// are drawn from proc_time_ms (rounded up, so always >= one slot) and
/// deadlines use a multiplicative slack factor >= 1, so slack >= 0 always.
/// Identical config (including seed) produces a bit-identical TaskSet.
/// Throws on invalid config or when times exceed 2^53 slot units.
TaskSet generate_workload(const WorkloadConfig& config);

/// CSV with header task_id,user_id,arrival_ms,proc_ms,deadline_ms. Lossless
/// at slot resolution (all values are integers).
std::string taskset_to_csv(const TaskSet& ts);
void write_taskset_csv(const TaskSet& ts, const std::string& path);

/// Parses the CSV format above. The embedded config is defaulted except for
/// fields that can be inferred (none currently); solvers only need the tasks.
/// Throws std::runtime_error on malformed rows or invariant violations
/// (non-positive proc_time, duplicate ids).
TaskSet read_taskset_csv(const std::string& path);
TaskSet parse_taskset_csv(std::istream& in);

namespace rng {

/// splitmix64, used to derive per-user substreams from (seed, user).
std::uint64_t mix(std::uint64_t seed, std::uint64_t salt);

/// Uniform double in [0, 1) from 53 random bits; engine-agnostic so results
/// do not depend on the standard library's distribution implementations.
template <typename Engine>
double canonical(Engine& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

template <typename Engine>
double uniform(Engine& eng, double lo, double hi) {
    return lo + canonical(eng) * (hi - lo);
}

template <typename Engine>
double exponential(Engine& eng, double rate) {
    // -log(1-U)/rate; 1-U is in (0, 1] so the log argument is never zero.
    return -std::log1p(-canonical(eng)) / rate;
}

template <typename Engine>
double draw(Engine& eng, const DistSpec& d) {
    switch (d.kind) {
        case DistSpec::Kind::Constant: return d.a;
        case DistSpec::Kind::Uniform: return uniform(eng, d.a, d.b);
        case DistSpec::Kind::Exponential: return exponential(eng, 1.0 / d.a);
    }
    return d.a;
}

}  // namespace rng

}  // namespace edgesched
