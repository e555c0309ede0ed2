#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace edgesched {

/// Canonical time unit: integer milliseconds. All task times are exact
/// multiples of the workload slot resolution, so arithmetic is bit-exact
/// across platforms.
using TimeMs = std::int64_t;

/// One offloadable unit of work as seen by the server. `arrival` is the
/// server-side arrival (transmission delay already added by the generator).
struct Task {
    int id = 0;
    int user_id = 0;
    TimeMs arrival = 0;
    TimeMs proc_time = 0;  // strictly positive
    TimeMs deadline = 0;

    /// Maximum admissible waiting time: deadline - arrival - proc_time.
    /// Negative slack means the task can never complete and must be dropped.
    TimeMs slack() const { return deadline - arrival - proc_time; }

    /// Latest start that still meets the deadline.
    TimeMs latest_start() const { return deadline - proc_time; }
};

/// Placement of one task on one CPU. `waiting` is start - arrival and is
/// stored explicitly so a schedule is self-describing; validate_schedule
/// checks the redundancy.
struct Assignment {
    int task_id = 0;
    int cpu_id = 0;  // 1-based, in [1, m_cpus]
    TimeMs start = 0;
    TimeMs waiting = 0;
};

/// The decision object every solver produces: per-CPU non-preemptive
/// assignments plus the set of dropped task ids. Every task of the instance
/// appears exactly once, either assigned or dropped.
struct Schedule {
    std::vector<Assignment> assignments;  // sorted by task_id once normalized
    std::vector<int> dropped;             // sorted ascending once normalized
    int m_cpus = 1;
};

/// Sorts assignments by task id and the dropped list ascending so schedules
/// compare and serialize deterministically.
void normalize_schedule(Schedule& schedule);

/// Weighting factor between the delay term and the dropped-task term.
struct ObjectiveWeights {
    double lambda = 0.5;  // in [0, 1]
};

struct RunMetrics {
    double mean_delay_ms = 0.0;  // over completed tasks only
    double dropped_ratio = 0.0;
    double objective = 0.0;
    double solver_runtime_ms = 0.0;
    bool any_completed = false;  // false means mean_delay_ms is 0 by convention
};

struct ConfidenceInterval {
    double mean = 0.0;
    double half_width = 0.0;
    double level = 0.0;
    int n_samples = 0;
};

/// A single validation failure; violations are data, not errors.
struct Violation {
    std::string rule;  // "cpu-overlap", "deadline", "start-before-arrival", ...
    int task_id = 0;   // 0 when not tied to one task
    int cpu_id = 0;    // 0 when not tied to one CPU
    std::string detail;
};

/// Joint objective of a schedule:
///
///   lambda * sum_assigned(waiting / slack) + (1 - lambda) * |dropped| / N
///
/// The delay term of a zero-slack task with zero waiting contributes 0.
/// Throws std::invalid_argument with "infeasible-term" if an assigned task
/// has slack = 0 but waiting > 0, and with "schedule/task-set mismatch" if
/// the schedule does not cover exactly the given tasks. Terms are accumulated
/// in task-set order so the result is deterministic.
double evaluate_objective(const Schedule& schedule, const std::vector<Task>& tasks,
                          const ObjectiveWeights& weights);

/// Checks all schedule invariants: exact coverage, CPU ids in range,
/// start within [arrival, deadline - proc_time], stored waiting consistent,
/// and pairwise disjoint execution intervals per CPU. Returns an empty list
/// iff the schedule is valid.
std::vector<Violation> validate_schedule(const Schedule& schedule,
                                         const std::vector<Task>& tasks);

/// Mean waiting over assigned tasks, dropped ratio and objective for a
/// schedule that must validate cleanly (throws std::invalid_argument
/// otherwise). solver_runtime_ms is left at 0; callers stamp it.
RunMetrics compute_metrics(const Schedule& schedule, const std::vector<Task>& tasks,
                           const ObjectiveWeights& weights);

/// Two-sided Student-t interval: mean +/- t_{(1+level)/2, n-1} * sd / sqrt(n).
/// Throws std::invalid_argument with "insufficient-samples" for fewer than
/// two samples and rejects levels outside (0, 1).
ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level);

}  // namespace edgesched
