#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edgesched/core.hpp"

namespace edgesched {

using Int128 = __int128;

/// Time-indexed 0-1 model of the joint delay / dropped-ratio objective.
/// Holds the instance in slot units; the full variable tableau is
/// materialized on demand (export, linearization checks) because the
/// branch-and-bound solver searches per-task (drop | cpu | start) decisions
/// directly over an identical feasible set.
struct MilpModel {
    std::vector<Task> tasks;  // times in ms, all multiples of slot_ms
    int m_cpus = 1;
    ObjectiveWeights weights;
    TimeMs slot_ms = 1;
    std::int64_t horizon_slots = 0;  // T; slots 0..T-1 cover every deadline

    struct SlotTask {
        std::int64_t arrival = 0;
        std::int64_t proc = 0;
        std::int64_t deadline = 0;
        std::int64_t latest_start = 0;  // deadline - proc
        std::int64_t slack = 0;         // W_i, may be negative for unschedulable tasks
    };
    std::vector<SlotTask> slot_tasks;  // parallel to tasks
};

/// Validates divisibility of all task times by slot_ms and derives the slot
/// domain. Throws std::invalid_argument on non-divisible times.
MilpModel build_model(const std::vector<Task>& tasks, int m_cpus, const ObjectiveWeights& weights,
                      TimeMs slot_ms);

/// Explicit variable/constraint form of the model, used by the LP exporter
/// and by tests that probe individual constraint blocks.
struct Tableau {
    struct Variable {
        std::string name;
        char kind;  // 'B' binary, 'I' general integer, 'C' continuous
        double lb = 0.0, ub = 0.0;
        bool fixed_zero = false;  // emitted as "name = 0" in Bounds
    };
    struct Row {
        std::string name;
        std::vector<std::pair<int, double>> terms;  // (variable index, coefficient)
        char sense;                                  // 'L' <=, 'E' =
        double rhs = 0.0;
    };
    std::vector<Variable> vars;
    std::vector<std::pair<int, double>> objective;  // (variable index, coefficient)
    double objective_constant = 0.0;
    std::vector<Row> rows;

    int find_var(const std::string& name) const;  // -1 when absent
};

/// Variables: x_i_j, tw_i, A_i_j, M_i_t_j, T_i_t_j plus start indicators
/// s_i_t_j that realize non-preemptive contiguity. Constraint blocks:
/// one-CPU assignment, product linearizations for A = x*tw and T = x*M,
/// arrival availability (M fixed to 0 before arrival), start-once links,
/// waiting-time definition, per-task slot allocation, per-slot CPU capacity.
Tableau materialize_tableau(const MilpModel& model);

/// Standard LP text format (Minimize / Subject To / Bounds / Binaries /
/// Generals). Byte-deterministic for a given model.
std::string export_lp(const MilpModel& model);

struct SolveBudget {
    std::uint64_t max_nodes = 0;  // 0 = unlimited
    double max_millis = 0.0;      // 0 = unlimited; wall-clock limits trade determinism
};

enum class SolveStatus { Optimal, BudgetExhausted };

struct SolveResult {
    Schedule schedule;
    double objective = 0.0;  // canonical double evaluation of `schedule`
    SolveStatus status = SolveStatus::BudgetExhausted;
    std::uint64_t nodes_explored = 0;

    /// When the instance fits the exact integer cost representation the
    /// solver compares incumbents in scaled integer arithmetic and reports
    /// the optimum as a reduced fraction, so equality checks against
    /// enumeration oracles carry no floating-point error.
    bool exact = false;
    Int128 objective_num = 0;
    Int128 objective_den = 1;
};

/// Depth-first branch and bound over per-task decisions (drop | (cpu,
/// start slot)), branching on the task with the earliest latest-start first.
/// The partial objective is an admissible bound since every remaining task
/// can at best contribute zero. With status Optimal the returned objective
/// is the global minimum of the model; among equal-cost optima the solver
/// returns the schedule whose per-task (assigned-flag, cpu, start) encoding
/// in task-id order is lexicographically smallest (assigned sorting before
/// dropped). On budget exhaustion the best incumbent is returned, which
/// never regresses below the warm start.
SolveResult solve_exact(const MilpModel& model, const SolveBudget& budget,
                        const Schedule* warm_start = nullptr);

/// Helper for printing Int128 objective values in tests and logs.
std::string int128_to_string(Int128 value);

}  // namespace edgesched
