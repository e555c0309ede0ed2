#pragma once

#include <vector>

#include "edgesched/core.hpp"

namespace edgesched {

/// First Come First Serve over m identical CPUs: a single queue ordered by
/// (arrival, id); whenever a CPU is free the head is dispatched on the lowest
/// free cpu id. A queued task is dropped the instant its latest start passes.
Schedule schedule_fcfs(const std::vector<Task>& tasks, int m_cpus);

/// Shortest Task First: same engine, but the ready queue is ordered by
/// (proc_time, arrival, id). Same drop rule.
Schedule schedule_stf(const std::vector<Task>& tasks, int m_cpus);

}  // namespace edgesched
