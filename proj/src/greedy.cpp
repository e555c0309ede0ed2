#include "edgesched/greedy.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace edgesched {

namespace {

constexpr TimeMs kNever = std::numeric_limits<TimeMs>::max();

// Event-driven dispatcher shared by FCFS and STF. Events happen only at task
// arrivals and CPU completions; expiries never enable a dispatch, so the
// dropped set is identical whether expired tasks are purged eagerly or at the
// next event. ReadyOrder is a strict weak order over task indices defining
// queue priority.
template <typename ReadyOrder>
Schedule run_dispatcher(const std::vector<Task>& tasks, int m_cpus, ReadyOrder order) {
    if (m_cpus < 1) throw std::invalid_argument("m_cpus must be >= 1");

    std::vector<std::size_t> by_arrival(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) by_arrival[i] = i;
    std::sort(by_arrival.begin(), by_arrival.end(), [&](std::size_t a, std::size_t b) {
        if (tasks[a].arrival != tasks[b].arrival) return tasks[a].arrival < tasks[b].arrival;
        return tasks[a].id < tasks[b].id;
    });

    Schedule sched;
    sched.m_cpus = m_cpus;

    std::vector<TimeMs> cpu_free(static_cast<std::size_t>(m_cpus), 0);
    std::set<std::size_t, ReadyOrder> ready(order);
    // Secondary index over the queue by (latest_start, index) for O(log n) purges.
    auto expiry_less = [&](std::size_t a, std::size_t b) {
        if (tasks[a].latest_start() != tasks[b].latest_start())
            return tasks[a].latest_start() < tasks[b].latest_start();
        return a < b;
    };
    std::set<std::size_t, decltype(expiry_less)> by_expiry(expiry_less);

    std::size_t next_arrival = 0;
    TimeMs now = 0;

    auto purge_expired = [&](TimeMs t) {
        while (!by_expiry.empty()) {
            std::size_t idx = *by_expiry.begin();
            if (tasks[idx].latest_start() >= t) break;
            by_expiry.erase(by_expiry.begin());
            ready.erase(idx);
            sched.dropped.push_back(tasks[idx].id);
        }
    };

    while (next_arrival < tasks.size() || !ready.empty()) {
        // Admit everything that has arrived by now.
        while (next_arrival < tasks.size() && tasks[by_arrival[next_arrival]].arrival <= now) {
            std::size_t idx = by_arrival[next_arrival++];
            if (tasks[idx].latest_start() < now) {
                sched.dropped.push_back(tasks[idx].id);  // expired on arrival (negative slack)
            } else {
                ready.insert(idx);
                by_expiry.insert(idx);
            }
        }
        purge_expired(now);

        // Dispatch heads while a CPU is free; lowest cpu id wins ties.
        while (!ready.empty()) {
            int free_cpu = -1;
            for (int c = 0; c < m_cpus; ++c)
                if (cpu_free[static_cast<std::size_t>(c)] <= now) { free_cpu = c; break; }
            if (free_cpu < 0) break;
            std::size_t idx = *ready.begin();
            ready.erase(ready.begin());
            by_expiry.erase(idx);
            const Task& t = tasks[idx];
            sched.assignments.push_back({t.id, free_cpu + 1, now, now - t.arrival});
            cpu_free[static_cast<std::size_t>(free_cpu)] = now + t.proc_time;
        }

        // Advance to the next event: an arrival or a completion that can
        // actually dispatch something.
        TimeMs next_event = kNever;
        if (next_arrival < tasks.size()) next_event = tasks[by_arrival[next_arrival]].arrival;
        if (!ready.empty()) {
            for (int c = 0; c < m_cpus; ++c) {
                TimeMs f = cpu_free[static_cast<std::size_t>(c)];
                if (f > now) next_event = std::min(next_event, f);
            }
        }
        if (next_event == kNever) {
            // No future arrivals and nothing dispatchable: whatever remains
            // queued can never start (all CPUs idle means the queue is empty,
            // so this only happens when the queue already drained).
            break;
        }
        now = next_event;
        purge_expired(now);
    }

    // Anything still pending past the last event expired waiting.
    for (std::size_t idx : by_expiry) sched.dropped.push_back(tasks[idx].id);
    while (next_arrival < tasks.size()) sched.dropped.push_back(tasks[by_arrival[next_arrival++]].id);

    normalize_schedule(sched);
    return sched;
}

}  // namespace

Schedule schedule_fcfs(const std::vector<Task>& tasks, int m_cpus) {
    auto fcfs_order = [&tasks](std::size_t a, std::size_t b) {
        if (tasks[a].arrival != tasks[b].arrival) return tasks[a].arrival < tasks[b].arrival;
        return tasks[a].id < tasks[b].id;
    };
    return run_dispatcher(tasks, m_cpus, fcfs_order);
}

Schedule schedule_stf(const std::vector<Task>& tasks, int m_cpus) {
    auto stf_order = [&tasks](std::size_t a, std::size_t b) {
        if (tasks[a].proc_time != tasks[b].proc_time) return tasks[a].proc_time < tasks[b].proc_time;
        if (tasks[a].arrival != tasks[b].arrival) return tasks[a].arrival < tasks[b].arrival;
        return tasks[a].id < tasks[b].id;
    };
    return run_dispatcher(tasks, m_cpus, stf_order);
}

}  // namespace edgesched
