#include "edgesched/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

namespace edgesched {

void normalize_schedule(Schedule& schedule) {
    std::sort(schedule.assignments.begin(), schedule.assignments.end(),
              [](const Assignment& a, const Assignment& b) { return a.task_id < b.task_id; });
    std::sort(schedule.dropped.begin(), schedule.dropped.end());
}

namespace {

std::unordered_map<int, const Task*> index_tasks(const std::vector<Task>& tasks) {
    std::unordered_map<int, const Task*> by_id;
    by_id.reserve(tasks.size());
    for (const Task& t : tasks) by_id.emplace(t.id, &t);
    return by_id;
}

// Coverage check shared by evaluate_objective and compute_metrics: every task
// id appears exactly once, either assigned or dropped, and no foreign ids.
void require_exact_cover(const Schedule& schedule, const std::vector<Task>& tasks) {
    std::unordered_map<int, int> seen;  // id -> count
    for (const Assignment& a : schedule.assignments) seen[a.task_id]++;
    for (int id : schedule.dropped) seen[id]++;
    if (seen.size() != tasks.size() || schedule.assignments.size() + schedule.dropped.size() != tasks.size())
        throw std::invalid_argument("schedule/task-set mismatch: coverage differs from task set");
    for (const Task& t : tasks) {
        auto it = seen.find(t.id);
        if (it == seen.end() || it->second != 1)
            throw std::invalid_argument("schedule/task-set mismatch: task " + std::to_string(t.id) +
                                        " not covered exactly once");
    }
}

}  // namespace

double evaluate_objective(const Schedule& schedule, const std::vector<Task>& tasks,
                          const ObjectiveWeights& weights) {
    if (weights.lambda < 0.0 || weights.lambda > 1.0)
        throw std::invalid_argument("lambda must be in [0, 1]");
    require_exact_cover(schedule, tasks);
    if (tasks.empty()) return 0.0;

    std::unordered_map<int, const Assignment*> assigned;
    assigned.reserve(schedule.assignments.size());
    for (const Assignment& a : schedule.assignments) assigned.emplace(a.task_id, &a);

    // Accumulate in task-set order so repeated evaluations of the same
    // schedule are bit-identical.
    double delay_sum = 0.0;
    for (const Task& t : tasks) {
        auto it = assigned.find(t.id);
        if (it == assigned.end()) continue;
        const Assignment& a = *it->second;
        const TimeMs slack = t.slack();
        if (a.waiting == 0) continue;  // just-in-time tasks contribute 0, even at slack 0
        if (slack <= 0)
            throw std::invalid_argument("infeasible-term: task " + std::to_string(t.id) +
                                        " has zero slack but positive waiting");
        delay_sum += static_cast<double>(a.waiting) / static_cast<double>(slack);
    }
    const double dropped_ratio =
        static_cast<double>(schedule.dropped.size()) / static_cast<double>(tasks.size());
    return weights.lambda * delay_sum + (1.0 - weights.lambda) * dropped_ratio;
}

std::vector<Violation> validate_schedule(const Schedule& schedule, const std::vector<Task>& tasks) {
    std::vector<Violation> out;
    auto by_id = index_tasks(tasks);

    std::unordered_map<int, int> seen;
    for (const Assignment& a : schedule.assignments) seen[a.task_id]++;
    for (int id : schedule.dropped) seen[id]++;
    for (const Task& t : tasks) {
        auto it = seen.find(t.id);
        if (it == seen.end())
            out.push_back({"coverage-missing", t.id, 0, "task neither assigned nor dropped"});
        else if (it->second > 1)
            out.push_back({"coverage-duplicate", t.id, 0, "task appears more than once"});
    }
    for (const auto& [id, count] : seen) {
        (void)count;
        if (!by_id.count(id)) out.push_back({"unknown-task", id, 0, "id not in task set"});
    }

    std::map<int, std::vector<const Assignment*>> per_cpu;
    for (const Assignment& a : schedule.assignments) {
        if (a.cpu_id < 1 || a.cpu_id > schedule.m_cpus) {
            out.push_back({"cpu-range", a.task_id, a.cpu_id, "cpu id outside [1, m_cpus]"});
            continue;
        }
        per_cpu[a.cpu_id].push_back(&a);

        auto it = by_id.find(a.task_id);
        if (it == by_id.end()) continue;  // already reported as unknown-task
        const Task& t = *it->second;
        if (a.start < t.arrival)
            out.push_back({"start-before-arrival", a.task_id, a.cpu_id,
                           "start " + std::to_string(a.start) + " < arrival " + std::to_string(t.arrival)});
        if (a.start + t.proc_time > t.deadline)
            out.push_back({"deadline", a.task_id, a.cpu_id,
                           "completion " + std::to_string(a.start + t.proc_time) + " > deadline " +
                               std::to_string(t.deadline)});
        if (a.waiting != a.start - t.arrival)
            out.push_back({"waiting-mismatch", a.task_id, a.cpu_id,
                           "stored waiting " + std::to_string(a.waiting) + " != start - arrival"});
    }

    for (auto& [cpu, list] : per_cpu) {
        std::sort(list.begin(), list.end(), [&](const Assignment* a, const Assignment* b) {
            if (a->start != b->start) return a->start < b->start;
            return a->task_id < b->task_id;
        });
        for (std::size_t k = 1; k < list.size(); ++k) {
            const Assignment& prev = *list[k - 1];
            const Assignment& cur = *list[k];
            auto pt = by_id.find(prev.task_id);
            if (pt == by_id.end()) continue;
            if (prev.start + pt->second->proc_time > cur.start) {
                std::ostringstream msg;
                msg << "tasks " << prev.task_id << " and " << cur.task_id << " overlap on cpu " << cpu;
                out.push_back({"cpu-overlap", cur.task_id, cpu, msg.str()});
            }
        }
    }
    return out;
}

RunMetrics compute_metrics(const Schedule& schedule, const std::vector<Task>& tasks,
                           const ObjectiveWeights& weights) {
    const auto violations = validate_schedule(schedule, tasks);
    if (!violations.empty())
        throw std::invalid_argument("invalid schedule: " + violations.front().rule + " (" +
                                    violations.front().detail + ")");
    RunMetrics m;
    if (!schedule.assignments.empty()) {
        double sum = 0.0;
        for (const Assignment& a : schedule.assignments) sum += static_cast<double>(a.waiting);
        m.mean_delay_ms = sum / static_cast<double>(schedule.assignments.size());
        m.any_completed = true;
    }
    m.dropped_ratio = tasks.empty() ? 0.0
                                    : static_cast<double>(schedule.dropped.size()) /
                                          static_cast<double>(tasks.size());
    m.objective = evaluate_objective(schedule, tasks, weights);
    return m;
}

ConfidenceInterval confidence_interval(const std::vector<double>& samples, double level) {
    if (samples.size() < 2) throw std::invalid_argument("insufficient-samples: need at least 2");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must be in (0, 1)");

    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));

    boost::math::students_t dist(n - 1.0);
    const double t = boost::math::quantile(dist, (1.0 + level) / 2.0);

    ConfidenceInterval ci;
    ci.mean = mean;
    ci.half_width = t * sd / std::sqrt(n);
    ci.level = level;
    ci.n_samples = static_cast<int>(samples.size());
    return ci;
}

}  // namespace edgesched
