#include "edgesched/milp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace edgesched {

std::string int128_to_string(Int128 value) {
    if (value == 0) return "0";
    const bool neg = value < 0;
    unsigned __int128 v = neg ? static_cast<unsigned __int128>(-value) : static_cast<unsigned __int128>(value);
    std::string out;
    while (v > 0) {
        out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    if (neg) out.push_back('-');
    std::reverse(out.begin(), out.end());
    return out;
}

MilpModel build_model(const std::vector<Task>& tasks, int m_cpus, const ObjectiveWeights& weights,
                      TimeMs slot_ms) {
    if (m_cpus < 1) throw std::invalid_argument("m_cpus must be >= 1");
    if (slot_ms < 1) throw std::invalid_argument("slot_ms must be >= 1");
    if (weights.lambda < 0.0 || weights.lambda > 1.0)
        throw std::invalid_argument("lambda must be in [0, 1]");

    MilpModel model;
    model.m_cpus = m_cpus;
    model.weights = weights;
    model.slot_ms = slot_ms;
    model.tasks = tasks;
    model.slot_tasks.reserve(tasks.size());
    for (const Task& t : tasks) {
        if (t.proc_time <= 0) throw std::invalid_argument("proc_time must be positive");
        if (t.arrival % slot_ms != 0 || t.proc_time % slot_ms != 0 || t.deadline % slot_ms != 0)
            throw std::invalid_argument("task times must be divisible by slot_ms (task " +
                                        std::to_string(t.id) + ")");
        MilpModel::SlotTask st;
        st.arrival = t.arrival / slot_ms;
        st.proc = t.proc_time / slot_ms;
        st.deadline = t.deadline / slot_ms;
        st.latest_start = st.deadline - st.proc;
        st.slack = st.deadline - st.arrival - st.proc;
        model.slot_tasks.push_back(st);
        model.horizon_slots = std::max(model.horizon_slots, st.deadline);
    }
    return model;
}

// ---------------------------------------------------------------------------
// Exact cost arithmetic
//
// The objective of a complete schedule is
//   lambda * sum(w_i / W_i) + (1 - lambda) * |dropped| / N .
// lambda is a dyadic rational p/q (exact for any IEEE double), every W_i is
// an integer, so multiplying through by  SCALE = q * N * lcm(W_i > 0)  turns
// every per-task contribution into an integer. When SCALE and the worst-case
// total fit in __int128 the search compares incumbents without rounding.
// ---------------------------------------------------------------------------

namespace {

Int128 gcd128(Int128 a, Int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        Int128 r = a % b;
        a = b;
        b = r;
    }
    return a;
}

struct LambdaRational {
    std::int64_t num = 0, den = 1;
    bool ok = false;
};

LambdaRational lambda_exact(double lambda) {
    LambdaRational r;
    if (lambda <= 0.0) return {0, 1, true};
    if (lambda >= 1.0) return {1, 1, true};
    int e = 0;
    const double m = std::frexp(lambda, &e);  // lambda = m * 2^e, m in [0.5, 1)
    std::int64_t num = static_cast<std::int64_t>(std::llround(std::ldexp(m, 53)));
    int shift = 53 - e;
    while (num % 2 == 0 && shift > 0) {
        num /= 2;
        --shift;
    }
    if (shift > 62) return r;  // subnormal lambda; exact mode not worth it
    return {num, std::int64_t{1} << shift, true};
}

bool mul128(Int128 a, Int128 b, Int128& out) { return !__builtin_mul_overflow(a, b, &out); }
bool add128(Int128 a, Int128 b, Int128& out) { return !__builtin_add_overflow(a, b, &out); }

struct ExactCostModel {
    using Cost = Int128;
    static constexpr bool kFullStarts = true;

    Int128 scale = 1;
    Int128 drop = 0;
    std::vector<Int128> unit;  // per task index; cost of one slot of waiting

    Cost zero() const { return 0; }
    Cost drop_cost(std::size_t) const { return drop; }
    Cost assign_cost(std::size_t task, std::int64_t wait_slots) const {
        return unit[task] * wait_slots;
    }
};

// Builds the exact model if everything fits; returns false on overflow.
bool make_exact_costs(const MilpModel& model, ExactCostModel& out) {
    const auto lr = lambda_exact(model.weights.lambda);
    if (!lr.ok || model.tasks.empty()) return lr.ok && model.tasks.empty();

    Int128 lcm = 1;
    for (const auto& st : model.slot_tasks) {
        if (st.slack <= 0) continue;
        Int128 g = gcd128(lcm, st.slack);
        Int128 tmp;
        if (!mul128(lcm / g, st.slack, tmp)) return false;
        lcm = tmp;
    }
    Int128 scale;
    if (!mul128(lcm, static_cast<Int128>(lr.den) * static_cast<Int128>(model.tasks.size()), scale))
        return false;

    out.scale = scale;
    out.drop = (scale / (static_cast<Int128>(lr.den) * static_cast<Int128>(model.tasks.size()))) *
               (lr.den - lr.num);
    out.unit.assign(model.tasks.size(), 0);

    Int128 worst_total = 0;
    for (std::size_t i = 0; i < model.slot_tasks.size(); ++i) {
        const auto& st = model.slot_tasks[i];
        Int128 task_worst = out.drop;
        if (st.slack > 0) {
            Int128 per_slot = scale / (static_cast<Int128>(lr.den) * static_cast<Int128>(st.slack));
            if (!mul128(per_slot, lr.num, out.unit[i])) return false;
            Int128 max_wait_cost;
            if (!mul128(out.unit[i], st.slack, max_wait_cost)) return false;
            task_worst = std::max(task_worst, max_wait_cost);
        }
        if (!add128(worst_total, task_worst, worst_total)) return false;
    }
    return true;
}

struct DoubleCostModel {
    using Cost = double;
    static constexpr bool kFullStarts = false;

    double lambda = 0.5;
    double drop = 0.0;
    const std::vector<MilpModel::SlotTask>* slot_tasks = nullptr;

    Cost zero() const { return 0.0; }
    Cost drop_cost(std::size_t) const { return drop; }
    Cost assign_cost(std::size_t task, std::int64_t wait_slots) const {
        if (wait_slots == 0) return 0.0;
        return lambda * static_cast<double>(wait_slots) /
               static_cast<double>((*slot_tasks)[task].slack);
    }
};

// ---------------------------------------------------------------------------
// Branch and bound
// ---------------------------------------------------------------------------

struct Decision {
    bool dropped = true;
    int cpu = 0;             // 1-based when assigned
    std::int64_t start = 0;  // slot
};

using Interval = std::pair<std::int64_t, std::int64_t>;  // [start, end)

template <typename CostModel>
class Searcher {
  public:
    using Cost = typename CostModel::Cost;

    Searcher(const MilpModel& model, const CostModel& costs, const SolveBudget& budget,
             std::uint64_t& node_counter)
        : model_(model), costs_(costs), budget_(budget), nodes_(node_counter) {
        occupancy_.resize(static_cast<std::size_t>(model.m_cpus));
        decisions_.resize(model.tasks.size());
        if (budget_.max_millis > 0.0)
            deadline_ = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                            std::chrono::duration<double, std::milli>(budget_.max_millis));
    }

    bool aborted() const { return aborted_; }

    // Pass 1: minimize. Branch order: earliest latest-start first. Children
    // ordered by marginal cost so good incumbents appear early. Returns the
    // optimal cost through `incumbent` when not aborted.
    void minimize(Cost& incumbent, std::vector<Decision>& best, bool have_incumbent) {
        incumbent_ = incumbent;
        have_incumbent_ = have_incumbent;
        best_ = &best;
        order_.resize(model_.tasks.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            if (model_.slot_tasks[a].latest_start != model_.slot_tasks[b].latest_start)
                return model_.slot_tasks[a].latest_start < model_.slot_tasks[b].latest_start;
            return model_.tasks[a].id < model_.tasks[b].id;
        });
        dfs_min(0, costs_.zero());
        incumbent = incumbent_;
    }

    // Pass 2: among schedules of cost exactly `target`, find the one whose
    // per-task (assigned, cpu, start) encoding in task-id order is
    // lexicographically smallest. Options are generated in that key order, so
    // the first complete schedule reached is the canonical one.
    bool canonicalize(Cost target, std::vector<Decision>& out) {
        target_ = target;
        best_ = &out;
        order_.resize(model_.tasks.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        std::sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
            return model_.tasks[a].id < model_.tasks[b].id;
        });
        return dfs_canonical(0, costs_.zero());
    }

  private:
    bool tick() {
        ++nodes_;
        if (budget_.max_nodes > 0 && nodes_ > budget_.max_nodes) aborted_ = true;
        if (budget_.max_millis > 0.0 && (nodes_ % 4096) == 0 &&
            std::chrono::steady_clock::now() > deadline_)
            aborted_ = true;
        return !aborted_;
    }

    // Earliest feasible start of `task` on `cpu` given current occupancy;
    // -1 when nothing fits before the latest start.
    std::int64_t earliest_start(std::size_t task, std::size_t cpu) const {
        const auto& st = model_.slot_tasks[task];
        if (st.latest_start < st.arrival) return -1;
        std::int64_t candidate = st.arrival;
        for (const Interval& iv : occupancy_[cpu]) {
            if (iv.second <= candidate) continue;
            if (candidate + st.proc <= iv.first) break;
            candidate = iv.second;
            if (candidate > st.latest_start) return -1;
        }
        return candidate <= st.latest_start ? candidate : -1;
    }

    // Admissible remainder bound: each undecided task pays at least the
    // cheaper of dropping and its best wait against the current occupancy
    // (future placements only shrink the free space).
    Cost remainder_bound(std::size_t pos) const {
        Cost sum = costs_.zero();
        for (std::size_t k = pos; k < order_.size(); ++k) {
            const std::size_t task = order_[k];
            Cost best = costs_.drop_cost(task);
            for (std::size_t cpu = 0; cpu < occupancy_.size(); ++cpu) {
                const std::int64_t s = earliest_start(task, cpu);
                if (s < 0) continue;
                Cost c = costs_.assign_cost(task, s - model_.slot_tasks[task].arrival);
                if (c < best) best = c;
                if (!(costs_.zero() < best)) break;  // cannot beat zero
            }
            sum += best;
        }
        return sum;
    }

    struct Option {
        Cost cost;
        bool is_drop;
        int cpu;  // 0-based
        std::int64_t start;
    };

    void collect_options(std::size_t task, std::vector<Option>& out) const {
        out.clear();
        const auto& st = model_.slot_tasks[task];
        for (std::size_t cpu = 0; cpu < occupancy_.size(); ++cpu) {
            if (st.latest_start < st.arrival) break;
            if constexpr (CostModel::kFullStarts) {
                // Every feasible slot in [arrival, latest_start].
                std::int64_t cursor = st.arrival;
                for (const Interval& iv : occupancy_[cpu]) {
                    if (iv.second <= cursor) continue;
                    for (std::int64_t s = cursor; s + st.proc <= iv.first && s <= st.latest_start; ++s)
                        out.push_back({costs_.assign_cost(task, s - st.arrival), false,
                                       static_cast<int>(cpu), s});
                    cursor = std::max(cursor, iv.second);
                    if (cursor > st.latest_start) break;
                }
                for (std::int64_t s = cursor; s <= st.latest_start; ++s)
                    out.push_back(
                        {costs_.assign_cost(task, s - st.arrival), false, static_cast<int>(cpu), s});
            } else {
                // Earliest start per free gap: dominant for the regular
                // objective and small enough for large instances.
                std::int64_t cursor = st.arrival;
                for (const Interval& iv : occupancy_[cpu]) {
                    if (iv.second <= cursor) continue;
                    if (cursor + st.proc <= iv.first && cursor <= st.latest_start)
                        out.push_back({costs_.assign_cost(task, cursor - st.arrival), false,
                                       static_cast<int>(cpu), cursor});
                    cursor = std::max(cursor, iv.second);
                    if (cursor > st.latest_start) break;
                }
                if (cursor <= st.latest_start)
                    out.push_back({costs_.assign_cost(task, cursor - st.arrival), false,
                                   static_cast<int>(cpu), cursor});
            }
        }
        out.push_back({costs_.drop_cost(task), true, 0, 0});
    }

    void apply(std::size_t task, const Option& opt) {
        if (opt.is_drop) {
            decisions_[task] = {true, 0, 0};
            return;
        }
        decisions_[task] = {false, opt.cpu + 1, opt.start};
        auto& occ = occupancy_[static_cast<std::size_t>(opt.cpu)];
        const Interval iv{opt.start, opt.start + model_.slot_tasks[task].proc};
        occ.insert(std::lower_bound(occ.begin(), occ.end(), iv), iv);
    }

    void undo(std::size_t task, const Option& opt) {
        if (opt.is_drop) return;
        auto& occ = occupancy_[static_cast<std::size_t>(opt.cpu)];
        const Interval iv{opt.start, opt.start + model_.slot_tasks[task].proc};
        occ.erase(std::lower_bound(occ.begin(), occ.end(), iv));
    }

    void dfs_min(std::size_t pos, Cost cost) {
        if (!tick()) return;
        if (pos == order_.size()) {
            if (!have_incumbent_ || cost < incumbent_) {
                incumbent_ = cost;
                have_incumbent_ = true;
                *best_ = decisions_;
            }
            return;
        }
        if (have_incumbent_) {
            Cost bound = cost + remainder_bound(pos);
            if (!(bound < incumbent_)) return;
        }
        const std::size_t task = order_[pos];
        std::vector<Option> options;
        collect_options(task, options);
        std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
            if (a.cost != b.cost) return a.cost < b.cost;
            if (a.is_drop != b.is_drop) return !a.is_drop;
            if (a.cpu != b.cpu) return a.cpu < b.cpu;
            return a.start < b.start;
        });
        for (const Option& opt : options) {
            if (aborted_) return;
            const Cost child = cost + opt.cost;
            if (have_incumbent_ && !(child < incumbent_)) break;  // options sorted by cost
            apply(task, opt);
            dfs_min(pos + 1, child);
            undo(task, opt);
        }
    }

    bool dfs_canonical(std::size_t pos, Cost cost) {
        if (!tick()) return false;
        if (pos == order_.size()) {
            *best_ = decisions_;
            return true;  // cost == target by the pruning invariant
        }
        if (target_ < cost + remainder_bound(pos)) return false;
        const std::size_t task = order_[pos];
        std::vector<Option> options;
        collect_options(task, options);
        // Canonical key order: assignments by (cpu, start), drop last.
        std::sort(options.begin(), options.end(), [](const Option& a, const Option& b) {
            if (a.is_drop != b.is_drop) return !a.is_drop;
            if (a.cpu != b.cpu) return a.cpu < b.cpu;
            return a.start < b.start;
        });
        for (const Option& opt : options) {
            if (aborted_) return false;
            const Cost child = cost + opt.cost;
            if (target_ < child) continue;
            apply(task, opt);
            const bool done = dfs_canonical(pos + 1, child);
            undo(task, opt);
            if (done) return true;
        }
        return false;
    }

    const MilpModel& model_;
    const CostModel& costs_;
    const SolveBudget& budget_;
    std::uint64_t& nodes_;
    bool aborted_ = false;
    std::chrono::steady_clock::time_point deadline_{};

    std::vector<std::vector<Interval>> occupancy_;
    std::vector<Decision> decisions_;
    std::vector<std::size_t> order_;
    std::vector<Decision>* best_ = nullptr;
    Cost incumbent_{};
    bool have_incumbent_ = false;
    Cost target_{};
};

Schedule decisions_to_schedule(const MilpModel& model, const std::vector<Decision>& decisions) {
    Schedule sched;
    sched.m_cpus = model.m_cpus;
    for (std::size_t i = 0; i < decisions.size(); ++i) {
        const Task& t = model.tasks[i];
        if (decisions[i].dropped) {
            sched.dropped.push_back(t.id);
        } else {
            const TimeMs start = decisions[i].start * model.slot_ms;
            sched.assignments.push_back({t.id, decisions[i].cpu, start, start - t.arrival});
        }
    }
    normalize_schedule(sched);
    return sched;
}

template <typename CostModel>
typename CostModel::Cost schedule_cost(const MilpModel& model, const CostModel& costs,
                                       const Schedule& schedule) {
    typename CostModel::Cost total = costs.zero();
    std::vector<bool> assigned(model.tasks.size(), false);
    for (const Assignment& a : schedule.assignments) {
        for (std::size_t i = 0; i < model.tasks.size(); ++i) {
            if (model.tasks[i].id == a.task_id) {
                total += costs.assign_cost(i, a.waiting / model.slot_ms);
                assigned[i] = true;
                break;
            }
        }
    }
    for (std::size_t i = 0; i < model.tasks.size(); ++i)
        if (!assigned[i]) total += costs.drop_cost(i);
    return total;
}

std::vector<Decision> schedule_to_decisions(const MilpModel& model, const Schedule& schedule) {
    std::vector<Decision> out(model.tasks.size());
    for (const Assignment& a : schedule.assignments) {
        for (std::size_t i = 0; i < model.tasks.size(); ++i) {
            if (model.tasks[i].id == a.task_id) {
                out[i] = {false, a.cpu_id, a.start / model.slot_ms};
                break;
            }
        }
    }
    return out;
}

}  // namespace

SolveResult solve_exact(const MilpModel& model, const SolveBudget& budget, const Schedule* warm_start) {
    SolveResult result;
    std::uint64_t nodes = 0;

    if (warm_start) {
        const auto violations = validate_schedule(*warm_start, model.tasks);
        if (!violations.empty())
            throw std::invalid_argument("warm start does not validate: " + violations.front().rule);
        for (const Assignment& a : warm_start->assignments)
            if (a.start % model.slot_ms != 0)
                throw std::invalid_argument("warm start not aligned to slot grid");
    }

    if (model.tasks.empty()) {
        result.schedule.m_cpus = model.m_cpus;
        result.status = SolveStatus::Optimal;
        result.exact = true;
        result.objective = 0.0;
        result.nodes_explored = 0;
        return result;
    }

    ExactCostModel exact;
    if (make_exact_costs(model, exact)) {
        Searcher<ExactCostModel> search(model, exact, budget, nodes);

        // Initial incumbent: warm start when given, otherwise the always
        // feasible all-dropped schedule.
        std::vector<Decision> best(model.tasks.size());
        Int128 incumbent = 0;
        if (warm_start) {
            best = schedule_to_decisions(model, *warm_start);
            incumbent = schedule_cost(model, exact, *warm_start);
        } else {
            incumbent = exact.drop * static_cast<Int128>(model.tasks.size());
        }

        search.minimize(incumbent, best, true);
        result.nodes_explored = nodes;
        result.exact = true;
        if (!search.aborted()) {
            result.status = SolveStatus::Optimal;
            Searcher<ExactCostModel> canon(model, exact, budget, nodes);
            std::vector<Decision> canonical;
            if (canon.canonicalize(incumbent, canonical)) best = canonical;
            result.nodes_explored = nodes;
        } else {
            result.status = SolveStatus::BudgetExhausted;
        }
        result.schedule = decisions_to_schedule(model, best);
        const Int128 g = gcd128(incumbent == 0 ? exact.scale : incumbent, exact.scale);
        result.objective_num = incumbent / g;
        result.objective_den = exact.scale / g;
    } else {
        DoubleCostModel costs;
        costs.lambda = model.weights.lambda;
        costs.drop = (1.0 - model.weights.lambda) / static_cast<double>(model.tasks.size());
        costs.slot_tasks = &model.slot_tasks;
        Searcher<DoubleCostModel> search(model, costs, budget, nodes);

        std::vector<Decision> best(model.tasks.size());
        double incumbent = 0.0;
        if (warm_start) {
            best = schedule_to_decisions(model, *warm_start);
            incumbent = schedule_cost(model, costs, *warm_start);
        } else {
            incumbent = 1.0 - model.weights.lambda;  // all dropped
        }
        search.minimize(incumbent, best, true);
        result.nodes_explored = nodes;
        result.exact = false;
        // Restricted start enumeration: completion of the search does not
        // certify optimality, so the status stays BudgetExhausted.
        result.status = SolveStatus::BudgetExhausted;
        result.schedule = decisions_to_schedule(model, best);
    }

    result.objective = evaluate_objective(result.schedule, model.tasks, model.weights);
    if (warm_start) {
        // The incumbent comparisons run on accumulated path costs; re-check
        // against the warm start on the canonical evaluation so callers can
        // rely on never regressing below it.
        const double warm_objective = evaluate_objective(*warm_start, model.tasks, model.weights);
        if (result.objective > warm_objective) {
            result.schedule = *warm_start;
            normalize_schedule(result.schedule);
            result.objective = warm_objective;
            if (result.exact) {
                ExactCostModel check;
                if (make_exact_costs(model, check)) {
                    const Int128 cost = schedule_cost(model, check, result.schedule);
                    const Int128 g = gcd128(cost == 0 ? check.scale : cost, check.scale);
                    result.objective_num = cost / g;
                    result.objective_den = check.scale / g;
                }
            }
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Tableau + LP export
// ---------------------------------------------------------------------------

int Tableau::find_var(const std::string& name) const {
    for (std::size_t i = 0; i < vars.size(); ++i)
        if (vars[i].name == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, end);
}

}  // namespace

Tableau materialize_tableau(const MilpModel& model) {
    Tableau tb;
    const std::size_t n = model.tasks.size();
    const int m = model.m_cpus;
    const std::int64_t horizon = model.horizon_slots;

    std::vector<std::size_t> by_id(n);
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    std::sort(by_id.begin(), by_id.end(),
              [&](std::size_t a, std::size_t b) { return model.tasks[a].id < model.tasks[b].id; });

    auto add_var = [&](std::string name, char kind, double lb, double ub, bool fixed0) {
        tb.vars.push_back({std::move(name), kind, lb, ub, fixed0});
        return static_cast<int>(tb.vars.size() - 1);
    };
    auto id_of = [&](std::size_t i) { return std::to_string(model.tasks[i].id); };

    // Variable families, each indexed (task, [slot,] cpu).
    std::vector<std::vector<int>> x(n), A(n);
    std::vector<int> tw(n);
    auto grid = [&](std::size_t) { return std::vector<std::vector<int>>(static_cast<std::size_t>(horizon), std::vector<int>(static_cast<std::size_t>(m), -1)); };
    std::vector<std::vector<std::vector<int>>> Mv(n), Tv(n), Sv(n);

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        x[i].resize(static_cast<std::size_t>(m));
        for (int j = 1; j <= m; ++j)
            x[i][static_cast<std::size_t>(j - 1)] =
                add_var("x_" + id_of(i) + "_" + std::to_string(j), 'B', 0, 1, false);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const double w = static_cast<double>(std::max<std::int64_t>(0, model.slot_tasks[i].slack));
        tw[i] = add_var("tw_" + id_of(i), 'I', 0, w, false);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const double w = static_cast<double>(std::max<std::int64_t>(0, model.slot_tasks[i].slack));
        A[i].resize(static_cast<std::size_t>(m));
        for (int j = 1; j <= m; ++j)
            A[i][static_cast<std::size_t>(j - 1)] =
                add_var("A_" + id_of(i) + "_" + std::to_string(j), 'I', 0, w, false);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        Mv[i] = grid(i);
        for (std::int64_t t = 0; t < horizon; ++t)
            for (int j = 1; j <= m; ++j)
                Mv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j - 1)] = add_var(
                    "M_" + id_of(i) + "_" + std::to_string(t) + "_" + std::to_string(j), 'B', 0, 1,
                    t < model.slot_tasks[i].arrival);  // availability: no slot before arrival
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        Tv[i] = grid(i);
        for (std::int64_t t = 0; t < horizon; ++t)
            for (int j = 1; j <= m; ++j)
                Tv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j - 1)] = add_var(
                    "T_" + id_of(i) + "_" + std::to_string(t) + "_" + std::to_string(j), 'B', 0, 1, false);
    }
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        Sv[i] = grid(i);
        const auto& st = model.slot_tasks[i];
        for (std::int64_t t = st.arrival; t <= st.latest_start; ++t)
            for (int j = 1; j <= m; ++j)
                Sv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j - 1)] = add_var(
                    "s_" + id_of(i) + "_" + std::to_string(t) + "_" + std::to_string(j), 'B', 0, 1, false);
    }

    // Objective: lambda * A_ij / W_i + (1 - lambda) * (N - sum x_ij) / N.
    const double lambda = model.weights.lambda;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const std::int64_t w = model.slot_tasks[i].slack;
        for (int j = 0; j < m; ++j) {
            if (w > 0 && lambda > 0.0)
                tb.objective.push_back({A[i][static_cast<std::size_t>(j)], lambda / static_cast<double>(w)});
            if (lambda < 1.0)
                tb.objective.push_back(
                    {x[i][static_cast<std::size_t>(j)], -(1.0 - lambda) / static_cast<double>(n)});
        }
    }
    tb.objective_constant = 1.0 - lambda;

    auto add_row = [&](std::string name, std::vector<std::pair<int, double>> terms, char sense,
                       double rhs) { tb.rows.push_back({std::move(name), std::move(terms), sense, rhs}); };

    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        std::vector<std::pair<int, double>> terms;
        for (int j = 0; j < m; ++j) terms.push_back({x[i][static_cast<std::size_t>(j)], 1.0});
        add_row("assign_" + id_of(i), std::move(terms), 'L', 1.0);
    }

    // A_ij = x_ij * tw_i via the big-M triple with W_i as the constant.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const double w = static_cast<double>(std::max<std::int64_t>(0, model.slot_tasks[i].slack));
        for (int j = 0; j < m; ++j) {
            const std::string suffix = "_" + id_of(i) + "_" + std::to_string(j + 1);
            const int aij = A[i][static_cast<std::size_t>(j)];
            const int xij = x[i][static_cast<std::size_t>(j)];
            add_row("linA1" + suffix, {{aij, 1.0}, {xij, -w}}, 'L', 0.0);
            add_row("linA2" + suffix, {{aij, 1.0}, {tw[i], -1.0}}, 'L', 0.0);
            add_row("linA3" + suffix, {{xij, w}, {tw[i], 1.0}, {aij, -1.0}}, 'L', w);
        }
    }

    // Start indicators: assigned tasks start exactly once on their CPU.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const auto& st = model.slot_tasks[i];
        for (int j = 0; j < m; ++j) {
            std::vector<std::pair<int, double>> terms;
            for (std::int64_t t = st.arrival; t <= st.latest_start; ++t)
                terms.push_back({Sv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)], 1.0});
            terms.push_back({x[i][static_cast<std::size_t>(j)], -1.0});
            add_row("startonce_" + id_of(i) + "_" + std::to_string(j + 1), std::move(terms), 'E', 0.0);
        }
    }

    // Waiting time is pinned to the chosen start slot.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const auto& st = model.slot_tasks[i];
        std::vector<std::pair<int, double>> terms{{tw[i], 1.0}};
        for (std::int64_t t = st.arrival; t <= st.latest_start; ++t)
            for (int j = 0; j < m; ++j)
                terms.push_back({Sv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)],
                                 -static_cast<double>(t - st.arrival)});
        add_row("waitdef_" + id_of(i), std::move(terms), 'E', 0.0);
    }

    // Contiguity: occupied exactly in the proc_time slots after the start.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        const auto& st = model.slot_tasks[i];
        for (std::int64_t t = 0; t < horizon; ++t) {
            for (int j = 0; j < m; ++j) {
                std::vector<std::pair<int, double>> terms{
                    {Mv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)], 1.0}};
                const std::int64_t lo = std::max(st.arrival, t - st.proc + 1);
                const std::int64_t hi = std::min(t, st.latest_start);
                for (std::int64_t tau = lo; tau <= hi; ++tau)
                    terms.push_back(
                        {Sv[i][static_cast<std::size_t>(tau)][static_cast<std::size_t>(j)], -1.0});
                add_row("linkM_" + id_of(i) + "_" + std::to_string(t) + "_" + std::to_string(j + 1),
                        std::move(terms), 'E', 0.0);
            }
        }
    }

    // Allocated slots equal the processing time when assigned.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        for (int j = 0; j < m; ++j) {
            std::vector<std::pair<int, double>> terms;
            for (std::int64_t t = 0; t < horizon; ++t)
                terms.push_back({Tv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)], 1.0});
            terms.push_back({x[i][static_cast<std::size_t>(j)],
                             -static_cast<double>(model.slot_tasks[i].proc)});
            add_row("alloc_" + id_of(i) + "_" + std::to_string(j + 1), std::move(terms), 'E', 0.0);
        }
    }

    // T_itj = x_ij * M_itj with B = 1.
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = by_id[k];
        for (std::int64_t t = 0; t < horizon; ++t) {
            for (int j = 0; j < m; ++j) {
                const std::string suffix =
                    "_" + id_of(i) + "_" + std::to_string(t) + "_" + std::to_string(j + 1);
                const int tij = Tv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
                const int mij = Mv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
                const int xij = x[i][static_cast<std::size_t>(j)];
                add_row("linT1" + suffix, {{tij, 1.0}, {xij, -1.0}}, 'L', 0.0);
                add_row("linT2" + suffix, {{tij, 1.0}, {mij, -1.0}}, 'L', 0.0);
                add_row("linT3" + suffix, {{xij, 1.0}, {mij, 1.0}, {tij, -1.0}}, 'L', 1.0);
            }
        }
    }

    // One task per CPU per slot.
    for (std::int64_t t = 0; t < horizon; ++t) {
        for (int j = 0; j < m; ++j) {
            std::vector<std::pair<int, double>> terms;
            for (std::size_t k = 0; k < n; ++k) {
                const std::size_t i = by_id[k];
                terms.push_back({Tv[i][static_cast<std::size_t>(t)][static_cast<std::size_t>(j)], 1.0});
            }
            add_row("cap_" + std::to_string(t) + "_" + std::to_string(j + 1), std::move(terms), 'L', 1.0);
        }
    }

    return tb;
}

std::string export_lp(const MilpModel& model) {
    const Tableau tb = materialize_tableau(model);
    std::ostringstream out;

    auto emit_terms = [&](std::ostream& os, const std::vector<std::pair<int, double>>& terms) {
        bool first = true;
        for (const auto& [idx, coef] : terms) {
            if (coef == 0.0) continue;
            const double mag = std::abs(coef);
            if (first) {
                if (coef < 0.0) os << "- ";
                first = false;
            } else {
                os << (coef < 0.0 ? " - " : " + ");
            }
            if (mag != 1.0) os << fmt_double(mag) << ' ';
            os << tb.vars[static_cast<std::size_t>(idx)].name;
        }
        if (first) os << "0";
    };

    out << "\\ time-indexed offloading schedule model\n";
    out << "\\ tasks=" << model.tasks.size() << " cpus=" << model.m_cpus
        << " horizon_slots=" << model.horizon_slots << " slot_ms=" << model.slot_ms
        << " lambda=" << fmt_double(model.weights.lambda) << "\n";
    out << "Minimize\n obj: ";
    emit_terms(out, tb.objective);
    if (tb.objective_constant != 0.0) out << " + " << fmt_double(tb.objective_constant);
    out << "\nSubject To\n";
    for (const auto& row : tb.rows) {
        out << ' ' << row.name << ": ";
        emit_terms(out, row.terms);
        out << (row.sense == 'L' ? " <= " : " = ") << fmt_double(row.rhs) << "\n";
    }
    out << "Bounds\n";
    for (const auto& v : tb.vars) {
        if (v.fixed_zero)
            out << ' ' << v.name << " = 0\n";
        else if (v.kind == 'I')
            out << ' ' << fmt_double(v.lb) << " <= " << v.name << " <= " << fmt_double(v.ub) << "\n";
    }
    auto emit_names = [&](char kind, const char* header) {
        bool any = false;
        for (const auto& v : tb.vars)
            if (v.kind == kind) { any = true; break; }
        if (!any) return;
        out << header << "\n";
        int on_line = 0;
        for (const auto& v : tb.vars) {
            if (v.kind != kind) continue;
            out << (on_line == 0 ? " " : " ") << v.name;
            if (++on_line == 8) {
                out << "\n";
                on_line = 0;
            }
        }
        if (on_line != 0) out << "\n";
    };
    emit_names('B', "Binaries");
    emit_names('I', "Generals");
    out << "End\n";
    return out.str();
}

}  // namespace edgesched
