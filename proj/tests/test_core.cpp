#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/students_t.hpp>

#include "edgesched/core.hpp"
#include "edgesched/greedy.hpp"
#include "edgesched/workload.hpp"
#include "oracle.hpp"

using namespace edgesched;

namespace {

Schedule i1_stf_schedule() {
    Schedule s;
    s.m_cpus = 1;
    s.assignments = {{1, 1, 4, 4}, {2, 1, 0, 0}, {3, 1, 2, 1}};
    normalize_schedule(s);
    return s;
}

}  // namespace

TEST_CASE("objective is zero when everything runs immediately") {
    const auto tasks = oracle::i1_tasks();
    Schedule s;
    s.m_cpus = 3;
    s.assignments = {{1, 1, 0, 0}, {2, 2, 0, 0}, {3, 3, 1, 0}};
    for (double lambda : {0.0, 0.25, 0.5, 1.0})
        CHECK(evaluate_objective(s, tasks, {lambda}) == 0.0);
}

TEST_CASE("objective of the all-dropped schedule is (1-lambda)") {
    const auto tasks = oracle::i1_tasks();
    Schedule s;
    s.m_cpus = 1;
    s.dropped = {1, 2, 3};
    CHECK(evaluate_objective(s, tasks, {0.5}) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("objective of the I1 fixture under the STF schedule") {
    const auto tasks = oracle::i1_tasks();
    const Schedule s = i1_stf_schedule();
    // 0.5 * (0/2 + 1/6 + 4/5) = 29/60
    CHECK(evaluate_objective(s, tasks, {0.5}) == doctest::Approx(29.0 / 60.0).epsilon(1e-12));
    const auto exact = oracle::exact_objective(s, tasks, 0.5);
    CHECK(exact.num == 29);
    CHECK(exact.den == 60);
}

TEST_CASE("zero-slack tasks contribute nothing when they start on time") {
    const std::vector<Task> tasks{oracle::make_task(1, 5, 3, 8)};  // slack 0
    Schedule s;
    s.m_cpus = 1;
    s.assignments = {{1, 1, 5, 0}};
    CHECK(evaluate_objective(s, tasks, {0.7}) == 0.0);

    Schedule late = s;
    late.assignments[0].start = 6;
    late.assignments[0].waiting = 1;
    CHECK_THROWS_WITH_AS(evaluate_objective(late, tasks, {0.7}),
                         doctest::Contains("infeasible-term"), std::invalid_argument);
}

TEST_CASE("objective rejects schedules that do not cover the task set") {
    const auto tasks = oracle::i1_tasks();
    Schedule missing;
    missing.m_cpus = 1;
    missing.assignments = {{1, 1, 0, 0}};
    CHECK_THROWS_AS(evaluate_objective(missing, tasks, {0.5}), std::invalid_argument);

    Schedule twice;
    twice.m_cpus = 1;
    twice.assignments = {{1, 1, 0, 0}};
    twice.dropped = {1, 2, 3};
    CHECK_THROWS_AS(evaluate_objective(twice, tasks, {0.5}), std::invalid_argument);
}

// The double-sum form of the dropped term counts (1 - x_ij) over all CPU
// columns, which only shifts the objective by the constant (1-lambda)(M-1):
// orderings and minimizers are unchanged.
TEST_CASE("literal dropped-term form has the same minimizers") {
    std::mt19937_64 eng(20240811);
    const double lambda = 0.5;
    const int m = 2;
    for (int trial = 0; trial < 20; ++trial) {
        const auto tasks = oracle::random_small_instance(eng, 4);

        double best_impl = 0, best_literal = 0;
        std::vector<int> argmin_impl, argmin_literal;
        bool first = true;

        // Exhaustive (drop | cpu) placements, earliest packing in id order per
        // CPU; start choices beyond these cannot change either argmin set
        // because both forms are non-decreasing in every start.
        std::vector<int> choice(tasks.size(), 0);
        for (;;) {
            Schedule s;
            s.m_cpus = m;
            std::vector<TimeMs> free_at(m, 0);
            bool feasible = true;
            for (std::size_t i = 0; i < tasks.size() && feasible; ++i) {
                if (choice[i] == 0) {
                    s.dropped.push_back(tasks[i].id);
                    continue;
                }
                TimeMs& f = free_at[static_cast<std::size_t>(choice[i] - 1)];
                const TimeMs start = std::max(f, tasks[i].arrival);
                if (start > tasks[i].latest_start()) {
                    feasible = false;
                    break;
                }
                s.assignments.push_back({tasks[i].id, choice[i], start, start - tasks[i].arrival});
                f = start + tasks[i].proc_time;
            }
            if (feasible) {
                const double impl = evaluate_objective(s, tasks, {lambda});
                const double literal =
                    impl + (1.0 - lambda) * (m - 1);  // claimed constant offset
                // Recompute the literal form from scratch to confirm the identity.
                double delay = 0;
                for (const Assignment& a : s.assignments)
                    for (const Task& t : tasks)
                        if (t.id == a.task_id && a.waiting > 0)
                            delay += static_cast<double>(a.waiting) / static_cast<double>(t.slack());
                const double literal_direct =
                    lambda * delay +
                    (1.0 - lambda) *
                        (static_cast<double>(tasks.size() * m - s.assignments.size()) /
                         static_cast<double>(tasks.size()));
                CHECK(literal_direct == doctest::Approx(literal).epsilon(1e-12));

                if (first || impl < best_impl) {
                    best_impl = impl;
                    argmin_impl = choice;
                }
                if (first || literal_direct < best_literal) {
                    best_literal = literal_direct;
                    argmin_literal = choice;
                }
                first = false;
            }
            std::size_t pos = 0;
            while (pos < tasks.size()) {
                if (++choice[pos] <= m) break;
                choice[pos] = 0;
                ++pos;
            }
            if (pos == tasks.size()) break;
        }
        REQUIRE(!first);
        CHECK(argmin_impl == argmin_literal);
        CHECK(best_literal == doctest::Approx(best_impl + (1.0 - lambda) * (m - 1)).epsilon(1e-12));
    }
}

// With every assigned wait within its slack, each delay ratio is in [0, 1]:
// the objective is bounded by lambda * n_assigned + (1 - lambda).
TEST_CASE("objective bounds on feasible schedules") {
    std::mt19937_64 eng(89);
    for (int trial = 0; trial < 200; ++trial) {
        const auto tasks = oracle::random_small_instance(eng, 8);
        const int m = 1 + static_cast<int>(eng() % 2);
        const double lambda = rng::canonical(eng);
        const Schedule s = (eng() % 2) ? schedule_fcfs(tasks, m) : schedule_stf(tasks, m);
        const double obj = evaluate_objective(s, tasks, {lambda});
        CHECK(obj >= 0.0);
        CHECK(obj <= lambda * static_cast<double>(s.assignments.size()) + (1.0 - lambda) + 1e-12);
    }
}

TEST_CASE("validate accepts the known-feasible I1 schedule") {
    CHECK(validate_schedule(i1_stf_schedule(), oracle::i1_tasks()).empty());
}

TEST_CASE("validate reports overlapping executions on one cpu") {
    const std::vector<Task> tasks{oracle::make_task(1, 0, 5, 20), oracle::make_task(2, 0, 3, 20)};
    Schedule s;
    s.m_cpus = 1;
    s.assignments = {{1, 1, 0, 0}, {2, 1, 3, 3}};
    const auto violations = validate_schedule(s, tasks);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "cpu-overlap");
    CHECK(violations[0].cpu_id == 1);
}

TEST_CASE("validate reports deadline and arrival violations") {
    const std::vector<Task> tasks{oracle::make_task(1, 5, 5, 12)};
    Schedule late;
    late.m_cpus = 1;
    late.assignments = {{1, 1, 8, 3}};
    auto violations = validate_schedule(late, tasks);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "deadline");

    Schedule early;
    early.m_cpus = 1;
    early.assignments = {{1, 1, 3, -2}};
    violations = validate_schedule(early, tasks);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].rule == "start-before-arrival");
}

TEST_CASE("validate reports coverage, range and bookkeeping problems") {
    const auto tasks = oracle::i1_tasks();
    Schedule s;
    s.m_cpus = 1;
    s.assignments = {{1, 1, 0, 0}, {9, 1, 6, 0}};  // unknown task, missing 2 and 3
    s.dropped = {2, 2};
    const auto violations = validate_schedule(s, tasks);
    auto has = [&](const char* rule) {
        for (const auto& v : violations)
            if (v.rule == rule) return true;
        return false;
    };
    CHECK(has("unknown-task"));
    CHECK(has("coverage-missing"));
    CHECK(has("coverage-duplicate"));

    Schedule bad_cpu;
    bad_cpu.m_cpus = 1;
    bad_cpu.assignments = {{1, 2, 0, 0}};
    bad_cpu.dropped = {2, 3};
    CHECK(!validate_schedule(bad_cpu, tasks).empty());

    Schedule bad_wait;
    bad_wait.m_cpus = 1;
    bad_wait.assignments = {{1, 1, 2, 0}};  // waiting should be 2
    bad_wait.dropped = {2, 3};
    bool found = false;
    for (const auto& v : validate_schedule(bad_wait, tasks))
        if (v.rule == "waiting-mismatch") found = true;
    CHECK(found);
}

TEST_CASE("metrics of the I1 fixture match hand simulation") {
    const auto tasks = oracle::i1_tasks();

    const Schedule fcfs = schedule_fcfs(tasks, 1);
    const RunMetrics mf = compute_metrics(fcfs, tasks, {0.5});
    CHECK(mf.mean_delay_ms == doctest::Approx(2.0));
    CHECK(mf.dropped_ratio == doctest::Approx(1.0 / 3.0));
    CHECK(mf.any_completed);

    const Schedule stf = schedule_stf(tasks, 1);
    const RunMetrics ms = compute_metrics(stf, tasks, {0.5});
    CHECK(ms.mean_delay_ms == doctest::Approx(5.0 / 3.0));
    CHECK(ms.dropped_ratio == 0.0);
    CHECK(ms.objective == doctest::Approx(29.0 / 60.0).epsilon(1e-12));
}

TEST_CASE("metrics reject invalid schedules") {
    const auto tasks = oracle::i1_tasks();
    Schedule s;
    s.m_cpus = 1;
    s.assignments = {{1, 1, 0, 0}, {2, 1, 3, 3}};  // T2 misses its deadline
    s.dropped = {3};
    CHECK_THROWS_AS(compute_metrics(s, tasks, {0.5}), std::invalid_argument);
}

TEST_CASE("confidence interval basics") {
    const ConfidenceInterval flat = confidence_interval({5, 5, 5}, 0.95);
    CHECK(flat.mean == 5.0);
    CHECK(flat.half_width == 0.0);

    std::vector<double> one_to_ten;
    for (int i = 1; i <= 10; ++i) one_to_ten.push_back(i);
    const ConfidenceInterval ci = confidence_interval(one_to_ten, 0.95);
    CHECK(ci.mean == doctest::Approx(5.5));
    // t_{0.975,9} = 2.262157, sd = 3.02765
    CHECK(ci.half_width == doctest::Approx(2.16570).epsilon(1e-4));
    CHECK(ci.n_samples == 10);

    CHECK_THROWS_WITH_AS(confidence_interval({7}, 0.95), doctest::Contains("insufficient-samples"),
                         std::invalid_argument);
    CHECK_THROWS_AS(confidence_interval({1, 2}, 1.5), std::invalid_argument);
}

// Half-width decays like 1/sqrt(n): compare n and 4n after correcting for the
// t quantile and the small-sample bias of the standard deviation. The two
// adjusted series share a mean, so their difference should sit within 3
// standard errors of zero.
TEST_CASE("confidence interval half-width scales as 1/sqrt(n)") {
    std::mt19937_64 eng(987654321);
    auto normal = [&eng]() {
        const double u1 = rng::canonical(eng), u2 = rng::canonical(eng);
        return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(6.283185307179586 * u2);
    };
    auto c4 = [](int n) {
        return std::sqrt(2.0 / (n - 1)) * std::exp(std::lgamma(n / 2.0) - std::lgamma((n - 1) / 2.0));
    };
    const int n_small = 25, n_large = 100, k_resamples = 1000;
    boost::math::students_t t_small(n_small - 1), t_large(n_large - 1);
    const double correction = (boost::math::quantile(t_small, 0.975) * c4(n_small)) /
                              (boost::math::quantile(t_large, 0.975) * c4(n_large));

    std::vector<double> a, b;
    for (int k = 0; k < k_resamples; ++k) {
        std::vector<double> s1, s2;
        for (int i = 0; i < n_small; ++i) s1.push_back(normal());
        for (int i = 0; i < n_large; ++i) s2.push_back(normal());
        a.push_back(confidence_interval(s1, 0.95).half_width);
        b.push_back(confidence_interval(s2, 0.95).half_width * 2.0 * correction);
    }
    auto mean_of = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    auto var_of = [&](const std::vector<double>& v, double mu) {
        double s = 0;
        for (double x : v) s += (x - mu) * (x - mu);
        return s / static_cast<double>(v.size() - 1);
    };
    const double ma = mean_of(a), mb = mean_of(b);
    const double se = std::sqrt(var_of(a, ma) / k_resamples + var_of(b, mb) / k_resamples);
    CHECK(std::abs(ma - mb) <= 3.0 * se);
}
