#include <doctest.h>

#include <stdexcept>

#include <random>

#include "edgesched/ga.hpp"
#include "edgesched/greedy.hpp"
#include "edgesched/milp.hpp"
#include "edgesched/workload.hpp"
#include "oracle.hpp"

using namespace edgesched;

TEST_CASE("genome sizing follows ceil(log2(M+1))") {
    CHECK(bits_per_task(1) == 1);
    CHECK(bits_per_task(2) == 2);
    CHECK(bits_per_task(3) == 2);
    CHECK(bits_per_task(4) == 3);
    CHECK(chromosome_length(5, 2) == 10);
}

TEST_CASE("decoding the all-drop chromosome") {
    const auto tasks = oracle::i1_tasks();
    Chromosome c;
    c.bits.assign(chromosome_length(tasks.size(), 2), 0);
    const Schedule s = decode(c, tasks, 2);
    CHECK(s.assignments.empty());
    CHECK(s.dropped.size() == tasks.size());
    CHECK(compute_metrics(s, tasks, {0.5}).dropped_ratio == 1.0);
}

TEST_CASE("decoding the I1 chromosome that drops the long task") {
    const auto tasks = oracle::i1_tasks();
    // M=1, one bit per task, tasks in (arrival, id) order: T1 drop, T2 cpu1, T3 cpu1.
    Chromosome c;
    c.bits = {0, 1, 1};
    const Schedule s = decode(c, tasks, 1);
    CHECK(validate_schedule(s, tasks).empty());
    CHECK(s.dropped == std::vector<int>{1});
    REQUIRE(s.assignments.size() == 2);
    CHECK(s.assignments[0].task_id == 2);
    CHECK(s.assignments[0].start == 0);
    CHECK(s.assignments[1].task_id == 3);
    CHECK(s.assignments[1].start == 2);

    const double objective = evaluate_objective(s, tasks, {0.5});
    CHECK(objective == doctest::Approx(0.25).epsilon(1e-12));
    // This decode is in fact the instance optimum.
    const auto best = oracle::brute_force_best(tasks, 1, 0.5);
    CHECK(best.value == oracle::exact_objective(s, tasks, 0.5));
}

TEST_CASE("codes above M decode as drops") {
    const std::vector<Task> tasks{oracle::make_task(1, 0, 2, 10)};
    Chromosome c;
    c.bits = {1, 1};  // code 3 with M=2
    const Schedule s = decode(c, tasks, 2);
    CHECK(s.assignments.empty());
    CHECK(s.dropped == std::vector<int>{1});
}

TEST_CASE("decode rejects mismatched genome lengths") {
    const auto tasks = oracle::i1_tasks();
    Chromosome c;
    c.bits = {0, 1};
    CHECK_THROWS_AS(decode(c, tasks, 1), std::invalid_argument);
}

TEST_CASE("infeasible placements are repaired to drops") {
    // Both tasks on cpu 1; the second cannot meet its deadline behind the first.
    const std::vector<Task> tasks{oracle::make_task(1, 0, 10, 30), oracle::make_task(2, 0, 2, 4)};
    Chromosome c;
    c.bits = {1, 1};
    const Schedule s = decode(c, tasks, 1);
    CHECK(s.dropped == std::vector<int>{2});
    CHECK(validate_schedule(s, tasks).empty());
}

TEST_CASE("a single feasible task is solved to zero objective") {
    const std::vector<Task> tasks{oracle::make_task(1, 3, 5, 20)};
    GaParams params;
    params.population = 10;
    params.generations = 5;
    for (std::uint64_t seed : {1ULL, 99ULL, 123456ULL}) {
        params.seed = seed;
        CHECK(run_ga(tasks, 2, {0.5}, params).objective == 0.0);
    }
}

TEST_CASE("on I1 the GA stays at or below the STF-seeded bound") {
    const auto tasks = oracle::i1_tasks();
    GaParams params;
    params.seed = 11;
    const GaResult res = run_ga(tasks, 1, {0.5}, params);
    CHECK(res.objective <= 29.0 / 60.0 + 1e-12);
    CHECK(res.objective == doctest::Approx(0.25).epsilon(1e-12));  // decode-space optimum
}

TEST_CASE("fitness history is monotone non-increasing") {
    std::mt19937_64 eng(2024);
    GaParams params;
    params.population = 20;
    params.generations = 15;
    for (int trial = 0; trial < 20; ++trial) {
        const auto tasks = oracle::random_small_instance(eng, 8);
        params.seed = eng();
        params.seed_with_greedy = (trial % 2 == 0);
        const GaResult res = run_ga(tasks, 2, {0.5}, params);
        REQUIRE(res.fitness_history.size() == static_cast<std::size_t>(params.generations) + 1);
        for (std::size_t g = 1; g < res.fitness_history.size(); ++g)
            CHECK(res.fitness_history[g] <= res.fitness_history[g - 1]);
        CHECK(res.objective == res.fitness_history.back());
    }
}

TEST_CASE("greedy seeding bounds the GA by both baselines") {
    std::mt19937_64 eng(606);
    GaParams params;
    params.population = 16;
    params.generations = 10;
    for (int trial = 0; trial < 100; ++trial) {
        const auto tasks = oracle::random_small_instance(eng, 8);
        const int m = 1 + static_cast<int>(eng() % 2);
        params.seed = eng();
        const GaResult res = run_ga(tasks, m, {0.5}, params);
        const double fcfs = evaluate_objective(schedule_fcfs(tasks, m), tasks, {0.5});
        const double stf = evaluate_objective(schedule_stf(tasks, m), tasks, {0.5});
        CHECK(res.objective <= std::min(fcfs, stf));
    }
}

TEST_CASE("decoded schedules always validate") {
    std::mt19937_64 eng(808);
    int checked = 0;
    while (checked < 10000) {
        const auto tasks = oracle::random_small_instance(eng, 8);
        const int m = 1 + static_cast<int>(eng() % 3);
        Chromosome c;
        c.bits.resize(chromosome_length(tasks.size(), m));
        for (int rep = 0; rep < 20 && checked < 10000; ++rep, ++checked) {
            for (auto& b : c.bits) b = static_cast<std::uint8_t>(eng() & 1);
            const Schedule s = decode(c, tasks, m);
            REQUIRE(validate_schedule(s, tasks).empty());
        }
    }
}

TEST_CASE("the GA never beats the proven optimum") {
    std::mt19937_64 eng(515);
    GaParams params;
    params.population = 20;
    params.generations = 20;
    for (int trial = 0; trial < 25; ++trial) {
        const auto tasks = oracle::random_small_instance(eng, 6);
        const int m = 1 + static_cast<int>(eng() % 2);
        params.seed = eng();
        const GaResult res = run_ga(tasks, m, {0.5}, params);
        const auto best = oracle::brute_force_best(tasks, m, 0.5);
        const auto ga_exact = oracle::exact_objective(res.schedule, tasks, 0.5);
        CHECK(!(ga_exact < best.value));
    }
}

TEST_CASE("identical seeds reproduce the GA run exactly") {
    const auto tasks = oracle::i1_tasks();
    GaParams params;
    params.seed = 31415;
    const GaResult a = run_ga(tasks, 2, {0.5}, params);
    const GaResult b = run_ga(tasks, 2, {0.5}, params);
    CHECK(a.objective == b.objective);
    CHECK(a.fitness_history == b.fitness_history);
    REQUIRE(a.schedule.assignments.size() == b.schedule.assignments.size());
    for (std::size_t i = 0; i < a.schedule.assignments.size(); ++i)
        CHECK(a.schedule.assignments[i].start == b.schedule.assignments[i].start);
}

TEST_CASE("fitness history exports as generation,best_objective csv") {
    const std::string csv = fitness_history_csv({0.5, 0.25});
    CHECK(csv == "generation,best_objective\n0,0.5\n1,0.25\n");
}
