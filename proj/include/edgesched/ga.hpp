#pragma once

#include <cstdint>
#include <vector>

#include "edgesched/core.hpp"

namespace edgesched {

struct GaParams {
    int population = 100;
    int generations = 100;
    double mutation_rate = 0.01;  // per-gene bit-flip probability
    int tournament_size = 3;
    std::uint64_t seed = 1;
    bool seed_with_greedy = true;
};

/// Bitstring genome: ceil(log2(M+1)) bits per task, little-endian within the
/// per-task group. Code 0 means drop, 1..M selects a CPU, anything above M
/// decodes as drop.
struct Chromosome {
    std::vector<std::uint8_t> bits;
};

int bits_per_task(int m_cpus);

/// Genome length for an instance; chromosomes of any other length are
/// rejected by decode.
std::size_t chromosome_length(std::size_t n_tasks, int m_cpus);

/// Repair decoder: per CPU, its tasks are sequenced by (arrival, id) and
/// packed at the earliest feasible start; any task that would miss its
/// deadline is repaired to dropped. The result always validates.
Schedule decode(const Chromosome& chromosome, const std::vector<Task>& tasks, int m_cpus);

/// Inverse of decode up to start times: per-task CPU code from the schedule,
/// 0 for dropped tasks.
Chromosome encode(const Schedule& schedule, const std::vector<Task>& tasks, int m_cpus);

struct GaResult {
    Schedule schedule;                // best-ever individual (hall of fame)
    double objective = 0.0;
    std::vector<double> fitness_history;  // best-ever objective; index = generation, 0 = initial population
};

/// Generational GA: tournament selection, two-point crossover on the
/// bitstring, per-gene bit-flip mutation, hall-of-fame elitism of size 1.
/// With seed_with_greedy the FCFS and STF schedules are both injected into
/// generation 0 and pre-loaded into the hall of fame, so the returned
/// objective never exceeds either baseline. Deterministic given the seed.
GaResult run_ga(const std::vector<Task>& tasks, int m_cpus, const ObjectiveWeights& weights,
                const GaParams& params);

/// CSV with header generation,best_objective.
std::string fitness_history_csv(const std::vector<double>& history);

}  // namespace edgesched
