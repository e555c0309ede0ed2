#include "edgesched/ga.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "edgesched/greedy.hpp"
#include "edgesched/workload.hpp"  // rng helpers

namespace edgesched {

int bits_per_task(int m_cpus) {
    int bits = 1;
    while ((1 << bits) < m_cpus + 1) ++bits;
    return bits;
}

std::size_t chromosome_length(std::size_t n_tasks, int m_cpus) {
    return n_tasks * static_cast<std::size_t>(bits_per_task(m_cpus));
}

namespace {

// Task indices in (arrival, id) order; decode sequences each CPU's tasks in
// this order.
std::vector<std::size_t> arrival_order(const std::vector<Task>& tasks) {
    std::vector<std::size_t> order(tasks.size());
    for (std::size_t i = 0; i < tasks.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (tasks[a].arrival != tasks[b].arrival) return tasks[a].arrival < tasks[b].arrival;
        return tasks[a].id < tasks[b].id;
    });
    return order;
}

int gene_code(const Chromosome& c, std::size_t task_pos, int bits) {
    int code = 0;
    for (int b = 0; b < bits; ++b)
        code |= static_cast<int>(c.bits[task_pos * static_cast<std::size_t>(bits) + static_cast<std::size_t>(b)]) << b;
    return code;
}

void set_gene_code(Chromosome& c, std::size_t task_pos, int bits, int code) {
    for (int b = 0; b < bits; ++b)
        c.bits[task_pos * static_cast<std::size_t>(bits) + static_cast<std::size_t>(b)] =
            static_cast<std::uint8_t>((code >> b) & 1);
}

Schedule decode_with_order(const Chromosome& chromosome, const std::vector<Task>& tasks, int m_cpus,
                           const std::vector<std::size_t>& order) {
    const int bits = bits_per_task(m_cpus);
    Schedule sched;
    sched.m_cpus = m_cpus;
    std::vector<TimeMs> cpu_free(static_cast<std::size_t>(m_cpus), 0);

    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const Task& t = tasks[order[pos]];
        const int code = gene_code(chromosome, pos, bits);
        if (code < 1 || code > m_cpus) {
            sched.dropped.push_back(t.id);
            continue;
        }
        TimeMs& free_at = cpu_free[static_cast<std::size_t>(code - 1)];
        const TimeMs start = std::max(free_at, t.arrival);
        if (start > t.latest_start()) {
            sched.dropped.push_back(t.id);  // repair: infeasible placements become drops
            continue;
        }
        sched.assignments.push_back({t.id, code, start, start - t.arrival});
        free_at = start + t.proc_time;
    }
    normalize_schedule(sched);
    return sched;
}

}  // namespace

Schedule decode(const Chromosome& chromosome, const std::vector<Task>& tasks, int m_cpus) {
    if (m_cpus < 1) throw std::invalid_argument("m_cpus must be >= 1");
    if (chromosome.bits.size() != chromosome_length(tasks.size(), m_cpus))
        throw std::invalid_argument("chromosome length does not match instance");
    return decode_with_order(chromosome, tasks, m_cpus, arrival_order(tasks));
}

Chromosome encode(const Schedule& schedule, const std::vector<Task>& tasks, int m_cpus) {
    const int bits = bits_per_task(m_cpus);
    Chromosome c;
    c.bits.assign(chromosome_length(tasks.size(), m_cpus), 0);

    std::vector<std::size_t> order = arrival_order(tasks);
    std::unordered_map<int, std::size_t> pos_of_id;
    pos_of_id.reserve(tasks.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos) pos_of_id.emplace(tasks[order[pos]].id, pos);
    for (const Assignment& a : schedule.assignments) {
        auto it = pos_of_id.find(a.task_id);
        if (it == pos_of_id.end()) throw std::invalid_argument("schedule references unknown task id");
        set_gene_code(c, it->second, bits, a.cpu_id);
    }
    return c;
}

GaResult run_ga(const std::vector<Task>& tasks, int m_cpus, const ObjectiveWeights& weights,
                const GaParams& params) {
    if (params.population < 2) throw std::invalid_argument("population must be >= 2");
    if (params.tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
    if (params.mutation_rate < 0.0 || params.mutation_rate > 1.0)
        throw std::invalid_argument("mutation_rate must be in [0, 1]");
    if (m_cpus < 1) throw std::invalid_argument("m_cpus must be >= 1");

    const std::size_t genome_len = chromosome_length(tasks.size(), m_cpus);
    const std::vector<std::size_t> order = arrival_order(tasks);
    std::mt19937_64 eng(rng::mix(params.seed, 0x6761ULL));

    auto evaluate = [&](const Chromosome& c) -> std::pair<Schedule, double> {
        Schedule s = decode_with_order(c, tasks, m_cpus, order);
        double fit = evaluate_objective(s, tasks, weights);
        return {std::move(s), fit};
    };

    GaResult result;
    bool have_best = false;
    auto offer = [&](const Schedule& s, double fitness) {
        if (!have_best || fitness < result.objective) {
            result.schedule = s;
            result.objective = fitness;
            have_best = true;
        }
    };

    std::vector<Chromosome> pop(static_cast<std::size_t>(params.population));
    std::size_t fill_from = 0;
    if (params.seed_with_greedy) {
        const Schedule fcfs = schedule_fcfs(tasks, m_cpus);
        const Schedule stf = schedule_stf(tasks, m_cpus);
        // The greedy schedules join the hall of fame directly: their CPU
        // assignments survive encoding but their dispatch order does not, so
        // the decoded seeds alone would not bound the result by the baselines.
        offer(fcfs, evaluate_objective(fcfs, tasks, weights));
        offer(stf, evaluate_objective(stf, tasks, weights));
        pop[0] = encode(fcfs, tasks, m_cpus);
        pop[1] = encode(stf, tasks, m_cpus);
        fill_from = 2;
    }
    for (std::size_t i = fill_from; i < pop.size(); ++i) {
        pop[i].bits.resize(genome_len);
        for (auto& bit : pop[i].bits) bit = static_cast<std::uint8_t>(eng() & 1);
    }

    std::vector<double> fitness(pop.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        auto [sched, fit] = evaluate(pop[i]);
        fitness[i] = fit;
        offer(sched, fit);
    }
    result.fitness_history.push_back(result.objective);

    auto rand_index = [&](std::size_t n) { return static_cast<std::size_t>(eng() % n); };

    for (int gen = 1; gen <= params.generations; ++gen) {
        // Tournament selection with replacement, ties won by the first draw.
        std::vector<Chromosome> offspring;
        offspring.reserve(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            std::size_t best = rand_index(pop.size());
            for (int k = 1; k < params.tournament_size; ++k) {
                std::size_t cand = rand_index(pop.size());
                if (fitness[cand] < fitness[best]) best = cand;
            }
            offspring.push_back(pop[best]);
        }
        // Two-point crossover on consecutive pairs.
        if (genome_len >= 2) {
            for (std::size_t i = 0; i + 1 < offspring.size(); i += 2) {
                std::size_t c1 = 1 + rand_index(genome_len - 1);
                std::size_t c2 = 1 + rand_index(genome_len - 1);
                if (c1 > c2) std::swap(c1, c2);
                for (std::size_t b = c1; b < c2; ++b)
                    std::swap(offspring[i].bits[b], offspring[i + 1].bits[b]);
            }
        }
        // Per-gene bit-flip mutation.
        for (auto& individual : offspring)
            for (auto& bit : individual.bits)
                if (rng::canonical(eng) < params.mutation_rate) bit ^= 1;

        pop = std::move(offspring);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            auto [sched, fit] = evaluate(pop[i]);
            fitness[i] = fit;
            offer(sched, fit);
        }
        result.fitness_history.push_back(result.objective);
    }
    return result;
}

std::string fitness_history_csv(const std::vector<double>& history) {
    std::ostringstream out;
    out << "generation,best_objective\n";
    for (std::size_t g = 0; g < history.size(); ++g) {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof buf, history[g]);
        (void)ec;
        out << g << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << '\n';
    }
    return out.str();
}

}  // namespace edgesched
