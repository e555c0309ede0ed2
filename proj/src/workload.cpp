#include "edgesched/workload.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace edgesched {

namespace rng {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace rng

namespace {

constexpr double kMaxSlotUnits = 9007199254740992.0;  // 2^53

void check_dist(const DistSpec& d, const char* name, double min_allowed) {
    switch (d.kind) {
        case DistSpec::Kind::Constant:
            if (d.a < min_allowed) throw std::invalid_argument(std::string(name) + ": constant below minimum");
            break;
        case DistSpec::Kind::Uniform:
            if (d.a > d.b) throw std::invalid_argument(std::string(name) + ": uniform bounds inverted");
            if (d.a < min_allowed) throw std::invalid_argument(std::string(name) + ": uniform lower bound below minimum");
            break;
        case DistSpec::Kind::Exponential:
            if (d.a <= 0.0) throw std::invalid_argument(std::string(name) + ": exponential mean must be positive");
            if (min_allowed > 0.0)
                throw std::invalid_argument(std::string(name) + ": exponential cannot guarantee the required minimum");
            break;
    }
}

// Rounds a non-negative duration in ms up to the slot grid.
TimeMs ceil_to_slot(double value_ms, TimeMs slot_ms) {
    if (value_ms <= 0.0) return 0;
    const double slots = std::ceil(value_ms / static_cast<double>(slot_ms));
    if (slots > kMaxSlotUnits) throw std::overflow_error("time horizon exceeds 2^53 slot units");
    return static_cast<TimeMs>(slots) * slot_ms;
}

}  // namespace

void validate_config(const WorkloadConfig& c) {
    if (c.n_users < 1) throw std::invalid_argument("n_users must be >= 1");
    if (c.tasks_per_user < 1) throw std::invalid_argument("tasks_per_user must be >= 1");
    if (!(c.arrival_rate_per_ms > 0.0)) throw std::invalid_argument("arrival_rate_per_ms must be positive");
    if (!(c.packet_bits > 0.0)) throw std::invalid_argument("packet_bits must be positive");
    if (!(c.datarate_bits_per_ms > 0.0)) throw std::invalid_argument("datarate_bits_per_ms must be positive");
    if (c.slot_ms < 1) throw std::invalid_argument("slot_ms must be >= 1");
    check_dist(c.proc_time_ms, "proc_time_ms", 0.0);
    // Slack factors below 1 would create tasks that can never meet their
    // deadline; the generator contract is slack >= 0.
    check_dist(c.slack_factor, "slack_factor", 1.0);
}

double transmission_delay_ms(double packet_bits, double datarate_bits_per_ms) {
    if (!(datarate_bits_per_ms > 0.0)) throw std::invalid_argument("datarate must be positive");
    if (packet_bits <= 0.0) return 0.0;
    return packet_bits / datarate_bits_per_ms;
}

TaskSet generate_workload(const WorkloadConfig& config) {
    validate_config(config);
    const double tx_ms = transmission_delay_ms(config.packet_bits, config.datarate_bits_per_ms);

    struct Raw {
        int user;
        int k;  // index within the user's stream, for deterministic ties
        TimeMs arrival, proc, deadline;
    };
    std::vector<Raw> raw;
    raw.reserve(static_cast<std::size_t>(config.n_users) * config.tasks_per_user);

    for (int user = 1; user <= config.n_users; ++user) {
        std::mt19937_64 eng(rng::mix(config.seed, static_cast<std::uint64_t>(user)));
        double t = 0.0;  // generation clock, exact doubles before slot rounding
        for (int k = 0; k < config.tasks_per_user; ++k) {
            t += rng::exponential(eng, config.arrival_rate_per_ms);
            const TimeMs arrival = ceil_to_slot(t + tx_ms, config.slot_ms);
            TimeMs proc = ceil_to_slot(rng::draw(eng, config.proc_time_ms), config.slot_ms);
            if (proc <= 0) proc = config.slot_ms;  // proc_time is strictly positive
            const double factor = rng::draw(eng, config.slack_factor);
            const TimeMs slack = ceil_to_slot(static_cast<double>(proc) * (factor - 1.0), config.slot_ms);
            raw.push_back({user, k, arrival, proc, arrival + proc + slack});
        }
    }

    std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        if (a.user != b.user) return a.user < b.user;
        return a.k < b.k;
    });

    TaskSet ts;
    ts.config = config;
    ts.tasks.reserve(raw.size());
    int next_id = 1;
    for (const Raw& r : raw) {
        Task t;
        t.id = next_id++;
        t.user_id = r.user;
        t.arrival = r.arrival;
        t.proc_time = r.proc;
        t.deadline = r.deadline;
        ts.tasks.push_back(t);
    }
    return ts;
}

std::string taskset_to_csv(const TaskSet& ts) {
    std::ostringstream out;
    out << "task_id,user_id,arrival_ms,proc_ms,deadline_ms\n";
    for (const Task& t : ts.tasks)
        out << t.id << ',' << t.user_id << ',' << t.arrival << ',' << t.proc_time << ',' << t.deadline
            << '\n';
    return out.str();
}

void write_taskset_csv(const TaskSet& ts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << taskset_to_csv(ts);
}

TaskSet parse_taskset_csv(std::istream& in) {
    TaskSet ts;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty instance file");
    // Tolerate a trailing \r from files written on other platforms.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "task_id,user_id,arrival_ms,proc_ms,deadline_ms")
        throw std::runtime_error("bad header: expected task_id,user_id,arrival_ms,proc_ms,deadline_ms");

    std::vector<int> ids;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        Task t;
        char c1, c2, c3, c4;
        if (!(ss >> t.id >> c1 >> t.user_id >> c2 >> t.arrival >> c3 >> t.proc_time >> c4 >> t.deadline) ||
            c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',')
            throw std::runtime_error("malformed row at line " + std::to_string(lineno));
        if (t.proc_time <= 0)
            throw std::runtime_error("non-positive proc_time at line " + std::to_string(lineno));
        ts.tasks.push_back(t);
        ids.push_back(t.id);
    }
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw std::runtime_error("duplicate task ids in instance file");
    std::sort(ts.tasks.begin(), ts.tasks.end(), [](const Task& a, const Task& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.id < b.id;
    });
    return ts;
}

TaskSet read_taskset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    return parse_taskset_csv(in);
}

}  // namespace edgesched
