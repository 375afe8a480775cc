#pragma once

// Experiment harness. Every policy in a sweep cell sees the same graphs and
// the same actual execution times.

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "engine.hpp"
#include "serialization.hpp"

namespace mcpeak {

struct Instance {
    TaskGraph graph;
    ScheduleTables tables;
    std::uint64_t graph_seed = 0;  // seed actually fed to the generator
    int attempts = 0;
};

/// Platform used for a generated instance: the named platform, sized to the
/// generator's core count where the platform allows it.
inline Platform platform_for(const std::string& name, int n_cores) {
    return name == "odroid-xu3" ? odroid_xu3() : make_platform(name, n_cores);
}

/// Generates graphs from derived seeds until one admits both tables.
inline Instance generate_schedulable(GenParams params, const Platform& platform, int max_tries = 200) {
    const std::uint64_t base = params.seed;
    for (int a = 0; a < max_tries; ++a) {
        params.seed = a == 0 ? base : mix_seed(base, static_cast<std::uint64_t>(a));
        try {
            Instance inst;
            inst.graph = generate(params);
            inst.tables = build_tables(inst.graph, platform);
            inst.graph_seed = params.seed;
            inst.attempts = a + 1;
            return inst;
        } catch (const GenerationError&) {
        } catch (const UnschedulableError&) {
        }
    }
    throw GenerationError("no schedulable graph after " + std::to_string(max_tries) + " seeds");
}

struct PairedRun {
    Metrics proposed;
    Metrics static_max;
    Metrics immediate_next;
};

/// Runs the policy and both baselines on identical actual execution times.
inline PairedRun run_paired(const Instance& inst, const Platform& platform, const PolicyConfig& policy,
                            const OverheadModel& ov, SimConfig cfg) {
    PairedRun r;
    r.proposed = run_period(inst.graph, inst.tables, platform, policy, ov, cfg).metrics;
    r.static_max = run_period(inst.graph, inst.tables, platform, PolicyConfig::static_max(), ov, cfg).metrics;
    r.immediate_next = run_period(inst.graph, inst.tables, platform, PolicyConfig::immediate_next(), ov, cfg).metrics;
    return r;
}

struct ExperimentSpec {
    std::string name = "sweep";
    std::vector<GenParams> gen_grid{GenParams{}};
    std::vector<PolicyConfig> policy_grid{PolicyConfig{}};
    OverheadModel overheads;
    std::string platform = "odroid-xu3";
    int repetitions = 10;
    std::uint64_t base_seed = 1;
    double overrun_probability = 0.0;
    std::string out_dir = "sweep-out";

    void check() const {
        if (gen_grid.empty() || policy_grid.empty()) throw DomainError("experiment grids must be non-empty");
        if (repetitions < 1) throw DomainError("repetitions must be >= 1");
        for (const auto& g : gen_grid) g.check();
        for (const auto& p : policy_grid) p.check();
        overheads.check();
    }
};

struct RepRecord {
    int rep = 0;
    std::uint64_t graph_seed = 0;
    Metrics proposed;
    Ratios vs_static;
    Ratios vs_immediate;
};

struct CellResult {
    std::string cell_id;
    GenParams gen;
    PolicyConfig policy;
    std::vector<RepRecord> reps;

    AggregateReport vs_static() const {
        std::vector<Ratios> rs;
        for (const auto& r : reps) rs.push_back(r.vs_static);
        return aggregate(rs);
    }
    AggregateReport vs_immediate() const {
        std::vector<Ratios> rs;
        for (const auto& r : reps) rs.push_back(r.vs_immediate);
        return aggregate(rs);
    }
    /// Fraction of repetitions with at least one deadline miss.
    double miss_rate() const {
        if (reps.empty()) return 0.0;
        int n = 0;
        for (const auto& r : reps) n += r.proposed.deadline_miss_count > 0 ? 1 : 0;
        return static_cast<double>(n) / static_cast<double>(reps.size());
    }
};

inline void to_json(json& j, const Ratios& r) {
    j = json{{"peak_system_power", r.peak_system_power},
             {"max_core_peak", r.max_core_peak},
             {"total_energy", r.total_energy},
             {"max_temperature", r.max_temperature}};
}
inline void from_json(const json& j, Ratios& r) {
    r.peak_system_power = j.at("peak_system_power").get<double>();
    r.max_core_peak = j.at("max_core_peak").get<double>();
    r.total_energy = j.at("total_energy").get<double>();
    r.max_temperature = j.at("max_temperature").get<double>();
}

inline void to_json(json& j, const RepRecord& r) {
    j = json{{"rep", r.rep}, {"graph_seed", r.graph_seed}, {"proposed", r.proposed}, {"vs_static", r.vs_static},
             {"vs_immediate", r.vs_immediate}};
}
inline void from_json(const json& j, RepRecord& r) {
    r.rep = j.at("rep").get<int>();
    r.graph_seed = j.at("graph_seed").get<std::uint64_t>();
    r.proposed = j.at("proposed").get<Metrics>();
    r.vs_static = j.at("vs_static").get<Ratios>();
    r.vs_immediate = j.at("vs_immediate").get<Ratios>();
}

inline void to_json(json& j, const CellResult& c) {
    j = json{{"cell_id", c.cell_id}, {"gen", c.gen}, {"policy", c.policy}, {"reps", c.reps}};
}
inline void from_json(const json& j, CellResult& c) {
    c.cell_id = j.at("cell_id").get<std::string>();
    c.gen = j.at("gen").get<GenParams>();
    c.policy = j.at("policy").get<PolicyConfig>();
    c.reps = j.at("reps").get<std::vector<RepRecord>>();
}

/// One sweep cell: `reps` paired repetitions of one (generator, policy) point.
/// Graph seeds depend only on the generator point and repetition, so every
/// policy cell sharing a generator point sees the same graphs.
inline CellResult run_cell(const ExperimentSpec& spec, std::size_t gen_index, std::size_t policy_index) {
    CellResult cell;
    cell.gen = spec.gen_grid.at(gen_index);
    cell.policy = spec.policy_grid.at(policy_index);
    cell.cell_id = "g" + std::to_string(gen_index) + "-p" + std::to_string(policy_index);
    Platform platform = platform_for(spec.platform, cell.gen.n_cores);
    for (int r = 0; r < spec.repetitions; ++r) {
        GenParams gp = cell.gen;
        gp.seed = mix_seed(spec.base_seed, gen_index * 100003ULL + static_cast<std::uint64_t>(r));
        Instance inst = generate_schedulable(gp, platform);
        SimConfig cfg;
        cfg.seed = mix_seed(inst.graph_seed, 0x5eed);
        cfg.strict = false;
        cfg.overrun_probability = spec.overrun_probability;
        auto pr = run_paired(inst, platform, cell.policy, spec.overheads, cfg);
        cell.reps.push_back({r, inst.graph_seed, pr.proposed, compare(pr.static_max, pr.proposed),
                             compare(pr.immediate_next, pr.proposed)});
    }
    return cell;
}

inline std::string summary_header() {
    return "cell_id,n_cores,util_lo,util_hi,edge_percent,n_tasks,policy,k,alpha,beta,gamma,remap,deduct_overheads,reps,"
           "miss_rate,peak_vs_static,peak_vs_static_ci,energy_vs_static,energy_vs_static_ci,temp_vs_static,"
           "peak_vs_immediate,peak_vs_immediate_ci,energy_vs_immediate,energy_vs_immediate_ci,temp_vs_immediate\n";
}

inline std::string summary_row(const CellResult& c) {
    auto s = c.vs_static();
    auto i = c.vs_immediate();
    char buf[768];
    std::snprintf(buf, sizeof buf,
                  "%s,%d,%.4g,%.4g,%.4g,%d,%s,%d,%.4g,%.4g,%.4g,%d,%d,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,"
                  "%.6f\n",
                  c.cell_id.c_str(), c.gen.n_cores, c.gen.utilization_range.first, c.gen.utilization_range.second,
                  c.gen.edge_percent, c.gen.n_tasks, std::string(to_string(c.policy.kind)).c_str(), c.policy.k,
                  c.policy.alpha, c.policy.beta, c.policy.gamma, c.policy.remap_enabled ? 1 : 0,
                  c.policy.deduct_overheads ? 1 : 0, c.reps.size(), c.miss_rate(), s.peak_system_power.mean,
                  s.peak_system_power.half_width, s.total_energy.mean, s.total_energy.half_width,
                  s.max_temperature.mean, i.peak_system_power.mean, i.peak_system_power.half_width,
                  i.total_energy.mean, i.total_energy.half_width, i.max_temperature.mean);
    return buf;
}

/// Runs every cell of the spec on `workers` threads. Cells whose result file
/// already exists are loaded instead of recomputed. Writes one directory per
/// cell and a top-level summary.csv.
inline std::vector<CellResult> run_sweep(const ExperimentSpec& spec, int workers,
                                         const std::function<void(const CellResult&, bool)>& on_cell = {}) {
    spec.check();
    namespace fs = std::filesystem;
    fs::create_directories(spec.out_dir);
    std::vector<std::pair<std::size_t, std::size_t>> todo;
    for (std::size_t g = 0; g < spec.gen_grid.size(); ++g) {
        for (std::size_t p = 0; p < spec.policy_grid.size(); ++p) todo.emplace_back(g, p);
    }
    std::vector<CellResult> results(todo.size());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            try {
                auto [g, p] = todo[i];
                std::string id = "g" + std::to_string(g) + "-p" + std::to_string(p);
                fs::path dir = fs::path(spec.out_dir) / id;
                fs::path file = dir / "cell.json";
                bool resumed = fs::exists(file);
                CellResult cell;
                if (resumed) {
                    cell = read_json(file.string()).get<CellResult>();
                } else {
                    cell = run_cell(spec, g, p);
                    fs::create_directories(dir);
                    fs::path tmp = dir / "cell.json.tmp";
                    write_json(tmp.string(), cell);
                    fs::rename(tmp, file);
                }
                std::lock_guard lock(mu);
                results[i] = std::move(cell);
                if (on_cell) on_cell(results[i], resumed);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = todo.size();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
    std::string csv = summary_header();
    for (const auto& c : results) csv += summary_row(c);
    write_file((fs::path(spec.out_dir) / "summary.csv").string(), csv);
    return results;
}

} // namespace mcpeak
