#pragma once

// Dual-criticality task graphs and their random generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace mcpeak {

struct Task {
    TaskId id = 0;
    Criticality criticality = Criticality::LC;
    Millis wcet_lo = 0.0;
    Millis wcet_hi = 0.0;
    Millis deadline = 0.0;
    std::vector<TaskId> successors;
    std::vector<TaskId> predecessors;
    std::map<CoreKind, double> peak_power;  // W at f_max
    std::map<CoreKind, double> energy_max;  // J at f_max; optional per kind

    bool is_hc() const { return criticality == Criticality::HC; }

    Millis wcet(Mode mode) const { return mode == Mode::HI ? wcet_hi : wcet_lo; }

    double power(CoreKind kind) const {
        auto it = peak_power.find(kind);
        if (it == peak_power.end()) {
            throw DomainError("task " + std::to_string(id) + " has no power profile for " +
                              std::string(to_string(kind)));
        }
        return it->second;
    }

    /// Maximum energy of one execution; peak power times the active-mode WCET
    /// unless a measured value is supplied.
    double energy(CoreKind kind, Mode mode) const {
        if (auto it = energy_max.find(kind); it != energy_max.end()) {
            return it->second;
        }
        return power(kind) * wcet(mode) / 1000.0;
    }

    friend bool operator==(const Task&, const Task&) = default;
};

struct TaskGraph {
    std::vector<Task> tasks;
    Millis period = 0.0;
    Millis deadline = 0.0;

    std::size_t size() const { return tasks.size(); }
    bool empty() const { return tasks.empty(); }

    /// Map from task id to position in `tasks`.
    std::unordered_map<TaskId, std::size_t> index() const {
        std::unordered_map<TaskId, std::size_t> idx;
        idx.reserve(tasks.size());
        for (std::size_t i = 0; i < tasks.size(); ++i) {
            idx.emplace(tasks[i].id, i);
        }
        return idx;
    }

    const Task* find(TaskId id) const {
        auto it = std::find_if(tasks.begin(), tasks.end(), [id](const Task& t) { return t.id == id; });
        return it == tasks.end() ? nullptr : &*it;
    }

    const Task& at(TaskId id) const {
        if (const Task* t = find(id)) {
            return *t;
        }
        throw DomainError("unknown task id " + std::to_string(id));
    }

    friend bool operator==(const TaskGraph&, const TaskGraph&) = default;
};

/// Per-kind [min, max] peak-power envelope in watts.
struct PowerEnvelope {
    std::map<CoreKind, std::pair<double, double>> range;

    static PowerEnvelope odroid() {
        return PowerEnvelope{{{CoreKind::Little, {0.484, 0.940}}, {CoreKind::Big, {3.891, 7.622}}}};
    }
};

struct Violation {
    TaskId task = -1;  // -1 for graph-level rules
    std::string rule;
    std::string message;
};

using ValidationReport = std::vector<Violation>;

namespace detail {

/// Kahn topological order over task positions; nullopt when a cycle exists.
inline std::optional<std::vector<std::size_t>> topo_order(const TaskGraph& g,
                                                          const std::unordered_map<TaskId, std::size_t>& idx) {
    std::vector<int> indeg(g.size(), 0);
    for (const auto& t : g.tasks) {
        for (TaskId s : t.successors) {
            if (auto it = idx.find(s); it != idx.end()) {
                ++indeg[it->second];
            }
        }
    }
    std::vector<std::size_t> order;
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (indeg[i] == 0) ready.push_back(i);
    }
    while (!ready.empty()) {
        std::size_t i = ready.back();
        ready.pop_back();
        order.push_back(i);
        for (TaskId s : g.tasks[i].successors) {
            if (auto it = idx.find(s); it != idx.end() && --indeg[it->second] == 0) {
                ready.push_back(it->second);
            }
        }
    }
    if (order.size() != g.size()) return std::nullopt;
    return order;
}

inline std::string fmt_id(TaskId id) { return std::to_string(id); }

} // namespace detail

/// Checks every Task/TaskGraph invariant. Violations are returned, never thrown.
inline ValidationReport validate(const TaskGraph& g, const PowerEnvelope& envelope = PowerEnvelope::odroid()) {
    ValidationReport report;
    auto add = [&](TaskId id, std::string rule, std::string msg) {
        report.push_back({id, std::move(rule), std::move(msg)});
    };

    std::unordered_map<TaskId, std::size_t> idx;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!idx.emplace(g.tasks[i].id, i).second) {
            add(g.tasks[i].id, "duplicate-id", "duplicate id " + detail::fmt_id(g.tasks[i].id));
        }
    }
    if (g.period <= 0.0) add(-1, "period", "period must be positive");
    if (g.deadline <= 0.0 || g.deadline > g.period + kTimeEps) {
        add(-1, "graph-deadline", "graph deadline must lie in (0, period]");
    }

    bool refs_ok = true;
    for (const auto& t : g.tasks) {
        for (TaskId s : t.successors) {
            auto it = idx.find(s);
            if (it == idx.end()) {
                add(t.id, "unknown-id", "unknown successor " + detail::fmt_id(s) + " of " + detail::fmt_id(t.id));
                refs_ok = false;
                continue;
            }
            const auto& pr = g.tasks[it->second].predecessors;
            if (std::find(pr.begin(), pr.end(), t.id) == pr.end()) {
                add(t.id, "edge-mirror",
                    "edge " + detail::fmt_id(t.id) + "->" + detail::fmt_id(s) + " missing from predecessors");
            }
        }
        for (TaskId p : t.predecessors) {
            auto it = idx.find(p);
            if (it == idx.end()) {
                add(t.id, "unknown-id", "unknown predecessor " + detail::fmt_id(p) + " of " + detail::fmt_id(t.id));
                refs_ok = false;
                continue;
            }
            const auto& su = g.tasks[it->second].successors;
            if (std::find(su.begin(), su.end(), t.id) == su.end()) {
                add(t.id, "edge-mirror",
                    "edge " + detail::fmt_id(p) + "->" + detail::fmt_id(t.id) + " missing from successors");
            }
        }
    }
    if (refs_ok && !detail::topo_order(g, idx)) {
        add(-1, "acyclic", "edge relation contains a cycle");
    }

    for (const auto& t : g.tasks) {
        if (t.wcet_lo < 0.0 || t.wcet_hi < 0.0) {
            add(t.id, "wcet-nonnegative", "negative wcet on " + detail::fmt_id(t.id));
        }
        if (t.criticality == Criticality::LC && t.wcet_lo != t.wcet_hi) {
            add(t.id, "lc-wcet", "LC task " + detail::fmt_id(t.id) + " has wcet_lo != wcet_hi");
        }
        if (t.criticality == Criticality::HC && t.wcet_lo > t.wcet_hi) {
            add(t.id, "wcet-order", "wcet_lo > wcet_hi on " + detail::fmt_id(t.id));
        }
        if (t.wcet_hi > t.deadline + kTimeEps) {
            add(t.id, "wcet-deadline", "wcet_hi > deadline on " + detail::fmt_id(t.id));
        }
        if (t.deadline > g.deadline + kTimeEps) {
            add(t.id, "deadline-period", "deadline beyond graph deadline on " + detail::fmt_id(t.id));
        }
        if (t.is_hc()) {
            for (TaskId p : t.predecessors) {
                auto it = idx.find(p);
                if (it != idx.end() && !g.tasks[it->second].is_hc()) {
                    add(p, "hc-closure", "HC-closure broken at " + detail::fmt_id(p));
                }
            }
        }
        for (const auto& [kind, w] : t.peak_power) {
            auto it = envelope.range.find(kind);
            if (it == envelope.range.end()) continue;
            if (w < it->second.first - 1e-12 || w > it->second.second + 1e-12) {
                add(t.id, "power-envelope",
                    "peak_power " + std::to_string(w) + " W outside " + std::string(to_string(kind)) +
                        " envelope on " + detail::fmt_id(t.id));
            }
        }
    }
    return report;
}

/// Promotes every ancestor of an HC task to HC. Promoted tasks keep
/// wcet_lo == wcet_hi. Idempotent.
inline TaskGraph hc_closure(TaskGraph g) {
    auto idx = g.index();
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g.tasks[i].is_hc()) stack.push_back(i);
    }
    while (!stack.empty()) {
        std::size_t i = stack.back();
        stack.pop_back();
        for (TaskId p : g.tasks[i].predecessors) {
            auto it = idx.find(p);
            if (it == idx.end()) continue;
            Task& pt = g.tasks[it->second];
            if (!pt.is_hc()) {
                pt.criticality = Criticality::HC;
                stack.push_back(it->second);
            }
        }
    }
    return g;
}

/// Latest-finish local deadlines under wcet_hi, backward from the graph deadline.
inline std::vector<Millis> backward_deadlines(const TaskGraph& g) {
    auto idx = g.index();
    auto order = detail::topo_order(g, idx);
    if (!order) throw DomainError("task graph has a cycle");
    std::vector<Millis> d(g.size(), g.deadline);
    for (auto it = order->rbegin(); it != order->rend(); ++it) {
        const Task& t = g.tasks[*it];
        for (TaskId s : t.successors) {
            std::size_t j = idx.at(s);
            d[*it] = std::min(d[*it], d[j] - g.tasks[j].wcet_hi);
        }
    }
    return d;
}

/// Earliest possible finish of each task on unlimited cores under wcet(mode).
inline std::vector<Millis> earliest_finish(const TaskGraph& g, Mode mode) {
    auto idx = g.index();
    auto order = detail::topo_order(g, idx);
    if (!order) throw DomainError("task graph has a cycle");
    std::vector<Millis> f(g.size(), 0.0);
    for (std::size_t i : *order) {
        Millis ready = 0.0;
        for (TaskId p : g.tasks[i].predecessors) {
            ready = std::max(ready, f[idx.at(p)]);
        }
        f[i] = ready + g.tasks[i].wcet(mode);
    }
    return f;
}

enum class PowerDistribution { TruncatedNormal, Uniform };

struct GenParams {
    int n_cores = 8;
    std::pair<double, double> utilization_range{0.5, 0.75};  // U/c
    double edge_percent = 0.10;
    int n_tasks = 50;
    double hc_fraction = 0.5;
    std::pair<double, double> wcet_ratio_range{1.5, 2.5};
    std::uint64_t seed = 0;
    Millis period = 1000.0;
    PowerDistribution power_distribution = PowerDistribution::TruncatedNormal;
    PowerEnvelope envelope = PowerEnvelope::odroid();
    int max_attempts = 1000;

    void check() const {
        auto frac = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (n_tasks < 1) throw DomainError("n_tasks must be >= 1");
        if (n_cores < 1) throw DomainError("n_cores must be >= 1");
        if (!frac(utilization_range.first) || !frac(utilization_range.second) ||
            utilization_range.first > utilization_range.second) {
            throw DomainError("utilization_range must be an ordered pair inside [0,1]");
        }
        if (!frac(edge_percent)) throw DomainError("edge_percent must lie in [0,1]");
        if (!frac(hc_fraction)) throw DomainError("hc_fraction must lie in [0,1]");
        if (wcet_ratio_range.first < 1.0 || wcet_ratio_range.first > wcet_ratio_range.second) {
            throw DomainError("wcet_ratio_range must be an ordered pair >= 1");
        }
        if (period <= 0.0) throw DomainError("period must be positive");
    }
};

namespace detail {

inline double round_ms(double x) { return std::round(x * 1000.0) / 1000.0; }

/// UUniFast with discard: n shares summing to total, each at most cap.
inline std::optional<std::vector<double>> uunifast_discard(Rng& rng, int n, double total, double cap,
                                                           int attempts) {
    if (total > cap * n + 1e-12) return std::nullopt;
    for (int a = 0; a < attempts; ++a) {
        std::vector<double> u(n);
        double sum = total;
        for (int i = 0; i < n - 1; ++i) {
            double next = sum * std::pow(uniform01(rng), 1.0 / static_cast<double>(n - 1 - i));
            u[i] = sum - next;
            sum = next;
        }
        u[n - 1] = sum;
        if (std::all_of(u.begin(), u.end(), [cap](double x) { return x <= cap; })) return u;
    }
    return std::nullopt;
}

inline double draw_power(Rng& rng, std::pair<double, double> r, PowerDistribution dist) {
    auto [lo, hi] = r;
    if (dist == PowerDistribution::Uniform || hi <= lo) return uniform(rng, lo, hi);
    double mean = 0.5 * (lo + hi);
    double sigma = (hi - lo) / 6.0;
    for (int i = 0; i < 64; ++i) {
        double x = normal(rng, mean, sigma);
        if (x >= lo && x <= hi) return x;
    }
    return mean;
}

} // namespace detail

/// Random layered DAG honoring GenParams. Throws GenerationError when the
/// utilization or precedence structure cannot be realized within max_attempts.
inline TaskGraph generate(const GenParams& params) {
    params.check();
    Rng rng(mix_seed(params.seed));
    const int n = params.n_tasks;
    const double P = params.period;

    for (int attempt = 0; attempt < params.max_attempts; ++attempt) {
        double u_norm = uniform(rng, params.utilization_range.first, params.utilization_range.second);
        double total_u = u_norm * params.n_cores;
        auto shares = detail::uunifast_discard(rng, n, total_u, 1.0, params.max_attempts);
        if (!shares) {
            throw GenerationError("utilization " + std::to_string(total_u) + " unreachable with " +
                                  std::to_string(n) + " tasks");
        }

        // Layer assignment bounds the depth of the DAG.
        int layers = std::max(1, (n + params.n_cores - 1) / params.n_cores);
        layers = std::min(layers, n);
        std::vector<int> layer(n);
        for (int i = 0; i < n; ++i) {
            layer[i] = i < layers ? i : static_cast<int>(uniform_index(rng, layers));
        }
        std::sort(layer.begin(), layer.end());

        TaskGraph g;
        g.period = P;
        g.deadline = P;
        g.tasks.resize(n);
        for (int i = 0; i < n; ++i) {
            Task& t = g.tasks[i];
            t.id = i;
            t.wcet_hi = std::max(0.001, detail::round_ms((*shares)[i] * P));
            t.criticality = bernoulli(rng, params.hc_fraction) ? Criticality::HC : Criticality::LC;
        }

        double pairs = 0.5 * n * (n - 1.0);
        double cross = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (layer[i] < layer[j]) cross += 1.0;
            }
        }
        double p_edge = cross > 0.0 ? std::min(1.0, params.edge_percent * pairs / cross) : 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                if (layer[i] < layer[j] && bernoulli(rng, p_edge)) {
                    g.tasks[i].successors.push_back(j);
                    g.tasks[j].predecessors.push_back(i);
                }
            }
        }

        g = hc_closure(std::move(g));
        for (auto& t : g.tasks) {
            if (t.is_hc()) {
                double ratio = uniform(rng, params.wcet_ratio_range.first, params.wcet_ratio_range.second);
                t.wcet_lo = std::max(0.001, detail::round_ms(t.wcet_hi / ratio));
                t.wcet_lo = std::min(t.wcet_lo, t.wcet_hi);
            } else {
                t.wcet_lo = t.wcet_hi;
            }
            for (const auto& [kind, r] : params.envelope.range) {
                t.peak_power[kind] = detail::draw_power(rng, r, params.power_distribution);
            }
        }

        auto d = backward_deadlines(g);
        auto ef = earliest_finish(g, Mode::HI);
        bool feasible = true;
        for (int i = 0; i < n; ++i) {
            if (ef[i] > d[i] + kTimeEps) {
                feasible = false;
                break;
            }
            g.tasks[i].deadline = d[i];
        }
        if (feasible) return g;
    }
    throw GenerationError("no precedence structure with critical path within the deadline after " +
                          std::to_string(params.max_attempts) + " attempts");
}

/// Actual execution time uniform in [2/3 C, C], C the mode's WCET.
inline Millis draw_actual_execution_time(const Task& task, Mode mode, Rng& rng) {
    Millis c = task.wcet(mode);
    if (c <= 0.0) return 0.0;
    return uniform(rng, 2.0 * c / 3.0, c);
}

/// Fraction of ordered pairs (i<j in topological numbering) joined by an edge.
inline double edge_fraction(const TaskGraph& g) {
    if (g.size() < 2) return 0.0;
    std::size_t edges = 0;
    for (const auto& t : g.tasks) edges += t.successors.size();
    return static_cast<double>(edges) / (0.5 * g.size() * (g.size() - 1.0));
}

/// Σ wcet_hi / period.
inline double total_utilization(const TaskGraph& g) {
    double s = 0.0;
    for (const auto& t : g.tasks) s += t.wcet_hi;
    return g.period > 0.0 ? s / g.period : 0.0;
}

} // namespace mcpeak
