#pragma once

// Building blocks of the run-time look-ahead policy. Everything here is a pure
// function over plain data so it can be tested without a running simulation.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "platform.hpp"
#include "static_scheduler.hpp"
#include "taskgraph.hpp"
#include "types.hpp"

namespace mcpeak {

enum class SlackOrigin { EarlyFinish, IdleGap };

inline std::string_view to_string(SlackOrigin o) { return o == SlackOrigin::EarlyFinish ? "early_finish" : "idle_gap"; }

struct SlackEvent {
    CoreId core_id = 0;
    Millis time = 0.0;
    Millis amount = 0.0;
    SlackOrigin origin = SlackOrigin::IdleGap;
};

struct FinishedTask {
    Millis budget = 0.0;  // C^MO of the task that just finished
    Millis actual = 0.0;
};

/// Slack available on `core` at `now`. With a next entry the slack runs up to
/// its planned start (this covers both C^MO − ACT and any table gap behind it);
/// without one, only the early-finish residue is reported.
inline std::optional<SlackEvent> extract_dynamic_slack(CoreId core, Millis now, std::optional<FinishedTask> finished,
                                                       std::optional<Millis> next_start) {
    constexpr Millis eps = 1e-9;
    const bool early = finished && finished->actual < finished->budget - eps;
    SlackEvent ev{core, now, 0.0, early ? SlackOrigin::EarlyFinish : SlackOrigin::IdleGap};
    if (next_start) {
        ev.amount = *next_start - now;
    } else if (finished) {
        ev.amount = finished->budget - finished->actual;
    }
    if (ev.amount <= eps) return std::nullopt;
    return ev;
}

/// Decision overhead of one slack event: look-ahead plus one remap probe per examined core.
inline Millis scheduling_overhead(const OverheadModel& ov, int n_cores_checked) {
    return ov.to_lookahead + ov.to_remap_per_core * std::max(0, n_cores_checked);
}

inline Millis total_overhead(const OverheadModel& ov, int n_cores_checked) {
    return scheduling_overhead(ov, n_cores_checked) + ov.to_vf;
}

inline Millis usable_slack(const SlackEvent& ev, const OverheadModel& ov, int n_cores_checked) {
    if (ev.amount <= 0.0) throw DomainError("slack amount must be positive");
    return ev.amount - total_overhead(ov, n_cores_checked);
}

struct CostNormalizer {
    double energy_max = 0.0;
    double power_max = 0.0;
};

inline double cost_score(double energy, double power, double alpha, double beta, const CostNormalizer& n) {
    double e = n.energy_max > 0.0 ? energy / n.energy_max : 0.0;
    double p = n.power_max > 0.0 ? power / n.power_max : 0.0;
    return alpha * e + beta * p;
}

inline double cost_task(const Task& task, CoreKind kind, double alpha, double beta, const CostNormalizer& n,
                        Mode mode = Mode::LO) {
    return cost_score(task.energy(kind, mode), task.power(kind), alpha, beta, n);
}

/// Normalizer over a set of tasks; throws on an empty set.
inline CostNormalizer make_normalizer(std::span<const Task* const> tasks, CoreKind kind, Mode mode = Mode::LO) {
    if (tasks.empty()) throw DomainError("cost normalizer needs at least one candidate");
    CostNormalizer n;
    for (const Task* t : tasks) {
        n.energy_max = std::max(n.energy_max, t->energy(kind, mode));
        n.power_max = std::max(n.power_max, t->power(kind));
    }
    return n;
}

struct Candidate {
    TaskId task = 0;
    std::size_t position = 0;  // 0 = immediate next entry
    double energy = 0.0;       // J
    double power = 0.0;        // W at f_max
    bool eligible = true;
};

/// Index into `cands` of the eligible candidate with the highest cost; ties go
/// to the earliest position. Normalization runs over the eligible set only.
inline std::optional<std::size_t> select_lookahead_task(std::span<const Candidate> cands, double alpha, double beta) {
    CostNormalizer n;
    bool any = false;
    for (const auto& c : cands) {
        if (!c.eligible) continue;
        any = true;
        n.energy_max = std::max(n.energy_max, c.energy);
        n.power_max = std::max(n.power_max, c.power);
    }
    if (!any) return std::nullopt;
    std::optional<std::size_t> best;
    double best_score = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
        if (!cands[i].eligible) continue;
        double s = cost_score(cands[i].energy, cands[i].power, alpha, beta, n);
        bool tie = best && std::abs(s - best_score) <= 1e-12;
        if (!best || (!tie && s > best_score) || (tie && cands[i].position < cands[*best].position)) {
            best = i;
            best_score = s;
        }
    }
    return best;
}

/// A task may start early when everything it waits on is expected to be done
/// by its shifted start.
inline bool can_start_early(Millis release, Millis start, Millis slack) { return release <= start - slack + 1e-9; }

inline double required_frequency(Millis wcet, Millis usable, const Cluster& cluster) {
    if (usable <= 0.0) throw DomainError("usable slack must be positive");
    const double f_max = cluster.top().frequency;
    const double f_min = cluster.bottom().frequency;
    if (wcet <= 0.0) return f_min;
    return std::max(f_min, wcet / (wcet + usable) * f_max);
}

inline int compute_frequency_index(const Task& task, Mode mode, Millis usable, const Cluster& cluster) {
    return quantize_up_index(cluster, required_frequency(task.wcet(mode), usable, cluster));
}

inline VfLevel compute_frequency(const Task& task, Mode mode, Millis usable, const Cluster& cluster) {
    return cluster.vf_table[compute_frequency_index(task, mode, usable, cluster)];
}

/// A pending table entry on a core, as the run-time scheduler sees it.
struct QueuedEntry {
    std::size_t task = 0;  // index into the graph's task vector
    Millis start = 0.0;
    Millis deadline = 0.0;
    int level = -1;        // granted V-f level, -1 when none (runs at max)
    Millis stall = 0.0;    // overhead paid before execution begins
};

/// Moves the first `position` entries (the shift list) and the selected entry
/// earlier by `slack`; the selected entry keeps its deadline and records the
/// granted level and stall.
template <class Queue>
void apply_selection(Queue& queue, std::size_t position, Millis slack, int level, Millis stall) {
    if (position >= queue.size()) throw DomainError("selection outside the pending queue");
    for (std::size_t i = 0; i < position; ++i) {
        queue[i].start -= slack;
        queue[i].deadline -= slack;
    }
    queue[position].start -= slack;
    queue[position].level = level;
    queue[position].stall = stall;
}

struct RemapOption {
    CoreId core = 0;
    double energy = 0.0;  // windowed energy, J
    bool free = false;    // has a free slot covering the shifted interval
};

/// Least-loaded free sibling whose energy is below Γ × the base core's energy.
inline std::optional<CoreId> select_remap_core(const Platform& p, CoreId base, double base_energy,
                                               std::span<const RemapOption> options, double gamma) {
    const int cluster = p.cluster_of(base);
    const double threshold = gamma * base_energy;
    std::optional<RemapOption> best;
    for (const auto& o : options) {
        if (o.core == base || !o.free || p.cluster_of(o.core) != cluster) continue;
        if (!(o.energy < threshold)) continue;
        if (!best || o.energy < best->energy || (o.energy == best->energy && o.core < best->core)) best = o;
    }
    if (!best) return std::nullopt;
    return best->core;
}

} // namespace mcpeak
