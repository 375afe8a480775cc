#pragma once

// Design-time mapping and scheduling tables for LO and HI mode.
//
// The HI table is built first: HC tasks are list-scheduled by EDF with
// earliest-finish-time core selection, then LC tasks are admitted into idle
// gaps in EDF order while they still meet their deadlines. The LO table keeps
// every HC task on its HI core, in the same per-core order, starting no later
// than in the HI table, so a mid-period switch to the HI table never makes an
// HC task late.

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "platform.hpp"
#include "taskgraph.hpp"
#include "types.hpp"

namespace mcpeak {

struct ScheduleEntry {
    TaskId task_id = 0;
    CoreId core_id = 0;
    Millis start = 0.0;
    Millis deadline = 0.0;  // absolute finish bound within the period
    Mode mode = Mode::LO;

    friend bool operator==(const ScheduleEntry&, const ScheduleEntry&) = default;
};

struct ScheduleTable {
    Mode mode = Mode::LO;
    std::map<CoreId, std::vector<ScheduleEntry>> cores;  // each ordered by start
    std::set<TaskId> dropped_lc;

    const ScheduleEntry* find(TaskId id) const {
        for (const auto& [core, entries] : cores) {
            for (const auto& e : entries) {
                if (e.task_id == id) return &e;
            }
        }
        return nullptr;
    }

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& [core, entries] : cores) n += entries.size();
        return n;
    }

    friend bool operator==(const ScheduleTable&, const ScheduleTable&) = default;
};

struct ScheduleTables {
    ScheduleTable lo;
    ScheduleTable hi;

    const ScheduleTable& for_mode(Mode m) const { return m == Mode::HI ? hi : lo; }

    friend bool operator==(const ScheduleTables&, const ScheduleTables&) = default;
};

/// Timing overheads of the run-time scheduler. Microsecond constants are stored in ms.
struct OverheadModel {
    Millis to_lookahead = 0.056417;        // 56.417 us worst case of the look-ahead unit
    Millis to_remap_per_core = 0.06454;    // 64.54 us per examined core
    Millis to_vf = 12.025;                 // V-f switch latency
    Millis to_vf_down = 12.025;            // optional asymmetric scale-down latency
    Millis to_remap_migration = 3.75;      // migration latency, hidden behind the V-f switch

    static OverheadModel none() { return {0.0, 0.0, 0.0, 0.0, 0.0}; }

    void check() const {
        if (to_lookahead < 0 || to_remap_per_core < 0 || to_vf < 0 || to_vf_down < 0 || to_remap_migration < 0) {
            throw DomainError("overheads must be non-negative");
        }
        if (to_remap_migration > to_vf) {
            throw DomainError("re-mapping latency must not exceed the V-f switch latency");
        }
    }

    friend bool operator==(const OverheadModel&, const OverheadModel&) = default;
};

namespace detail {

struct Slot {
    Millis start;
    Millis end;
};

using Timeline = std::map<CoreId, std::vector<Slot>>;  // sorted by start

inline bool edf_before(const Task& a, const Task& b) {
    if (a.deadline != b.deadline) return a.deadline < b.deadline;
    return a.id < b.id;
}

/// Earliest start >= est of a gap of length c on the timeline that ends by limit.
inline std::optional<Millis> earliest_gap(const std::vector<Slot>& slots, Millis est, Millis c, Millis limit) {
    Millis t = est;
    for (const auto& s : slots) {
        if (s.end <= t + kTimeEps) continue;
        if (t + c <= s.start + kTimeEps) break;
        t = std::max(t, s.end);
    }
    if (t + c <= limit + kTimeEps) return t;
    return std::nullopt;
}

inline void insert_slot(std::vector<Slot>& slots, Slot s) {
    auto it = std::lower_bound(slots.begin(), slots.end(), s.start,
                               [](const Slot& a, Millis v) { return a.start < v; });
    slots.insert(it, s);
}

struct Placement {
    CoreId core;
    Millis start;
};

/// EDF list scheduling without insertion. `pinned` fixes the core of a task.
/// Throws UnschedulableError on the first task that cannot meet its deadline.
inline std::unordered_map<TaskId, Placement> list_schedule(const TaskGraph& g, const std::vector<TaskId>& subset,
                                                           Mode mode, const std::vector<CoreId>& cores,
                                                           const std::unordered_map<TaskId, CoreId>& pinned) {
    std::set<TaskId> members(subset.begin(), subset.end());
    std::unordered_map<TaskId, int> waiting;
    for (TaskId id : subset) {
        int n = 0;
        for (TaskId p : g.at(id).predecessors) n += members.count(p) ? 1 : 0;
        waiting[id] = n;
    }
    auto cmp = [&g](TaskId a, TaskId b) { return edf_before(g.at(a), g.at(b)); };
    std::set<TaskId, decltype(cmp)> ready(cmp);
    for (TaskId id : subset) {
        if (waiting[id] == 0) ready.insert(id);
    }

    std::map<CoreId, Millis> free_at;
    for (CoreId c : cores) free_at[c] = 0.0;
    std::unordered_map<TaskId, Placement> out;
    std::unordered_map<TaskId, Millis> finish;

    while (!ready.empty()) {
        TaskId id = *ready.begin();
        ready.erase(ready.begin());
        const Task& t = g.at(id);
        Millis est = 0.0;
        for (TaskId p : t.predecessors) {
            if (auto it = finish.find(p); it != finish.end()) est = std::max(est, it->second);
        }
        Millis c = t.wcet(mode);
        std::optional<Placement> best;
        Millis best_finish = std::numeric_limits<Millis>::infinity();
        for (CoreId core : cores) {
            if (auto pin = pinned.find(id); pin != pinned.end() && pin->second != core) continue;
            Millis s = std::max(est, free_at[core]);
            if (s + c < best_finish - kTimeEps) {
                best_finish = s + c;
                best = Placement{core, s};
            }
        }
        if (!best || best_finish > t.deadline + kTimeEps) {
            throw UnschedulableError(id, "task " + std::to_string(id) + " misses its deadline in " +
                                             std::string(to_string(mode)) + " mode");
        }
        out[id] = *best;
        finish[id] = best_finish;
        free_at[best->core] = best_finish;
        for (TaskId s : t.successors) {
            if (members.count(s) && --waiting[s] == 0) ready.insert(s);
        }
    }
    if (out.size() != subset.size()) {
        throw DomainError("task subset is not closed under predecessors");
    }
    return out;
}

/// Inserts LC tasks into idle gaps in EDF order. Returns the dropped ids.
inline std::set<TaskId> admit_lc(const TaskGraph& g, Mode mode, const std::vector<CoreId>& cores,
                                 std::unordered_map<TaskId, Placement>& placed, Timeline& timeline,
                                 bool must_place) {
    std::vector<TaskId> lc;
    for (const auto& t : g.tasks) {
        if (!t.is_hc()) lc.push_back(t.id);
    }
    std::set<TaskId> lc_set(lc.begin(), lc.end());
    std::unordered_map<TaskId, int> waiting;
    for (TaskId id : lc) {
        int n = 0;
        for (TaskId p : g.at(id).predecessors) n += lc_set.count(p) ? 1 : 0;
        waiting[id] = n;
    }
    auto cmp = [&g](TaskId a, TaskId b) { return edf_before(g.at(a), g.at(b)); };
    std::set<TaskId, decltype(cmp)> ready(cmp);
    for (TaskId id : lc) {
        if (waiting[id] == 0) ready.insert(id);
    }

    std::set<TaskId> dropped;
    while (!ready.empty()) {
        TaskId id = *ready.begin();
        ready.erase(ready.begin());
        const Task& t = g.at(id);
        bool pred_missing = false;
        Millis est = 0.0;
        for (TaskId p : t.predecessors) {
            auto it = placed.find(p);
            if (it == placed.end()) {
                pred_missing = true;
                break;
            }
            est = std::max(est, it->second.start + g.at(p).wcet(mode));
        }
        std::optional<Placement> best;
        if (!pred_missing) {
            Millis best_finish = std::numeric_limits<Millis>::infinity();
            for (CoreId core : cores) {
                auto s = earliest_gap(timeline[core], est, t.wcet(mode), t.deadline);
                if (s && *s + t.wcet(mode) < best_finish - kTimeEps) {
                    best_finish = *s + t.wcet(mode);
                    best = Placement{core, *s};
                }
            }
        }
        if (best) {
            placed[id] = *best;
            insert_slot(timeline[best->core], {best->start, best->start + t.wcet(mode)});
        } else {
            if (must_place) {
                throw UnschedulableError(id, "LC task " + std::to_string(id) + " does not fit the " +
                                                 std::string(to_string(mode)) + " table");
            }
            dropped.insert(id);
        }
        for (TaskId s : t.successors) {
            if (lc_set.count(s) && --waiting[s] == 0) ready.insert(s);
        }
    }
    return dropped;
}

/// Assembles a table. An entry's finish bound is its task deadline, tightened
/// by whatever starts next on the core or among its successors.
inline ScheduleTable assemble(const TaskGraph& g, Mode mode, const std::vector<CoreId>& cores,
                              const std::unordered_map<TaskId, Placement>& placed, std::set<TaskId> dropped) {
    ScheduleTable table;
    table.mode = mode;
    table.dropped_lc = std::move(dropped);
    for (CoreId c : cores) table.cores[c];
    for (const auto& [id, p] : placed) {
        table.cores[p.core].push_back({id, p.core, p.start, 0.0, mode});
    }
    for (auto& [core, entries] : table.cores) {
        std::sort(entries.begin(), entries.end(), [](const ScheduleEntry& a, const ScheduleEntry& b) {
            return a.start != b.start ? a.start < b.start : a.task_id < b.task_id;
        });
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const Task& t = g.at(entries[i].task_id);
            Millis bound = std::min(t.deadline, g.deadline);
            if (i + 1 < entries.size()) bound = std::min(bound, entries[i + 1].start);
            for (TaskId s : t.successors) {
                if (auto it = placed.find(s); it != placed.end()) bound = std::min(bound, it->second.start);
            }
            entries[i].deadline = bound;
        }
    }
    return table;
}

inline bool lo_table_switch_safe(const TaskGraph& g, const std::unordered_map<TaskId, Placement>& lo,
                                 const std::unordered_map<TaskId, Placement>& hi) {
    std::map<CoreId, std::vector<std::pair<Millis, TaskId>>> lo_order;
    std::map<CoreId, std::vector<std::pair<Millis, TaskId>>> hi_order;
    for (const auto& t : g.tasks) {
        if (!t.is_hc()) continue;
        const auto& l = lo.at(t.id);
        const auto& h = hi.at(t.id);
        if (l.core != h.core || l.start > h.start + kTimeEps) return false;
        lo_order[l.core].push_back({l.start, t.id});
        hi_order[h.core].push_back({h.start, t.id});
    }
    for (auto& [core, v] : lo_order) {
        auto& w = hi_order[core];
        std::sort(v.begin(), v.end());
        std::sort(w.begin(), w.end());
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i].second != w[i].second) return false;
        }
    }
    return true;
}

} // namespace detail

/// Builds the LO and HI tables. Throws UnschedulableError naming the first
/// task that cannot be placed.
inline ScheduleTables build_tables(const TaskGraph& g, const Platform& platform) {
    const auto cores = platform.cores();
    if (cores.empty()) throw DomainError("platform has no cores");
    ScheduleTables out;
    if (g.empty()) {
        out.lo = detail::assemble(g, Mode::LO, cores, {}, {});
        out.hi = detail::assemble(g, Mode::HI, cores, {}, {});
        return out;
    }

    // HI: HC tasks first, then greedy LC admission.
    std::vector<TaskId> hc;
    for (const auto& t : g.tasks) {
        if (t.is_hc()) hc.push_back(t.id);
    }
    auto hi_placed = detail::list_schedule(g, hc, Mode::HI, cores, {});
    detail::Timeline hi_timeline;
    for (const auto& [id, p] : hi_placed) {
        detail::insert_slot(hi_timeline[p.core], {p.start, p.start + g.at(id).wcet_hi});
    }
    auto dropped = detail::admit_lc(g, Mode::HI, cores, hi_placed, hi_timeline, false);
    out.hi = detail::assemble(g, Mode::HI, cores, hi_placed, std::move(dropped));

    // LO: equal-priority EDF with HC tasks pinned to their HI core.
    std::vector<TaskId> all;
    for (const auto& t : g.tasks) all.push_back(t.id);
    std::unordered_map<TaskId, CoreId> pin;
    for (TaskId id : hc) pin[id] = hi_placed.at(id).core;

    std::optional<std::unordered_map<TaskId, detail::Placement>> lo_placed;
    try {
        auto attempt = detail::list_schedule(g, all, Mode::LO, cores, pin);
        if (detail::lo_table_switch_safe(g, attempt, hi_placed)) lo_placed = std::move(attempt);
    } catch (const UnschedulableError&) {
    }

    if (!lo_placed) {
        // HC tasks replay the HI order with LO budgets; LC tasks fill the gaps.
        std::vector<TaskId> order = hc;
        std::sort(order.begin(), order.end(), [&](TaskId a, TaskId b) {
            const auto& pa = hi_placed.at(a);
            const auto& pb = hi_placed.at(b);
            return pa.start != pb.start ? pa.start < pb.start : a < b;
        });
        std::unordered_map<TaskId, detail::Placement> placed;
        std::map<CoreId, Millis> free_at;
        detail::Timeline timeline;
        for (TaskId id : order) {
            const Task& t = g.at(id);
            CoreId core = hi_placed.at(id).core;
            Millis s = free_at[core];
            for (TaskId p : t.predecessors) s = std::max(s, placed.at(p).start + g.at(p).wcet_lo);
            if (s + t.wcet_lo > t.deadline + kTimeEps) {
                throw UnschedulableError(id, "task " + std::to_string(id) + " misses its deadline in LO mode");
            }
            placed[id] = {core, s};
            free_at[core] = s + t.wcet_lo;
            detail::insert_slot(timeline[core], {s, s + t.wcet_lo});
        }
        detail::admit_lc(g, Mode::LO, cores, placed, timeline, true);
        lo_placed = std::move(placed);
    }
    out.lo = detail::assemble(g, Mode::LO, cores, *lo_placed, {});
    return out;
}

struct TableReport {
    std::vector<Violation> violations;
    std::vector<std::string> notes;

    bool ok() const { return violations.empty(); }
};

/// Independent feasibility check of one table: coverage, non-overlap,
/// precedence and the deadline constraint at f_max.
inline TableReport check_table(const TaskGraph& g, const ScheduleTable& table, const Platform& platform,
                               const OverheadModel& overheads = {}) {
    TableReport r;
    auto add = [&](TaskId id, std::string rule, std::string msg) {
        r.violations.push_back({id, std::move(rule), std::move(msg)});
    };
    const Mode mode = table.mode;
    auto platform_cores = platform.cores();

    std::unordered_map<TaskId, const ScheduleEntry*> where;
    for (const auto& [core, entries] : table.cores) {
        if (!std::binary_search(platform_cores.begin(), platform_cores.end(), core)) {
            add(-1, "core", "table uses unknown core " + std::to_string(core));
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& e = entries[i];
            const Task* t = g.find(e.task_id);
            if (!t) {
                add(e.task_id, "unknown-id", "table entry for unknown task " + std::to_string(e.task_id));
                continue;
            }
            if (!where.emplace(e.task_id, &e).second) {
                add(e.task_id, "duplicate", "task " + std::to_string(e.task_id) + " appears twice");
            }
            if (e.core_id != core) add(e.task_id, "core", "entry core field disagrees with its core list");
            if (e.mode != mode) add(e.task_id, "mode", "entry mode disagrees with table mode");
            Millis c = t->wcet(mode);
            if (e.start < -kTimeEps) add(e.task_id, "start", "negative start");
            if (e.start + c > e.deadline + 1e-6) {
                add(e.task_id, "deadline", "task " + std::to_string(e.task_id) + " cannot finish by its deadline");
            }
            if (e.deadline > t->deadline + 1e-6) {
                add(e.task_id, "deadline", "entry deadline beyond task deadline on " + std::to_string(e.task_id));
            }
            if (e.deadline - e.start - c < overheads.to_vf) {
                r.notes.push_back("task " + std::to_string(e.task_id) + " has less headroom than one V-f switch");
            }
            if (i > 0) {
                const auto& prev = entries[i - 1];
                const Task* pt = g.find(prev.task_id);
                if (prev.start > e.start) add(e.task_id, "order", "entries not ordered by start");
                if (pt && prev.start + pt->wcet(mode) > e.start + 1e-6) {
                    add(e.task_id, "overlap",
                        "tasks " + std::to_string(prev.task_id) + " and " + std::to_string(e.task_id) +
                            " overlap on core " + std::to_string(core));
                }
            }
        }
    }

    for (const auto& t : g.tasks) {
        bool placed = where.count(t.id) > 0;
        bool dropped = table.dropped_lc.count(t.id) > 0;
        if (mode == Mode::LO && !placed) add(t.id, "coverage", "task missing from LO table");
        if (mode == Mode::HI) {
            if (t.is_hc() && !placed) add(t.id, "coverage", "HC task missing from HI table");
            if (t.is_hc() && dropped) add(t.id, "coverage", "HC task listed as dropped");
            if (!t.is_hc() && placed == dropped) add(t.id, "coverage", "LC task must be either placed or dropped");
        }
        if (!placed) continue;
        const auto* e = where.at(t.id);
        for (TaskId p : t.predecessors) {
            auto it = where.find(p);
            if (it == where.end()) {
                add(t.id, "precedence", "predecessor " + std::to_string(p) + " not in table");
                continue;
            }
            if (it->second->start + g.at(p).wcet(mode) > e->start + 1e-6) {
                add(t.id, "precedence",
                    "task " + std::to_string(t.id) + " starts before predecessor " + std::to_string(p) + " ends");
            }
        }
    }
    if (mode == Mode::LO && !table.dropped_lc.empty()) add(-1, "coverage", "LO table cannot drop tasks");
    return r;
}

/// Violations of the LO/HI consistency that makes a mid-period switch safe.
inline std::vector<Violation> check_switch_safety(const TaskGraph& g, const ScheduleTables& tables) {
    std::vector<Violation> out;
    std::map<CoreId, std::vector<std::pair<Millis, TaskId>>> lo_order, hi_order;
    for (const auto& t : g.tasks) {
        if (!t.is_hc()) continue;
        const auto* l = tables.lo.find(t.id);
        const auto* h = tables.hi.find(t.id);
        if (!l || !h) {
            out.push_back({t.id, "coverage", "HC task missing from a table"});
            continue;
        }
        if (l->core_id != h->core_id) out.push_back({t.id, "switch-core", "HC task changes core between modes"});
        if (l->start > h->start + kTimeEps) out.push_back({t.id, "switch-start", "HC task starts later in LO"});
        lo_order[l->core_id].push_back({l->start, t.id});
        hi_order[h->core_id].push_back({h->start, t.id});
    }
    for (auto& [core, v] : lo_order) {
        auto& w = hi_order[core];
        std::sort(v.begin(), v.end());
        std::sort(w.begin(), w.end());
        for (std::size_t i = 0; i < std::min(v.size(), w.size()); ++i) {
            if (v[i].second != w[i].second) {
                out.push_back({v[i].second, "switch-order", "HC order differs between modes"});
                break;
            }
        }
    }
    return out;
}

} // namespace mcpeak
