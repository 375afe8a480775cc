#pragma once

// Discrete-event execution of one period. Entries start when their table time
// comes up; slack is handed to look-ahead candidates as it appears.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "governor.hpp"
#include "platform.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "static_scheduler.hpp"
#include "taskgraph.hpp"
#include "thermal_energy.hpp"
#include "trace.hpp"
#include "types.hpp"

namespace mcpeak {

enum class PolicyKind { Proposed, StaticMaxFreq, ImmediateNext };

inline std::string_view to_string(PolicyKind k) {
    switch (k) {
    case PolicyKind::Proposed: return "proposed";
    case PolicyKind::StaticMaxFreq: return "static-max";
    case PolicyKind::ImmediateNext: return "immediate-next";
    }
    return "?";
}

inline PolicyKind policy_kind_from_string(std::string_view s) {
    for (auto k : {PolicyKind::Proposed, PolicyKind::StaticMaxFreq, PolicyKind::ImmediateNext}) {
        if (to_string(k) == s) return k;
    }
    throw DomainError("unknown policy '" + std::string(s) + "'");
}

struct PolicyConfig {
    int k = 4;
    double alpha = 0.5;
    double beta = 0.5;
    double gamma = 0.9;
    bool remap_enabled = true;
    PolicyKind kind = PolicyKind::Proposed;
    bool deduct_overheads = true;  // false = ablation: act on the raw slack

    void check() const {
        if (k < 1) throw DomainError("look-ahead depth k must be >= 1");
        if (alpha < 0.0 || alpha > 1.0 || beta < 0.0 || beta > 1.0) throw DomainError("alpha and beta must lie in [0,1]");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0,1]");
    }

    int effective_k() const { return kind == PolicyKind::ImmediateNext ? 1 : k; }
    bool effective_remap() const { return kind == PolicyKind::Proposed && remap_enabled; }

    static PolicyConfig static_max() {
        PolicyConfig p;
        p.kind = PolicyKind::StaticMaxFreq;
        return p;
    }
    static PolicyConfig immediate_next() {
        PolicyConfig p;
        p.kind = PolicyKind::ImmediateNext;
        p.k = 1;
        p.remap_enabled = false;
        return p;
    }

    friend bool operator==(const PolicyConfig&, const PolicyConfig&) = default;
};

struct SimConfig {
    std::uint64_t seed = 0;
    double overrun_probability = 0.0;          // chance an HC task draws from its HI range
    std::map<TaskId, Millis> actual_override;  // forced actual execution times
    bool strict = true;                        // deadline miss -> SimulationFault
    Millis sample_period = 1.0;
    Millis energy_window = 2000.0;
    ThermalParams thermal;

    void check() const {
        if (overrun_probability < 0.0 || overrun_probability > 1.0) throw DomainError("overrun probability outside [0,1]");
        if (sample_period <= 0.0) throw DomainError("sample period must be positive");
        thermal.check();
    }
};

struct SimResult {
    Trace trace;
    Metrics metrics;
};

/// Actual execution times for one period, drawn in task order from `seed`.
inline std::vector<Millis> draw_actual_times(const TaskGraph& g, const SimConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, 0xac7));
    std::vector<Millis> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) out[i] = draw_actual_execution_time(g.tasks[i], Mode::LO, rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto& t = g.tasks[i];
        if (t.is_hc() && bernoulli(rng, cfg.overrun_probability)) {
            out[i] = uniform(rng, t.wcet_lo, t.wcet_hi);
        }
    }
    for (const auto& [id, v] : cfg.actual_override) {
        const Task* t = g.find(id);
        if (!t) throw DomainError("override for unknown task " + std::to_string(id));
        Millis cap = t->is_hc() ? t->wcet_hi : t->wcet_lo;
        if (v < 0.0 || v > cap + kTimeEps) throw DomainError("override outside [0, WCET] for task " + std::to_string(id));
        out[&*t - g.tasks.data()] = v;
    }
    return out;
}

namespace detail {

enum class Status { Pending, Stalling, Running, Done, Dropped };
enum class CoreState { Idle, Stalling, Running };

struct TaskState {
    Status status = Status::Pending;
    CoreId core = -1;
    Millis budget = 0.0;
    Millis actual = 0.0;
    Millis deadline = 0.0;  // finish bound of the current entry (set at start)
    int level = -1;
    Millis stall_end = 0.0;
    Millis exec_start = 0.0;
    Millis work = 0.0;
    Millis bound = 0.0;  // latest finish while running
    Millis finish = 0.0;
    bool received_slack = false;
};

struct CoreRt {
    CoreState state = CoreState::Idle;
    int task = -1;
    std::deque<QueuedEntry> queue;
    std::optional<FinishedTask> last_finished;
    PowerSegment open;
};

struct DomainRt {
    VfDomain dom;
    int target = 0;
    int prev = 0;
    Millis window_end = 0.0;
};

class Simulator {
public:
    Simulator(const TaskGraph& g, const ScheduleTables& tables, const Platform& p, const PolicyConfig& pol,
              const OverheadModel& ov, const SimConfig& cfg)
        : g_(g), tables_(tables), p_(p), pol_(pol), ov_(ov), cfg_(cfg), ledger_(cfg.energy_window) {
        pol.check();
        ov.check();
        cfg.check();
        idx_ = g.index();
        tasks_.resize(g.size());
        auto actual = draw_actual_times(g, cfg);
        for (std::size_t i = 0; i < g.size(); ++i) {
            tasks_[i].actual = actual[i];
            tasks_[i].budget = g.tasks[i].wcet_lo;
        }
        for (CoreId c : p.cores()) cores_[c] = CoreRt{};
        for (const auto& d : vf_domains(p)) {
            const auto& cl = p.cluster(d.cluster);
            DomainRt rt{d, cl.max_level(), cl.max_level(), 0.0};
            for (CoreId c : d.cores) core_domain_[c] = static_cast<int>(domains_.size());
            domains_.push_back(rt);
        }
        for (const auto& [core, entries] : tables.lo.cores) {
            for (const auto& e : entries) {
                std::size_t ti = idx_.at(e.task_id);
                cores_.at(core).queue.push_back({ti, e.start, e.deadline, -1, 0.0});
                tasks_[ti].core = core;
            }
        }
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (tasks_[i].core < 0) throw DomainError("task " + std::to_string(g.tasks[i].id) + " missing from the LO table");
        }
        trace_.meta.graph_fingerprint = graph_fingerprint(g);
        trace_.meta.platform = p.name;
        trace_.meta.seed = cfg.seed;
        trace_.meta.policy = std::string(to_string(pol.kind));
        trace_.meta.sample_period = cfg.sample_period;
    }

    SimResult run() {
        for (auto& [c, core] : cores_) core.open = {0.0, 0.0, core_power(c), freq_of(c), -1};
        std::vector<CoreId> slack_cores;
        for (const auto& [c, core] : cores_) slack_cores.push_back(c);
        step(slack_cores);
        while (true) {
            Millis tn = next_event_time();
            if (!std::isfinite(tn)) break;
            advance(tn);
            step({});
        }
        finish_run();
        SimResult r;
        r.metrics = summarize(trace_);
        r.trace = std::move(trace_);
        return r;
    }

private:
    const Task& task(std::size_t ti) const { return g_.tasks[ti]; }
    const Cluster& cluster_of(CoreId c) const { return p_.cluster_for_core(c); }
    DomainRt& domain_of(CoreId c) { return domains_[core_domain_.at(c)]; }

    double rate(CoreId c) {
        const auto& d = domain_of(c);
        return scaling_factors(cluster_of(c), d.target).rho1;
    }

    int power_level(const DomainRt& d) const { return now_ < d.window_end - kTimeEps ? std::max(d.prev, d.target) : d.target; }

    double core_power(CoreId c) {
        const auto& d = domain_of(c);
        const auto& cl = cluster_of(c);
        int pl = power_level(d);
        const auto& core = cores_.at(c);
        if (core.state == CoreState::Running) return task_power_at_level(task(core.task), cl, pl);
        return idle_power(cl.power_params, scaling_factors(cl, pl).rho2);
    }

    double freq_of(CoreId c) { return cluster_of(c).vf_table[domain_of(c).target].frequency; }

    // Estimated latest finish of a task as currently planned.
    Millis est_finish(std::size_t ti) {
        const auto& ts = tasks_[ti];
        switch (ts.status) {
        case Status::Done: return ts.finish;
        case Status::Dropped: return 0.0;
        case Status::Running: return ts.bound;
        case Status::Stalling: return ts.stall_end + ts.budget / level_rate(ts.core, ts.level);
        case Status::Pending: break;
        }
        for (const auto& e : cores_.at(ts.core).queue) {
            if (e.task == ti) return e.start + e.stall + ts.budget / level_rate(ts.core, e.level);
        }
        return std::numeric_limits<double>::infinity();
    }

    double level_rate(CoreId c, int level) {
        if (level < 0) return 1.0;
        return scaling_factors(cluster_of(c), level).rho1;
    }

    bool preds_done(std::size_t ti) const {
        for (TaskId p : task(ti).predecessors) {
            if (tasks_[idx_.at(p)].status != Status::Done) return false;
        }
        return true;
    }

    void emit(EventKind kind, int core, TaskId tid, std::map<std::string, double> values = {}, std::string detail = {}) {
        trace_.events.push_back({now_, kind, core, tid, std::move(values), std::move(detail)});
    }

    Millis next_event_time() {
        Millis tn = std::numeric_limits<double>::infinity();
        for (auto& [c, core] : cores_) {
            if (core.state == CoreState::Running) {
                auto& ts = tasks_[core.task];
                double r = rate(c);
                tn = std::min(tn, now_ + std::max(0.0, ts.actual - ts.work) / r);
                if (mode_ == Mode::LO && task(core.task).is_hc() && ts.actual > ts.budget + kTimeEps && ts.work < ts.budget) {
                    tn = std::min(tn, now_ + (ts.budget - ts.work) / r);
                }
            } else if (core.state == CoreState::Stalling) {
                tn = std::min(tn, tasks_[core.task].stall_end);
            } else if (!core.queue.empty()) {
                const auto& f = core.queue.front();
                if (f.start > now_ + kTimeEps && preds_done(f.task)) tn = std::min(tn, f.start);
            }
        }
        for (const auto& d : domains_) {
            if (d.window_end > now_ + kTimeEps) tn = std::min(tn, d.window_end);
        }
        return tn;
    }

    void advance(Millis tn) {
        for (auto& [c, core] : cores_) {
            if (core.state != CoreState::Running) continue;
            auto& ts = tasks_[core.task];
            ts.work += rate(c) * (tn - now_);
        }
        now_ = tn;
        refresh_segments();
    }

    void refresh_segments() {
        for (auto& [c, core] : cores_) {
            PowerSegment s{now_, now_, core_power(c), freq_of(c),
                           core.state == CoreState::Running ? task(core.task).id : -1};
            auto& o = core.open;
            if (o.power == s.power && o.freq_hz == s.freq_hz && o.task == s.task) continue;
            close_segment(c, now_);
            o = s;
        }
    }

    void close_segment(CoreId c, Millis t) {
        auto& o = cores_.at(c).open;
        if (t > o.t0) {
            o.t1 = t;
            trace_.segments[c].push_back(o);
            ledger_.charge(c, o.power, o.t0, t - o.t0);
            o.t0 = t;
        }
    }

    void step(std::vector<CoreId> slack_cores) {
        // Budget overrun of an HC task in LO mode.
        if (mode_ == Mode::LO) {
            for (auto& [c, core] : cores_) {
                if (core.state != CoreState::Running) continue;
                auto& ts = tasks_[core.task];
                if (task(core.task).is_hc() && ts.actual > ts.budget + kTimeEps && ts.work >= ts.budget - 1e-9) {
                    mode_switch(core.task);
                    for (const auto& [cc, _] : cores_) slack_cores.push_back(cc);
                    break;
                }
            }
        }
        for (auto& [c, core] : cores_) {
            if (core.state == CoreState::Running) {
                auto& ts = tasks_[core.task];
                if (ts.actual - ts.work <= 1e-9 * std::max(1.0, ts.actual)) {
                    finish_task(c);
                    slack_cores.push_back(c);
                }
            }
        }
        for (auto& [c, core] : cores_) {
            if (core.state == CoreState::Stalling && tasks_[core.task].stall_end <= now_ + kTimeEps) {
                auto& ts = tasks_[core.task];
                core.state = CoreState::Running;
                ts.status = Status::Running;
                ts.exec_start = now_;
                ts.bound = now_ + ts.budget / level_rate(c, ts.level);
            }
        }
        std::sort(slack_cores.begin(), slack_cores.end());
        slack_cores.erase(std::unique(slack_cores.begin(), slack_cores.end()), slack_cores.end());
        std::deque<CoreId> pending(slack_cores.begin(), slack_cores.end());
        int guard = 0;
        while (!pending.empty() && ++guard < 10000) {
            CoreId c = pending.front();
            pending.pop_front();
            if (auto again = handle_slack(c)) pending.push_back(*again);
        }
        for (auto& [c, core] : cores_) start_if_due(c);
        govern();
        refresh_segments();
    }

    void start_if_due(CoreId c) {
        auto& core = cores_.at(c);
        if (core.state != CoreState::Idle || core.queue.empty()) return;
        const auto& f = core.queue.front();
        if (f.start > now_ + kTimeEps || !preds_done(f.task)) return;
        QueuedEntry e = f;
        core.queue.pop_front();
        auto& ts = tasks_[e.task];
        ts.deadline = e.deadline;
        ts.level = e.level;
        core.task = static_cast<int>(e.task);
        core.last_finished.reset();
        std::map<std::string, double> v{{"deadline", e.deadline}, {"planned_start", e.start}};
        if (e.level >= 0) v["level"] = e.level;
        emit(EventKind::TaskStart, c, task(e.task).id, std::move(v));
        if (e.stall > 0.0) {
            core.state = CoreState::Stalling;
            ts.status = Status::Stalling;
            ts.stall_end = now_ + e.stall;
        } else {
            core.state = CoreState::Running;
            ts.status = Status::Running;
            ts.exec_start = now_;
            ts.bound = now_ + ts.budget / level_rate(c, ts.level);
        }
    }

    void finish_task(CoreId c) {
        auto& core = cores_.at(c);
        auto& ts = tasks_[core.task];
        ts.work = ts.actual;
        ts.status = Status::Done;
        ts.finish = now_;
        ledger_.record_finish(c, now_);
        bool missed = now_ > ts.deadline + 1e-6;
        emit(EventKind::TaskEnd, c, task(core.task).id,
             {{"actual", ts.actual}, {"budget", ts.budget}, {"deadline", ts.deadline}, {"missed", missed ? 1.0 : 0.0}});
        core.last_finished = FinishedTask{ts.budget, ts.actual};
        core.state = CoreState::Idle;
        int t = core.task;
        core.task = -1;
        if (missed && cfg_.strict) {
            throw SimulationFault(task(t).id, now_, "finished after its bound " + std::to_string(ts.deadline));
        }
    }

    /// Processes a slack event on core c; returns a core needing another look.
    std::optional<CoreId> handle_slack(CoreId c) {
        if (pol_.kind == PolicyKind::StaticMaxFreq) return std::nullopt;
        auto& core = cores_.at(c);
        if (core.state != CoreState::Idle || core.queue.empty()) return std::nullopt;
        auto ev = extract_dynamic_slack(c, now_, core.last_finished, core.queue.front().start);
        core.last_finished.reset();
        if (!ev) return std::nullopt;
        const Millis S = ev->amount;
        const auto& cl = cluster_of(c);
        const bool remap = pol_.effective_remap();
        const int n_checked = remap ? static_cast<int>(cl.core_ids.size()) - 1 : 0;
        const Millis to_total = total_overhead(ov_, n_checked);
        const Millis usable = pol_.deduct_overheads ? usable_slack(*ev, ov_, n_checked) : S;
        std::map<std::string, double> v{{"amount", S}, {"usable", usable}};
        std::string origin(to_string(ev->origin));
        if (usable <= 0.0) {
            emit(EventKind::Slack, c, -1, std::move(v), origin);
            return std::nullopt;
        }
        std::vector<Candidate> cands;
        const std::size_t k = std::min<std::size_t>(pol_.effective_k(), core.queue.size());
        bool chain_ok = true;
        // Predecessors inside the shift list move earlier together with the candidate.
        auto shifted_release = [&](std::size_t ti, std::size_t upto) {
            Millis r = 0.0;
            for (TaskId pid : task(ti).predecessors) {
                std::size_t pi = idx_.at(pid);
                Millis f = est_finish(pi);
                for (std::size_t i = 0; i < upto; ++i) {
                    if (core.queue[i].task == pi) f -= S;
                }
                r = std::max(r, f);
            }
            return r;
        };
        for (std::size_t j = 0; j < k; ++j) {
            const auto& e = core.queue[j];
            chain_ok = chain_ok && can_start_early(shifted_release(e.task, j), e.start, S);
            const Task& t = task(e.task);
            // A recipient must actually be able to run below f_max with this slack.
            bool helps = compute_frequency_index(t, mode_, usable, cl) < cl.max_level();
            Candidate cand{t.id, j, t.energy(cl.core_kind, mode_), t.power(cl.core_kind),
                           chain_ok && helps && e.level < 0 && !tasks_[e.task].received_slack};
            cands.push_back(cand);
        }
        auto sel = select_lookahead_task(cands, pol_.alpha, pol_.beta);
        if (!sel) {
            emit(EventKind::Slack, c, -1, std::move(v), origin);
            return std::nullopt;
        }
        const std::size_t pos = cands[*sel].position;
        const std::size_t ti = core.queue[pos].task;
        int level = compute_frequency_index(task(ti), mode_, usable, cl);
        v["candidate"] = task(ti).id;
        if (level == cl.max_level()) {
            emit(EventKind::Slack, c, -1, std::move(v), origin);
            return std::nullopt;
        }
        apply_selection(core.queue, pos, S, level, to_total);
        tasks_[ti].received_slack = true;
        auto& e = core.queue[pos];
        if (pol_.deduct_overheads) {
            Millis fin = e.start + e.stall + tasks_[ti].budget / level_rate(c, level);
            if (fin > e.deadline + 1e-6) {
                throw SimulationFault(task(ti).id, now_, "slack assignment would finish past the entry bound");
            }
        }
        v["level"] = level;
        v["freq_hz"] = cl.vf_table[level].frequency;
        v["position"] = static_cast<double>(pos);
        v["shifted"] = static_cast<double>(pos);
        emit(EventKind::Slack, c, task(ti).id, std::move(v), origin);

        if (remap && (mode_ == Mode::HI || !task(ti).is_hc())) {
            if (try_remap(c, pos)) {
                if (pos == 0) return c;  // the core now faces a longer gap
            }
        }
        return std::nullopt;
    }

    bool core_free(CoreId o, Millis from, Millis to) {
        const auto& core = cores_.at(o);
        if (core.state != CoreState::Idle && est_finish(core.task) > from + kTimeEps) return false;
        for (const auto& e : core.queue) {
            if (e.start < from) {
                if (est_finish(e.task) > from + kTimeEps) return false;
            } else if (e.start < to - kTimeEps) {
                return false;
            }
        }
        return true;
    }

    bool try_remap(CoreId c, std::size_t pos) {
        auto& base = cores_.at(c);
        QueuedEntry e = base.queue[pos];
        const Millis end = e.start + e.stall + tasks_[e.task].budget / level_rate(c, e.level);
        std::vector<RemapOption> opts;
        for (CoreId o : cluster_of(c).core_ids) {
            if (o == c) continue;
            opts.push_back({o, ledger_.windowed(o, now_), core_free(o, e.start, end)});
        }
        auto target = select_remap_core(p_, c, ledger_.windowed(c, now_), opts, pol_.gamma);
        if (!target) return false;
        base.queue.erase(base.queue.begin() + static_cast<std::ptrdiff_t>(pos));
        auto& q = cores_.at(*target).queue;
        auto it = std::find_if(q.begin(), q.end(), [&](const QueuedEntry& x) { return x.start > e.start; });
        if (it != q.end()) e.deadline = std::min(e.deadline, it->start);
        q.insert(it, e);
        tasks_[e.task].core = *target;
        emit(EventKind::Remap, c, task(e.task).id,
             {{"from", c}, {"to", *target}, {"base_energy", ledger_.windowed(c, now_)},
              {"target_energy", ledger_.windowed(*target, now_)}});
        return true;
    }

    void govern() {
        if (pol_.kind == PolicyKind::StaticMaxFreq) return;
        for (auto& d : domains_) {
            const auto& cl = p_.cluster(d.dom.cluster);
            std::vector<VfRequest> reqs;
            for (CoreId c : d.dom.cores) {
                const auto& core = cores_.at(c);
                if (core.state == CoreState::Idle) continue;
                const auto& ts = tasks_[core.task];
                int lvl = ts.level >= 0 ? ts.level : cl.max_level();
                reqs.push_back({c, task(core.task).id, lvl, now_});
            }
            auto next = governor_tick(cl, std::span<const CoreId>(d.dom.cores), reqs, d.target);
            if (!next) continue;
            Millis latency = *next > d.target ? ov_.to_vf : ov_.to_vf_down;
            int from = d.target;
            d.prev = power_level(d);
            d.target = *next;
            d.window_end = now_ + latency;
            emit(EventKind::VfSwitch, d.dom.id, -1,
                 {{"from_level", from}, {"to_level", *next}, {"latency", latency}, {"cluster", d.dom.cluster}});
        }
    }

    void drop(std::size_t ti) {
        tasks_[ti].status = Status::Dropped;
        dropped_.insert(task(ti).id);
    }

    void mode_switch(std::size_t trigger) {
        mode_ = Mode::HI;
        emit(EventKind::ModeSwitch, tasks_[trigger].core, task(trigger).id, {{"work", tasks_[trigger].work}});
        std::map<CoreId, TaskId> running_hc;
        for (auto& [c, core] : cores_) {
            if (core.state == CoreState::Idle) continue;
            auto& ts = tasks_[core.task];
            const Task& t = task(core.task);
            if (!t.is_hc()) {
                emit(EventKind::TaskEnd, c, t.id, {{"aborted", 1.0}, {"missed", 0.0}});
                drop(core.task);
                core.state = CoreState::Idle;
                core.task = -1;
                continue;
            }
            if (core.state == CoreState::Stalling) {
                core.state = CoreState::Running;
                ts.status = Status::Running;
                ts.exec_start = now_;
            }
            ts.level = -1;
            ts.budget = t.wcet_hi;
            ts.bound = now_ + std::max(0.0, ts.budget - ts.work);
            if (const auto* he = tables_.hi.find(t.id)) ts.deadline = he->deadline;
            running_hc[c] = t.id;
        }
        for (auto& [c, core] : cores_) {
            core.queue.clear();
            core.last_finished.reset();
        }
        for (std::size_t i = 0; i < g_.size(); ++i) {
            if (tasks_[i].status == Status::Pending && task(i).is_hc()) tasks_[i].budget = task(i).wcet_hi;
        }
        std::set<std::size_t> placed;
        for (const auto& [c, entries] : tables_.hi.cores) {
            std::size_t run_pos = entries.size();
            if (auto it = running_hc.find(c); it != running_hc.end()) {
                for (std::size_t i = 0; i < entries.size(); ++i) {
                    if (entries[i].task_id == it->second) run_pos = i;
                }
            }
            for (std::size_t i = 0; i < entries.size(); ++i) {
                const auto& e = entries[i];
                std::size_t ti = idx_.at(e.task_id);
                if (tasks_[ti].status != Status::Pending) continue;
                if (!task(ti).is_hc() && ((i < run_pos && run_pos < entries.size()) || e.start < now_ - kTimeEps)) continue;
                cores_.at(c).queue.push_back({ti, e.start, e.deadline, -1, 0.0});
                tasks_[ti].core = c;
                placed.insert(ti);
            }
        }
        for (std::size_t i = 0; i < g_.size(); ++i) {
            if (tasks_[i].status == Status::Pending && !placed.count(i)) {
                if (task(i).is_hc()) throw SimulationFault(task(i).id, now_, "HC task missing from the HI table");
                drop(i);
            }
        }
        // Successors of abandoned LC work cannot run either.
        for (bool changed = true; changed;) {
            changed = false;
            for (auto& [c, core] : cores_) {
                for (auto it = core.queue.begin(); it != core.queue.end();) {
                    bool dead = false;
                    for (TaskId p : task(it->task).predecessors) dead = dead || tasks_[idx_.at(p)].status == Status::Dropped;
                    if (dead) {
                        drop(it->task);
                        it = core.queue.erase(it);
                        changed = true;
                    } else {
                        ++it;
                    }
                }
            }
        }
    }

    void finish_run() {
        for (std::size_t i = 0; i < g_.size(); ++i) {
            const auto& ts = tasks_[i];
            if (ts.status == Status::Done || ts.status == Status::Dropped) continue;
            if (task(i).is_hc()) {
                emit(EventKind::TaskEnd, ts.core, task(i).id, {{"missed", 1.0}, {"never_started", 1.0}});
                if (cfg_.strict) throw SimulationFault(task(i).id, now_, "task never completed");
            } else {
                dropped_.insert(task(i).id);
            }
        }
        Millis horizon = std::max(now_, g_.period);
        now_ = horizon;
        for (auto& d : domains_) d.window_end = std::min(d.window_end, horizon);
        for (auto& [c, core] : cores_) close_segment(c, horizon);
        trace_.meta.horizon = horizon;
        trace_.dropped_lc.assign(dropped_.begin(), dropped_.end());
        sample_series(horizon);
    }

    void sample_series(Millis horizon) {
        const Millis dt = cfg_.sample_period;
        std::vector<CoreId> ids;
        std::vector<int> group;
        for (const auto& [c, _] : cores_) {
            ids.push_back(c);
            group.push_back(p_.cluster_of(c));
        }
        auto neighbors = linear_neighbors(group);
        std::vector<double> temps(ids.size(), cfg_.thermal.ambient);
        std::vector<std::size_t> cursor(ids.size(), 0);
        std::vector<double> avg(ids.size());
        const auto n_steps = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
        for (std::size_t s = 0; s < n_steps; ++s) {
            const Millis t0 = static_cast<double>(s) * dt;
            const Millis t1 = t0 + dt;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                const auto& segs = trace_.segments[ids[i]];
                std::size_t& k = cursor[i];
                while (k < segs.size() && segs[k].t1 <= t0) ++k;
                const PowerSegment* cur = k < segs.size() ? &segs[k] : nullptr;
                trace_.samples.push_back({t0, ids[i], cur ? cur->task : -1, cur ? cur->freq_hz : 0.0,
                                          cur ? cur->power : 0.0, temps[i]});
                double e = 0.0;
                for (std::size_t j = k; j < segs.size() && segs[j].t0 < t1; ++j) {
                    e += segs[j].power * (std::min(t1, segs[j].t1) - std::max(t0, segs[j].t0));
                }
                avg[i] = e / dt;
            }
            step_temperature(cfg_.thermal, temps, avg, dt, neighbors);
        }
    }

    const TaskGraph& g_;
    const ScheduleTables& tables_;
    const Platform& p_;
    PolicyConfig pol_;
    OverheadModel ov_;
    SimConfig cfg_;
    EnergyLedger ledger_;
    std::unordered_map<TaskId, std::size_t> idx_;
    std::vector<TaskState> tasks_;
    std::map<CoreId, CoreRt> cores_;
    std::vector<DomainRt> domains_;
    std::map<CoreId, int> core_domain_;
    std::set<TaskId> dropped_;
    Mode mode_ = Mode::LO;
    Millis now_ = 0.0;
    Trace trace_;
};

} // namespace detail

/// Simulates one period of the graph under the given policy.
inline SimResult run_period(const TaskGraph& g, const ScheduleTables& tables, const Platform& platform,
                            const PolicyConfig& policy, const OverheadModel& overheads, const SimConfig& config) {
    return detail::Simulator(g, tables, platform, policy, overheads, config).run();
}

inline SimResult run_period(const TaskGraph& g, const ScheduleTables& tables, const Platform& platform,
                            const PolicyConfig& policy, const OverheadModel& overheads, std::uint64_t seed) {
    SimConfig cfg;
    cfg.seed = seed;
    return run_period(g, tables, platform, policy, overheads, cfg);
}

} // namespace mcpeak
