#pragma once

// JSON documents for every exchanged type, plus the columnar trace writer.
// Doubles are written with round-trip precision, so documents re-read losslessly.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "engine.hpp"
#include "platform.hpp"
#include "static_scheduler.hpp"
#include "taskgraph.hpp"
#include "trace.hpp"

namespace mcpeak {

using nlohmann::json;

inline constexpr std::string_view kGraphSchema = "mcpeak-graph/1";
inline constexpr std::string_view kTablesSchema = "mcpeak-tables/1";
inline constexpr std::string_view kPlatformSchema = "mcpeak-platform/1";

// Enums travel as their string names.

inline void to_json(json& j, Criticality c) { j = std::string(to_string(c)); }
inline void from_json(const json& j, Criticality& c) { c = criticality_from_string(j.get<std::string>()); }
inline void to_json(json& j, Mode m) { j = std::string(to_string(m)); }
inline void from_json(const json& j, Mode& m) { m = mode_from_string(j.get<std::string>()); }
inline void to_json(json& j, CoreKind k) { j = std::string(to_string(k)); }
inline void from_json(const json& j, CoreKind& k) { k = core_kind_from_string(j.get<std::string>()); }
inline void to_json(json& j, EventKind k) { j = std::string(to_string(k)); }
inline void from_json(const json& j, EventKind& k) { k = event_kind_from_string(j.get<std::string>()); }
inline void to_json(json& j, PolicyKind k) { j = std::string(to_string(k)); }
inline void from_json(const json& j, PolicyKind& k) { k = policy_kind_from_string(j.get<std::string>()); }

namespace detail {

template <class V>
json kind_map_to_json(const std::map<CoreKind, V>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[std::string(to_string(k))] = v;
    return j;
}

template <class V>
std::map<CoreKind, V> kind_map_from_json(const json& j) {
    std::map<CoreKind, V> m;
    for (auto it = j.begin(); it != j.end(); ++it) m[core_kind_from_string(it.key())] = it.value().template get<V>();
    return m;
}

template <class T>
void get_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end()) out = it->template get<T>();
}

} // namespace detail

inline void to_json(json& j, const Task& t) {
    j = json{{"id", t.id},
             {"criticality", t.criticality},
             {"wcet_lo", t.wcet_lo},
             {"wcet_hi", t.wcet_hi},
             {"deadline", t.deadline},
             {"successors", t.successors},
             {"predecessors", t.predecessors},
             {"peak_power", detail::kind_map_to_json(t.peak_power)}};
    if (!t.energy_max.empty()) j["energy_max"] = detail::kind_map_to_json(t.energy_max);
}

inline void from_json(const json& j, Task& t) {
    t.id = j.at("id").get<TaskId>();
    t.criticality = j.at("criticality").get<Criticality>();
    t.wcet_lo = j.at("wcet_lo").get<double>();
    t.wcet_hi = j.at("wcet_hi").get<double>();
    t.deadline = j.at("deadline").get<double>();
    t.successors = j.value("successors", std::vector<TaskId>{});
    t.predecessors = j.value("predecessors", std::vector<TaskId>{});
    t.peak_power = detail::kind_map_from_json<double>(j.at("peak_power"));
    t.energy_max.clear();
    if (j.contains("energy_max")) t.energy_max = detail::kind_map_from_json<double>(j.at("energy_max"));
}

inline void to_json(json& j, const TaskGraph& g) {
    j = json{{"schema", kGraphSchema}, {"period", g.period}, {"deadline", g.deadline}, {"tasks", g.tasks}};
}

inline void from_json(const json& j, TaskGraph& g) {
    if (auto it = j.find("schema"); it != j.end() && it->get<std::string>() != kGraphSchema) {
        throw DomainError("unsupported graph schema '" + it->get<std::string>() + "'");
    }
    g.period = j.at("period").get<double>();
    g.deadline = j.at("deadline").get<double>();
    g.tasks = j.at("tasks").get<std::vector<Task>>();
}

inline void to_json(json& j, const VfLevel& l) { j = json{{"frequency", l.frequency}, {"voltage", l.voltage}}; }
inline void from_json(const json& j, VfLevel& l) {
    l.frequency = j.at("frequency").get<double>();
    l.voltage = j.at("voltage").get<double>();
}

inline void to_json(json& j, const PowerParams& p) {
    j = json{{"i_sub", p.i_sub}, {"c_load", p.c_load}, {"p_ind", p.p_ind}, {"v_max", p.v_max}, {"f_max", p.f_max}};
}
inline void from_json(const json& j, PowerParams& p) {
    p.i_sub = j.at("i_sub").get<double>();
    p.c_load = j.at("c_load").get<double>();
    p.p_ind = j.at("p_ind").get<double>();
    p.v_max = j.at("v_max").get<double>();
    p.f_max = j.at("f_max").get<double>();
}

inline void to_json(json& j, const Cluster& c) {
    j = json{{"id", c.id},           {"core_kind", c.core_kind},         {"core_ids", c.core_ids},
             {"vf_table", c.vf_table}, {"current_level", c.current_level}, {"power_params", c.power_params}};
}
inline void from_json(const json& j, Cluster& c) {
    c.id = j.at("id").get<int>();
    c.core_kind = j.at("core_kind").get<CoreKind>();
    c.core_ids = j.at("core_ids").get<std::vector<CoreId>>();
    c.vf_table = j.at("vf_table").get<std::vector<VfLevel>>();
    c.current_level = j.value("current_level", static_cast<int>(c.vf_table.size()) - 1);
    c.power_params = j.at("power_params").get<PowerParams>();
}

inline void to_json(json& j, const Platform& p) {
    j = json{{"schema", kPlatformSchema},
             {"name", p.name},
             {"dvfs_scope", p.dvfs_scope == DvfsScope::Core ? "core" : "cluster"},
             {"clusters", p.clusters}};
}
inline void from_json(const json& j, Platform& p) {
    p.name = j.at("name").get<std::string>();
    auto scope = j.value("dvfs_scope", std::string("cluster"));
    if (scope != "core" && scope != "cluster") throw DomainError("dvfs_scope must be 'core' or 'cluster'");
    p.dvfs_scope = scope == "core" ? DvfsScope::Core : DvfsScope::Cluster;
    p.clusters = j.at("clusters").get<std::vector<Cluster>>();
}

inline void to_json(json& j, const ScheduleEntry& e) {
    j = json{{"task_id", e.task_id}, {"core_id", e.core_id}, {"start", e.start}, {"deadline", e.deadline}, {"mode", e.mode}};
}
inline void from_json(const json& j, ScheduleEntry& e) {
    e.task_id = j.at("task_id").get<TaskId>();
    e.core_id = j.at("core_id").get<CoreId>();
    e.start = j.at("start").get<double>();
    e.deadline = j.at("deadline").get<double>();
    e.mode = j.at("mode").get<Mode>();
}

inline void to_json(json& j, const ScheduleTable& t) {
    json cores = json::object();
    for (const auto& [c, v] : t.cores) cores[std::to_string(c)] = v;
    j = json{{"mode", t.mode}, {"cores", cores}, {"dropped_lc", t.dropped_lc}};
}
inline void from_json(const json& j, ScheduleTable& t) {
    t.mode = j.at("mode").get<Mode>();
    t.cores.clear();
    for (auto it = j.at("cores").begin(); it != j.at("cores").end(); ++it) {
        t.cores[std::stoi(it.key())] = it.value().get<std::vector<ScheduleEntry>>();
    }
    t.dropped_lc = j.value("dropped_lc", std::set<TaskId>{});
}

inline void to_json(json& j, const ScheduleTables& t) { j = json{{"schema", kTablesSchema}, {"lo", t.lo}, {"hi", t.hi}}; }
inline void from_json(const json& j, ScheduleTables& t) {
    t.lo = j.at("lo").get<ScheduleTable>();
    t.hi = j.at("hi").get<ScheduleTable>();
}

inline void to_json(json& j, const OverheadModel& o) {
    j = json{{"to_lookahead", o.to_lookahead},
             {"to_remap_per_core", o.to_remap_per_core},
             {"to_vf", o.to_vf},
             {"to_vf_down", o.to_vf_down},
             {"to_remap_migration", o.to_remap_migration}};
}
inline void from_json(const json& j, OverheadModel& o) {
    detail::get_opt(j, "to_lookahead", o.to_lookahead);
    detail::get_opt(j, "to_remap_per_core", o.to_remap_per_core);
    detail::get_opt(j, "to_vf", o.to_vf);
    o.to_vf_down = o.to_vf;
    detail::get_opt(j, "to_vf_down", o.to_vf_down);
    detail::get_opt(j, "to_remap_migration", o.to_remap_migration);
}

inline void to_json(json& j, const PolicyConfig& p) {
    j = json{{"k", p.k},         {"alpha", p.alpha},
             {"beta", p.beta},   {"gamma", p.gamma},
             {"remap", p.remap_enabled}, {"policy", p.kind},
             {"deduct_overheads", p.deduct_overheads}};
}
inline void from_json(const json& j, PolicyConfig& p) {
    detail::get_opt(j, "k", p.k);
    detail::get_opt(j, "alpha", p.alpha);
    detail::get_opt(j, "beta", p.beta);
    detail::get_opt(j, "gamma", p.gamma);
    detail::get_opt(j, "remap", p.remap_enabled);
    detail::get_opt(j, "policy", p.kind);
    detail::get_opt(j, "deduct_overheads", p.deduct_overheads);
}

inline void to_json(json& j, const GenParams& g) {
    j = json{{"n_cores", g.n_cores},
             {"utilization_range", {g.utilization_range.first, g.utilization_range.second}},
             {"edge_percent", g.edge_percent},
             {"n_tasks", g.n_tasks},
             {"hc_fraction", g.hc_fraction},
             {"wcet_ratio_range", {g.wcet_ratio_range.first, g.wcet_ratio_range.second}},
             {"seed", g.seed},
             {"period", g.period},
             {"power_distribution", g.power_distribution == PowerDistribution::Uniform ? "uniform" : "normal"}};
}
inline void from_json(const json& j, GenParams& g) {
    detail::get_opt(j, "n_cores", g.n_cores);
    if (j.contains("utilization_range")) {
        auto v = j.at("utilization_range").get<std::vector<double>>();
        if (v.size() != 2) throw DomainError("utilization_range needs two values");
        g.utilization_range = {v[0], v[1]};
    }
    detail::get_opt(j, "edge_percent", g.edge_percent);
    detail::get_opt(j, "n_tasks", g.n_tasks);
    detail::get_opt(j, "hc_fraction", g.hc_fraction);
    if (j.contains("wcet_ratio_range")) {
        auto v = j.at("wcet_ratio_range").get<std::vector<double>>();
        if (v.size() != 2) throw DomainError("wcet_ratio_range needs two values");
        g.wcet_ratio_range = {v[0], v[1]};
    }
    detail::get_opt(j, "seed", g.seed);
    detail::get_opt(j, "period", g.period);
    if (j.contains("power_distribution")) {
        auto s = j.at("power_distribution").get<std::string>();
        if (s != "uniform" && s != "normal") throw DomainError("power_distribution must be 'normal' or 'uniform'");
        g.power_distribution = s == "uniform" ? PowerDistribution::Uniform : PowerDistribution::TruncatedNormal;
    }
}

inline void to_json(json& j, const TraceEvent& e) {
    j = json{{"time", e.time}, {"kind", e.kind}, {"core", e.core}, {"task", e.task}, {"values", e.values}};
    if (!e.detail.empty()) j["detail"] = e.detail;
}
inline void from_json(const json& j, TraceEvent& e) {
    e.time = j.at("time").get<double>();
    e.kind = j.at("kind").get<EventKind>();
    e.core = j.at("core").get<int>();
    e.task = j.at("task").get<TaskId>();
    e.values = j.value("values", std::map<std::string, double>{});
    e.detail = j.value("detail", std::string{});
}

inline void to_json(json& j, const PowerSegment& s) {
    j = json::array({s.t0, s.t1, s.power, s.freq_hz, s.task});
}
inline void from_json(const json& j, PowerSegment& s) {
    s.t0 = j.at(0).get<double>();
    s.t1 = j.at(1).get<double>();
    s.power = j.at(2).get<double>();
    s.freq_hz = j.at(3).get<double>();
    s.task = j.at(4).get<TaskId>();
}

inline void to_json(json& j, const TraceSample& s) {
    j = json::array({s.time, s.core, s.task, s.freq_hz, s.power_w, s.temp_c});
}
inline void from_json(const json& j, TraceSample& s) {
    s.time = j.at(0).get<double>();
    s.core = j.at(1).get<CoreId>();
    s.task = j.at(2).get<TaskId>();
    s.freq_hz = j.at(3).get<double>();
    s.power_w = j.at(4).get<double>();
    s.temp_c = j.at(5).get<double>();
}

inline void to_json(json& j, const TraceMeta& m) {
    j = json{{"schema", m.schema},   {"graph_fingerprint", m.graph_fingerprint}, {"platform", m.platform},
             {"seed", m.seed},       {"policy", m.policy},                       {"horizon", m.horizon},
             {"sample_period", m.sample_period}};
}
inline void from_json(const json& j, TraceMeta& m) {
    m.schema = j.at("schema").get<std::string>();
    if (m.schema != kTraceSchema) throw DomainError("unsupported trace schema '" + m.schema + "'");
    m.graph_fingerprint = j.at("graph_fingerprint").get<std::uint64_t>();
    m.platform = j.at("platform").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.policy = j.at("policy").get<std::string>();
    m.horizon = j.at("horizon").get<double>();
    m.sample_period = j.at("sample_period").get<double>();
}

/// Full trace document. The sampled series is included only on request since
/// it is also written as CSV.
inline json trace_to_json(const Trace& t, bool with_samples = true) {
    json segs = json::object();
    for (const auto& [c, v] : t.segments) segs[std::to_string(c)] = v;
    json j{{"meta", t.meta}, {"events", t.events}, {"segments", segs}, {"dropped_lc", t.dropped_lc}};
    if (with_samples) j["samples"] = t.samples;
    return j;
}

inline void to_json(json& j, const Trace& t) { j = trace_to_json(t); }
inline void from_json(const json& j, Trace& t) {
    t.meta = j.at("meta").get<TraceMeta>();
    t.events = j.at("events").get<std::vector<TraceEvent>>();
    t.segments.clear();
    for (auto it = j.at("segments").begin(); it != j.at("segments").end(); ++it) {
        t.segments[std::stoi(it.key())] = it.value().get<std::vector<PowerSegment>>();
    }
    t.dropped_lc = j.value("dropped_lc", std::vector<TaskId>{});
    t.samples = j.value("samples", std::vector<TraceSample>{});
}

inline void to_json(json& j, const Metrics& m) {
    json cores = json::object();
    for (const auto& [c, v] : m.peak_core_power) cores[std::to_string(c)] = v;
    j = json{{"schema", m.schema},
             {"peak_system_power", m.peak_system_power},
             {"peak_core_power", cores},
             {"total_energy", m.total_energy},
             {"max_temperature", m.max_temperature},
             {"deadline_miss_count", m.deadline_miss_count},
             {"lc_dropped_count", m.lc_dropped_count},
             {"mode_switch_count", m.mode_switch_count},
             {"slack_event_count", m.slack_event_count},
             {"dvfs_action_count", m.dvfs_action_count},
             {"remap_count", m.remap_count},
             {"vf_switch_count", m.vf_switch_count},
             {"pairing",
              {{"graph_fingerprint", m.pairing.graph_fingerprint},
               {"platform", m.pairing.platform},
               {"seed", m.pairing.seed}}}};
}
inline void from_json(const json& j, Metrics& m) {
    m.schema = j.at("schema").get<std::string>();
    m.peak_system_power = j.at("peak_system_power").get<double>();
    m.peak_core_power.clear();
    for (auto it = j.at("peak_core_power").begin(); it != j.at("peak_core_power").end(); ++it) {
        m.peak_core_power[std::stoi(it.key())] = it.value().get<double>();
    }
    m.total_energy = j.at("total_energy").get<double>();
    m.max_temperature = j.at("max_temperature").get<double>();
    m.deadline_miss_count = j.at("deadline_miss_count").get<int>();
    m.lc_dropped_count = j.at("lc_dropped_count").get<int>();
    m.mode_switch_count = j.at("mode_switch_count").get<int>();
    m.slack_event_count = j.value("slack_event_count", 0);
    m.dvfs_action_count = j.value("dvfs_action_count", 0);
    m.remap_count = j.value("remap_count", 0);
    m.vf_switch_count = j.value("vf_switch_count", 0);
    const auto& p = j.at("pairing");
    m.pairing = {p.at("graph_fingerprint").get<std::uint64_t>(), p.at("platform").get<std::string>(),
                 p.at("seed").get<std::uint64_t>()};
}

/// Sampled series as comma-separated text.
inline std::string trace_csv(const Trace& t) {
    std::string out = "time_ms,core,task,freq_hz,power_w,temp_c\n";
    char buf[160];
    for (const auto& s : t.samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%d,%d,%.0f,%.9g,%.9g\n", s.time, s.core, s.task, s.freq_hz, s.power_w,
                      s.temp_c);
        out += buf;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

inline json read_json(const std::string& path) { return json::parse(read_file(path)); }

inline void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

} // namespace mcpeak
