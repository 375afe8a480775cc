#pragma once

// Simulation traces and the metrics derived from them.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "taskgraph.hpp"
#include "types.hpp"

namespace mcpeak {

inline constexpr std::string_view kTraceSchema = "mcpeak-trace/1";
inline constexpr std::string_view kMetricsSchema = "mcpeak-metrics/1";

enum class EventKind { TaskStart, TaskEnd, Slack, VfSwitch, Remap, ModeSwitch };

inline std::string_view to_string(EventKind k) {
    switch (k) {
    case EventKind::TaskStart: return "task_start";
    case EventKind::TaskEnd: return "task_end";
    case EventKind::Slack: return "slack";
    case EventKind::VfSwitch: return "vf_switch";
    case EventKind::Remap: return "remap";
    case EventKind::ModeSwitch: return "mode_switch";
    }
    return "?";
}

inline EventKind event_kind_from_string(std::string_view s) {
    for (auto k : {EventKind::TaskStart, EventKind::TaskEnd, EventKind::Slack, EventKind::VfSwitch, EventKind::Remap,
                   EventKind::ModeSwitch}) {
        if (to_string(k) == s) return k;
    }
    throw DomainError("unknown event kind '" + std::string(s) + "'");
}

struct TraceEvent {
    Millis time = 0.0;
    EventKind kind = EventKind::TaskStart;
    int core = -1;    // core id; V-f domain id for vf_switch
    TaskId task = -1;
    std::map<std::string, double> values;
    std::string detail;

    friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

/// Constant-power interval on one core. task = -1 when idle or stalled.
struct PowerSegment {
    Millis t0 = 0.0;
    Millis t1 = 0.0;
    double power = 0.0;
    double freq_hz = 0.0;
    TaskId task = -1;

    friend bool operator==(const PowerSegment&, const PowerSegment&) = default;
};

struct TraceSample {
    Millis time = 0.0;
    CoreId core = 0;
    TaskId task = -1;
    double freq_hz = 0.0;
    double power_w = 0.0;
    double temp_c = 0.0;

    friend bool operator==(const TraceSample&, const TraceSample&) = default;
};

struct TraceMeta {
    std::string schema{kTraceSchema};
    std::uint64_t graph_fingerprint = 0;
    std::string platform;
    std::uint64_t seed = 0;
    std::string policy;
    Millis horizon = 0.0;
    Millis sample_period = 1.0;

    friend bool operator==(const TraceMeta&, const TraceMeta&) = default;
};

struct Trace {
    TraceMeta meta;
    std::vector<TraceEvent> events;
    std::map<CoreId, std::vector<PowerSegment>> segments;
    std::vector<TraceSample> samples;  // row-major: time, then core
    std::vector<TaskId> dropped_lc;

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// Stable 64-bit FNV-1a digest of the graph's content.
inline std::uint64_t graph_fingerprint(const TaskGraph& g) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        auto b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ULL;
        }
    };
    auto mix_d = [&](double v) { mix(&v, sizeof v); };
    auto mix_i = [&](std::int64_t v) { mix(&v, sizeof v); };
    mix_d(g.period);
    mix_d(g.deadline);
    for (const auto& t : g.tasks) {
        mix_i(t.id);
        mix_i(static_cast<int>(t.criticality));
        mix_d(t.wcet_lo);
        mix_d(t.wcet_hi);
        mix_d(t.deadline);
        for (TaskId s : t.successors) mix_i(s);
        mix_i(-1);
        for (const auto& [k, v] : t.peak_power) {
            mix_i(static_cast<int>(k));
            mix_d(v);
        }
        for (const auto& [k, v] : t.energy_max) {
            mix_i(10 + static_cast<int>(k));
            mix_d(v);
        }
    }
    return h;
}

struct PairingKey {
    std::uint64_t graph_fingerprint = 0;
    std::string platform;
    std::uint64_t seed = 0;

    friend bool operator==(const PairingKey&, const PairingKey&) = default;
};

struct Metrics {
    std::string schema{kMetricsSchema};
    double peak_system_power = 0.0;
    std::map<CoreId, double> peak_core_power;
    double total_energy = 0.0;
    double max_temperature = 0.0;
    int deadline_miss_count = 0;
    int lc_dropped_count = 0;
    int mode_switch_count = 0;
    int slack_event_count = 0;
    int dvfs_action_count = 0;
    int remap_count = 0;
    int vf_switch_count = 0;
    PairingKey pairing;

    double max_core_peak() const {
        double m = 0.0;
        for (const auto& [c, p] : peak_core_power) m = std::max(m, p);
        return m;
    }

    friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Highest instantaneous sum of per-core power over all segment boundaries.
inline double peak_system_power(const std::map<CoreId, std::vector<PowerSegment>>& segs) {
    std::vector<Millis> bps;
    for (const auto& [c, v] : segs) {
        for (const auto& s : v) bps.push_back(s.t0);
    }
    std::sort(bps.begin(), bps.end());
    bps.erase(std::unique(bps.begin(), bps.end()), bps.end());
    std::map<CoreId, std::size_t> cursor;
    double peak = 0.0;
    for (Millis t : bps) {
        double sum = 0.0;
        for (const auto& [c, v] : segs) {
            std::size_t& i = cursor[c];
            while (i < v.size() && v[i].t1 <= t) ++i;
            if (i < v.size() && v[i].t0 <= t) sum += v[i].power;
        }
        peak = std::max(peak, sum);
    }
    return peak;
}

inline Metrics summarize(const Trace& trace) {
    Metrics m;
    m.pairing = {trace.meta.graph_fingerprint, trace.meta.platform, trace.meta.seed};
    for (const auto& [core, v] : trace.segments) {
        double peak = 0.0;
        for (const auto& s : v) {
            peak = std::max(peak, s.power);
            m.total_energy += s.power * (s.t1 - s.t0) / 1000.0;
        }
        m.peak_core_power[core] = peak;
    }
    m.peak_system_power = peak_system_power(trace.segments);
    if (!trace.samples.empty()) {
        m.max_temperature = -std::numeric_limits<double>::infinity();
        for (const auto& s : trace.samples) m.max_temperature = std::max(m.max_temperature, s.temp_c);
    }
    for (const auto& e : trace.events) {
        switch (e.kind) {
        case EventKind::TaskEnd:
            if (auto it = e.values.find("missed"); it != e.values.end() && it->second != 0.0) ++m.deadline_miss_count;
            break;
        case EventKind::ModeSwitch: ++m.mode_switch_count; break;
        case EventKind::Slack:
            ++m.slack_event_count;
            if (auto it = e.values.find("level"); it != e.values.end()) ++m.dvfs_action_count;
            break;
        case EventKind::Remap: ++m.remap_count; break;
        case EventKind::VfSwitch: ++m.vf_switch_count; break;
        default: break;
        }
    }
    m.lc_dropped_count = static_cast<int>(trace.dropped_lc.size());
    return m;
}

/// Ratios run_b / run_a of the headline metrics.
struct Ratios {
    double peak_system_power = 1.0;
    double max_core_peak = 1.0;
    double total_energy = 1.0;
    double max_temperature = 1.0;
};

namespace detail {
inline double ratio(double a, double b) {
    if (a == 0.0) return b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return b / a;
}
} // namespace detail

inline Ratios compare(const Metrics& a, const Metrics& b) {
    if (!(a.pairing == b.pairing)) throw DomainError("compared runs do not share graph, platform and seed");
    return {detail::ratio(a.peak_system_power, b.peak_system_power), detail::ratio(a.max_core_peak(), b.max_core_peak()),
            detail::ratio(a.total_energy, b.total_energy), detail::ratio(a.max_temperature, b.max_temperature)};
}

struct MeanCi {
    double mean = 0.0;
    double half_width = 0.0;  // 95% two-sided, Student t
    std::size_t n = 0;

    double lo() const { return mean - half_width; }
    double hi() const { return mean + half_width; }
};

inline MeanCi mean_ci(const std::vector<double>& xs, double confidence = 0.95) {
    MeanCi r;
    r.n = xs.size();
    if (xs.empty()) return r;
    for (double x : xs) r.mean += x;
    r.mean /= static_cast<double>(xs.size());
    if (xs.size() < 2) return r;
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    boost::math::students_t dist(static_cast<double>(xs.size() - 1));
    double t = boost::math::quantile(boost::math::complement(dist, (1.0 - confidence) / 2.0));
    r.half_width = t * sd / std::sqrt(static_cast<double>(xs.size()));
    return r;
}

struct AggregateReport {
    MeanCi peak_system_power;
    MeanCi max_core_peak;
    MeanCi total_energy;
    MeanCi max_temperature;
};

inline AggregateReport aggregate(const std::vector<Ratios>& rs) {
    std::vector<double> p, c, e, t;
    for (const auto& r : rs) {
        p.push_back(r.peak_system_power);
        c.push_back(r.max_core_peak);
        e.push_back(r.total_energy);
        t.push_back(r.max_temperature);
    }
    return {mean_ci(p), mean_ci(c), mean_ci(e), mean_ci(t)};
}

/// k with the lowest mean normalized peak power; ties go to the smaller k.
inline int optimal_k(const std::map<int, double>& mean_peak_by_k) {
    if (mean_peak_by_k.empty()) throw DomainError("empty k sweep");
    int best = mean_peak_by_k.begin()->first;
    double v = mean_peak_by_k.begin()->second;
    for (const auto& [k, m] : mean_peak_by_k) {
        if (m < v) {
            best = k;
            v = m;
        }
    }
    return best;
}

} // namespace mcpeak
