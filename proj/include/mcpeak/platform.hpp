#pragma once

// Clustered DVFS platforms with discrete V-f tables. Core power follows
// P = I_sub·V + C_L·V²·f + P_ind.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "taskgraph.hpp"
#include "types.hpp"

namespace mcpeak {

struct VfLevel {
    double frequency = 0.0;  // Hz
    double voltage = 0.0;    // V

    friend bool operator==(const VfLevel&, const VfLevel&) = default;
};

struct PowerParams {
    double i_sub = 0.0;   // A
    double c_load = 0.0;  // F
    double p_ind = 0.0;   // W
    double v_max = 0.0;   // V
    double f_max = 0.0;   // Hz

    friend bool operator==(const PowerParams&, const PowerParams&) = default;

    /// Splits a measured maximum power into static / dynamic / independent parts.
    static PowerParams calibrate(double p_max, double v_max, double f_max, double static_frac = 0.15,
                                 double ind_frac = 0.10) {
        PowerParams p;
        p.v_max = v_max;
        p.f_max = f_max;
        p.i_sub = static_frac * p_max / v_max;
        p.p_ind = ind_frac * p_max;
        p.c_load = (1.0 - static_frac - ind_frac) * p_max / (v_max * v_max * f_max);
        return p;
    }
};

struct Cluster {
    int id = 0;
    CoreKind core_kind = CoreKind::Little;
    std::vector<CoreId> core_ids;
    std::vector<VfLevel> vf_table;  // ascending frequency
    int current_level = 0;
    PowerParams power_params;

    int max_level() const { return static_cast<int>(vf_table.size()) - 1; }
    const VfLevel& top() const { return vf_table.back(); }
    const VfLevel& bottom() const { return vf_table.front(); }

    friend bool operator==(const Cluster&, const Cluster&) = default;
};

enum class DvfsScope { Cluster, Core };

struct Platform {
    std::string name;
    std::vector<Cluster> clusters;
    DvfsScope dvfs_scope = DvfsScope::Cluster;

    int cluster_of(CoreId core) const {
        for (const auto& c : clusters) {
            if (std::find(c.core_ids.begin(), c.core_ids.end(), core) != c.core_ids.end()) return c.id;
        }
        throw DomainError("core " + std::to_string(core) + " not on platform");
    }

    const Cluster& cluster(int id) const {
        for (const auto& c : clusters) {
            if (c.id == id) return c;
        }
        throw DomainError("unknown cluster " + std::to_string(id));
    }

    const Cluster& cluster_for_core(CoreId core) const { return cluster(cluster_of(core)); }

    std::vector<CoreId> cores() const {
        std::vector<CoreId> out;
        for (const auto& c : clusters) out.insert(out.end(), c.core_ids.begin(), c.core_ids.end());
        std::sort(out.begin(), out.end());
        return out;
    }

    int n_cores() const { return static_cast<int>(cores().size()); }

    friend bool operator==(const Platform&, const Platform&) = default;
};

struct PlatformIssue {
    std::string message;
};

/// Structural checks on a platform description.
inline std::vector<PlatformIssue> check_platform(const Platform& p) {
    std::vector<PlatformIssue> out;
    if (p.clusters.empty()) out.push_back({"platform has no clusters"});
    std::vector<CoreId> all;
    for (const auto& c : p.clusters) {
        if (c.vf_table.empty()) {
            out.push_back({"cluster " + std::to_string(c.id) + " has an empty V-f table"});
            continue;
        }
        if (c.core_ids.empty()) out.push_back({"cluster " + std::to_string(c.id) + " has no cores"});
        for (std::size_t i = 0; i < c.vf_table.size(); ++i) {
            const auto& l = c.vf_table[i];
            if (l.frequency <= 0.0 || l.voltage <= 0.0) {
                out.push_back({"non-positive V-f level in cluster " + std::to_string(c.id)});
            }
            if (i > 0 && (l.frequency <= c.vf_table[i - 1].frequency || l.voltage < c.vf_table[i - 1].voltage)) {
                out.push_back({"V-f table of cluster " + std::to_string(c.id) + " is not ascending"});
            }
        }
        const auto& pp = c.power_params;
        if (pp.i_sub <= 0.0 || pp.c_load <= 0.0 || pp.p_ind <= 0.0) {
            out.push_back({"power params of cluster " + std::to_string(c.id) + " must be positive"});
        }
        if (std::abs(pp.v_max - c.top().voltage) > 1e-12 || std::abs(pp.f_max - c.top().frequency) > 1e-3) {
            out.push_back({"power params of cluster " + std::to_string(c.id) + " disagree with top V-f level"});
        }
        if (c.current_level < 0 || c.current_level > c.max_level()) {
            out.push_back({"current level out of range in cluster " + std::to_string(c.id)});
        }
        all.insert(all.end(), c.core_ids.begin(), c.core_ids.end());
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) out.push_back({"core ids are not unique"});
    return out;
}

struct ScalingFactors {
    double rho1 = 1.0;  // f / f_max
    double rho2 = 1.0;  // V / V_max
};

inline int level_index(const Cluster& cluster, const VfLevel& level) {
    for (std::size_t i = 0; i < cluster.vf_table.size(); ++i) {
        if (cluster.vf_table[i] == level) return static_cast<int>(i);
    }
    throw DomainError("V-f level not in the table of cluster " + std::to_string(cluster.id));
}

inline ScalingFactors scaling_factors(const Cluster& cluster, const VfLevel& level) {
    level_index(cluster, level);
    return {level.frequency / cluster.top().frequency, level.voltage / cluster.top().voltage};
}

inline ScalingFactors scaling_factors(const Cluster& cluster, int level) {
    if (level < 0 || level > cluster.max_level()) throw DomainError("V-f level index out of range");
    return scaling_factors(cluster, cluster.vf_table[level]);
}

/// Total core power at the given scaling factors.
inline double power(const PowerParams& p, double rho1, double rho2) {
    constexpr double eps = 1e-12;
    if (!(rho1 > 0.0 && rho1 <= 1.0 + eps && rho2 > 0.0 && rho2 <= 1.0 + eps)) {
        throw DomainError("scaling factors must lie in (0, 1]");
    }
    double v = rho2 * p.v_max;
    double f = rho1 * p.f_max;
    return p.i_sub * v + p.c_load * v * v * f + p.p_ind;
}

/// Power of a core that is not executing a task: static plus independent terms.
inline double idle_power(const PowerParams& p, double rho2) {
    return p.i_sub * rho2 * p.v_max + p.p_ind;
}

/// Scales a task's max-frequency peak power to a lower level via the power model ratio.
inline double task_power_at_level(const Task& task, const Cluster& cluster, int level) {
    double peak = task.power(cluster.core_kind);
    if (level == cluster.max_level()) return peak;
    auto s = scaling_factors(cluster, level);
    const auto& pp = cluster.power_params;
    return peak * power(pp, s.rho1, s.rho2) / power(pp, 1.0, 1.0);
}

inline double task_power_at_level(const Task& task, const Cluster& cluster, const VfLevel& level) {
    return task_power_at_level(task, cluster, level_index(cluster, level));
}

/// Index of the smallest level whose frequency is >= f_req.
inline int quantize_up_index(const Cluster& cluster, double f_req) {
    const double tol = 1e-9 * cluster.top().frequency;
    if (f_req > cluster.top().frequency + tol) {
        throw DomainError("requested frequency exceeds f_max of cluster " + std::to_string(cluster.id));
    }
    for (std::size_t i = 0; i < cluster.vf_table.size(); ++i) {
        if (cluster.vf_table[i].frequency + tol >= f_req) return static_cast<int>(i);
    }
    return cluster.max_level();
}

inline VfLevel quantize_up(const Cluster& cluster, double f_req) {
    return cluster.vf_table[quantize_up_index(cluster, f_req)];
}

// Default tables. Per-level voltages interpolate linearly between the
// published endpoints; on LITTLE the top four levels share 1.3 V.

inline std::vector<VfLevel> little_vf_table() {
    std::vector<VfLevel> t;
    for (int i = 0; i < 13; ++i) {
        double f = (2 + i) * 1e8;
        double v = i < 10 ? 0.9 + 0.4 * i / 9.0 : 1.3;
        t.push_back({f, v});
    }
    return t;
}

inline std::vector<VfLevel> big_vf_table() {
    std::vector<VfLevel> t;
    for (int i = 0; i < 19; ++i) {
        double f = (2 + i) * 1e8;
        double v = 0.9 + (1.3625 - 0.9) * i / 18.0;
        t.push_back({f, v});
    }
    return t;
}

inline constexpr double kLittleMaxPower = 0.940;
inline constexpr double kBigMaxPower = 7.622;

inline Cluster make_cluster(int id, CoreKind kind, std::vector<CoreId> cores) {
    Cluster c;
    c.id = id;
    c.core_kind = kind;
    c.core_ids = std::move(cores);
    c.vf_table = kind == CoreKind::Little ? little_vf_table() : big_vf_table();
    c.current_level = c.max_level();
    double pmax = kind == CoreKind::Little ? kLittleMaxPower : kBigMaxPower;
    c.power_params = PowerParams::calibrate(pmax, c.top().voltage, c.top().frequency);
    return c;
}

/// Four LITTLE cores (0-3) and four big cores (4-7), one V-f domain per cluster.
inline Platform odroid_xu3() {
    Platform p;
    p.name = "odroid-xu3";
    p.clusters.push_back(make_cluster(0, CoreKind::Little, {0, 1, 2, 3}));
    p.clusters.push_back(make_cluster(1, CoreKind::Big, {4, 5, 6, 7}));
    p.dvfs_scope = DvfsScope::Cluster;
    return p;
}

/// n identical cores in one cluster with independent per-core DVFS.
inline Platform homogeneous(CoreKind kind, int n_cores) {
    if (n_cores < 1) throw DomainError("platform needs at least one core");
    std::vector<CoreId> cores(n_cores);
    for (int i = 0; i < n_cores; ++i) cores[i] = i;
    Platform p;
    p.name = std::string("homogeneous-") + std::string(to_string(kind));
    p.clusters.push_back(make_cluster(0, kind, std::move(cores)));
    p.dvfs_scope = DvfsScope::Core;
    return p;
}

/// Named platforms: "odroid-xu3", "homogeneous-little", "homogeneous-big".
inline Platform make_platform(const std::string& name, int n_cores = 8) {
    if (name == "odroid-xu3") {
        if (n_cores != 8) throw DomainError("odroid-xu3 has exactly 8 cores");
        return odroid_xu3();
    }
    if (name == "homogeneous-little") return homogeneous(CoreKind::Little, n_cores);
    if (name == "homogeneous-big") return homogeneous(CoreKind::Big, n_cores);
    throw DomainError("unknown platform '" + name + "'");
}

} // namespace mcpeak
