#pragma once

// Per-domain DVFS governor: the domain runs at the highest level requested by
// any running or ready task on its cores.

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

#include "platform.hpp"
#include "types.hpp"

namespace mcpeak {

struct VfRequest {
    CoreId core_id = 0;
    TaskId task_id = 0;
    int level = 0;  // index into the owning cluster's V-f table
    Millis valid_from = 0.0;
};

struct VfSwitch {
    Millis time = 0.0;
    int domain = 0;
    int from_level = 0;
    int to_level = 0;
    Millis latency = 0.0;
};

/// One evaluation of the governor for a V-f domain made of `domain_cores` of
/// `cluster`. Returns the new level when it differs from `current_level`.
/// Cores without a request count as demanding the lowest level.
inline std::optional<int> governor_tick(const Cluster& cluster, std::span<const CoreId> domain_cores,
                                        std::span<const VfRequest> requests, int current_level) {
    int set_level = 0;
    for (const auto& r : requests) {
        if (std::find(domain_cores.begin(), domain_cores.end(), r.core_id) == domain_cores.end()) {
            throw DomainError("V-f request for core " + std::to_string(r.core_id) + " outside the domain");
        }
        if (r.level < 0 || r.level > cluster.max_level()) {
            throw DomainError("V-f request level out of range");
        }
        set_level = std::max(set_level, r.level);
    }
    if (set_level == current_level) return std::nullopt;
    return set_level;
}

inline std::optional<int> governor_tick(const Cluster& cluster, std::span<const VfRequest> requests,
                                        int current_level) {
    return governor_tick(cluster, std::span<const CoreId>(cluster.core_ids), requests, current_level);
}

/// A V-f domain: one cluster, or a single core when DVFS is per core.
struct VfDomain {
    int id = 0;
    int cluster = 0;
    std::vector<CoreId> cores;
};

inline std::vector<VfDomain> vf_domains(const Platform& p) {
    std::vector<VfDomain> out;
    for (const auto& c : p.clusters) {
        if (p.dvfs_scope == DvfsScope::Cluster) {
            out.push_back({static_cast<int>(out.size()), c.id, c.core_ids});
        } else {
            for (CoreId core : c.core_ids) out.push_back({static_cast<int>(out.size()), c.id, {core}});
        }
    }
    return out;
}

} // namespace mcpeak
