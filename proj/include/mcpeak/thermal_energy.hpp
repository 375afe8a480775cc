#pragma once

// Windowed per-core energy accounting (the re-mapping cost) and a lumped RC
// temperature proxy used only for reporting.

#include <algorithm>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "types.hpp"

namespace mcpeak {

class EnergyLedger {
public:
    explicit EnergyLedger(Millis window = 2000.0) : window_(window) {
        if (window <= 0.0) throw DomainError("energy window must be positive");
    }

    Millis window() const { return window_; }
    Millis clock() const { return clock_; }

    /// Adds power·dt of energy to `core` over [t0, t0 + dt).
    void charge(CoreId core, double power_w, Millis t0, Millis dt) {
        if (dt < 0.0) throw DomainError("negative charge interval");
        if (dt == 0.0) return;
        auto& c = cores_[core];
        double e = power_w * dt / 1000.0;
        c.accumulated += e;
        if (e > 0.0) c.samples.push_back({t0, t0 + dt, e});
        clock_ = std::max(clock_, t0 + dt);
        while (!c.samples.empty() && c.samples.front().t1 <= clock_ - window_) c.samples.pop_front();
    }

    /// Convenience form that appends at the core's own time cursor.
    void charge(CoreId core, double power_w, Millis dt) {
        Millis t0 = cores_[core].samples.empty() ? clock_ : cores_[core].samples.back().t1;
        charge(core, power_w, t0, dt);
    }

    double accumulated(CoreId core) const {
        auto it = cores_.find(core);
        return it == cores_.end() ? 0.0 : it->second.accumulated;
    }

    /// Energy within [now - window, now], pro-rated for partially covered samples.
    double windowed(CoreId core, Millis now) const {
        auto it = cores_.find(core);
        if (it == cores_.end()) return 0.0;
        const Millis lo = now - window_;
        double sum = 0.0;
        for (const auto& s : it->second.samples) {
            Millis a = std::max(s.t0, lo);
            Millis b = std::min(s.t1, now);
            if (b > a) sum += s.energy * (b - a) / (s.t1 - s.t0);
        }
        return sum;
    }

    double windowed(CoreId core) const { return windowed(core, clock_); }

    void record_finish(CoreId core, Millis t) { cores_[core].last_finish = t; }
    Millis last_finish(CoreId core) const {
        auto it = cores_.find(core);
        return it == cores_.end() ? 0.0 : it->second.last_finish;
    }

private:
    struct Sample {
        Millis t0;
        Millis t1;
        double energy;
    };
    struct CoreLedger {
        double accumulated = 0.0;
        std::deque<Sample> samples;
        Millis last_finish = 0.0;
    };
    Millis window_;
    Millis clock_ = 0.0;
    std::map<CoreId, CoreLedger> cores_;
};

/// Γ × windowed energy of the core.
inline double remap_cost(const EnergyLedger& ledger, CoreId core, double gamma, Millis now) {
    return gamma * ledger.windowed(core, now);
}

inline double remap_cost(const EnergyLedger& ledger, CoreId core, double gamma) {
    return remap_cost(ledger, core, gamma, ledger.clock());
}

struct ThermalParams {
    double resistance = 35.0 / 0.940;        // K/W: 60 C at max LITTLE power over 25 C
    double capacitance = 1.0 / (35.0 / 0.940);  // J/K: RC = 1 s
    double ambient = 25.0;                   // C
    double coupling = 0.1;                   // neighbor conductance relative to 1/R

    double time_constant_ms() const { return resistance * capacitance * 1000.0; }

    void check() const {
        if (resistance <= 0.0 || capacitance <= 0.0) throw DomainError("thermal R and C must be positive");
        if (coupling < 0.0 || coupling >= 1.0) throw DomainError("thermal coupling must lie in [0,1)");
    }
};

/// Explicit-Euler step of the lumped RC network:
/// T_i += dt/C · (P_i − (T_i − T_amb)/R + coupling/R · Σ_n (T_n − T_i)).
/// `neighbors[i]` lists positions adjacent to i.
inline void step_temperature(const ThermalParams& p, std::span<double> temps, std::span<const double> power_w,
                             Millis dt, const std::vector<std::vector<int>>& neighbors = {}) {
    p.check();
    if (temps.size() != power_w.size()) throw DomainError("temperature and power vectors differ in size");
    if (dt <= 0.0 || dt > p.time_constant_ms() / 10.0) {
        throw DomainError("thermal step must lie in (0, RC/10]");
    }
    const double h = dt / 1000.0 / p.capacitance;
    std::vector<double> next(temps.begin(), temps.end());
    for (std::size_t i = 0; i < temps.size(); ++i) {
        double flow = power_w[i] - (temps[i] - p.ambient) / p.resistance;
        if (i < neighbors.size()) {
            for (int n : neighbors[i]) flow += p.coupling / p.resistance * (temps[n] - temps[i]);
        }
        next[i] = temps[i] + h * flow;
    }
    std::copy(next.begin(), next.end(), temps.begin());
}

/// Nearest-neighbor adjacency on a linear layout, restricted to groups
/// (one group per cluster). `group[i]` is the group of position i.
inline std::vector<std::vector<int>> linear_neighbors(const std::vector<int>& group) {
    std::vector<std::vector<int>> out(group.size());
    for (std::size_t i = 0; i + 1 < group.size(); ++i) {
        if (group[i] == group[i + 1]) {
            out[i].push_back(static_cast<int>(i + 1));
            out[i + 1].push_back(static_cast<int>(i));
        }
    }
    return out;
}

} // namespace mcpeak
