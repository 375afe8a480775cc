#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mcpeak {

using TaskId = int;
using CoreId = int;

/// All durations are milliseconds, frequencies hertz, power watts, energy joules.
using Millis = double;

enum class Criticality { LC, HC };
enum class Mode { LO, HI };
enum class CoreKind { Little, Big };

inline constexpr double kTimeEps = 1e-9;

// Error types. Validation problems are returned as data; these are for
// contract violations and infeasible inputs.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GenerationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnschedulableError : std::runtime_error {
    UnschedulableError(TaskId id, const std::string& what)
        : std::runtime_error(what), task(id) {}
    TaskId task;
};

struct SimulationFault : std::runtime_error {
    SimulationFault(TaskId id, Millis at, const std::string& cause)
        : std::runtime_error("task " + std::to_string(id) + " at t=" + std::to_string(at) +
                             " ms: " + cause),
          task(id), time(at) {}
    TaskId task;
    Millis time;
};

inline std::string_view to_string(Criticality c) { return c == Criticality::HC ? "HC" : "LC"; }
inline std::string_view to_string(Mode m) { return m == Mode::HI ? "HI" : "LO"; }
inline std::string_view to_string(CoreKind k) { return k == CoreKind::Big ? "big" : "little"; }

inline Criticality criticality_from_string(std::string_view s) {
    if (s == "HC") return Criticality::HC;
    if (s == "LC") return Criticality::LC;
    throw DomainError("unknown criticality '" + std::string(s) + "'");
}

inline Mode mode_from_string(std::string_view s) {
    if (s == "HI") return Mode::HI;
    if (s == "LO") return Mode::LO;
    throw DomainError("unknown mode '" + std::string(s) + "'");
}

inline CoreKind core_kind_from_string(std::string_view s) {
    if (s == "big") return CoreKind::Big;
    if (s == "little") return CoreKind::Little;
    throw DomainError("unknown core kind '" + std::string(s) + "'");
}

} // namespace mcpeak
