#pragma once

#include "engine.hpp"
#include "experiment.hpp"
#include "governor.hpp"
#include "platform.hpp"
#include "policy.hpp"
#include "rng.hpp"
#include "serialization.hpp"
#include "static_scheduler.hpp"
#include "taskgraph.hpp"
#include "thermal_energy.hpp"
#include "trace.hpp"
#include "types.hpp"
