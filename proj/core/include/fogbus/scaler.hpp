#pragma once

#include <span>
#include <string>
#include <vector>

#include "fogbus/common.hpp"
#include "fogbus/protocol.hpp"

namespace fogbus {

struct ScaleCandidate {
    ComponentId actor;
    Address addr;
    double latency_ms = 0.0;  // to the requesting user
    double cpu_util = 0.0;
    double cpu_freq_ghz = 0.0;

    double score() const { return (1.0 - cpu_util) * cpu_freq_ghz; }
};

class NoActorsAvailable : public Error {
public:
    NoActorsAvailable() : Error("no actor available to host a new master") {}
};

/// Index of the actor to host a new Master: minimum latency to the user,
/// then maximum score; exact ties keep the earliest candidate. Throws
/// NoActorsAvailable on an empty list.
std::size_t select_scale_target(std::span<const ScaleCandidate> candidates);

}  // namespace fogbus
