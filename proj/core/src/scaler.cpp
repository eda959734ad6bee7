#include "fogbus/scaler.hpp"

namespace fogbus {

std::size_t select_scale_target(std::span<const ScaleCandidate> candidates) {
    if (candidates.empty()) throw NoActorsAvailable();
    std::size_t best = 0;
    double best_score = candidates[0].score();
    double min_latency = candidates[0].latency_ms;
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const ScaleCandidate& c = candidates[i];
        if (c.latency_ms > min_latency) continue;
        const double score = c.score();
        if (c.latency_ms == min_latency && score <= best_score) continue;
        best = i;
        best_score = score;
        min_latency = c.latency_ms;
    }
    return best;
}

}  // namespace fogbus
