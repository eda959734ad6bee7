#include "fogbus/host_machine.hpp"

#include <algorithm>

namespace fogbus {

namespace {
// Intervals older than this are dropped; profiling windows are far shorter.
constexpr TimeMs kHistoryMs = 600'000.0;
}  // namespace

HostMachine::HostMachine(HostSpec spec, Transport& transport) : spec_(std::move(spec)), transport_(transport) {
    if (spec_.cpu_cores <= 0) throw InvalidArgument("cpu_cores must be positive");
    if (!(spec_.cpu_freq_ghz > 0.0)) throw InvalidArgument("cpu_freq_ghz must be positive");
    if (!(spec_.background_util >= 0.0 && spec_.background_util < 1.0)) {
        throw InvalidArgument("background_util must be in [0,1)");
    }
}

void HostMachine::submit(TimeMs duration_ms, std::function<void()> done) {
    Job job{std::max(0.0, duration_ms), std::move(done)};
    if (busy_ < static_cast<std::size_t>(spec_.cpu_cores)) {
        start(std::move(job));
    } else {
        waiting_.push_back(std::move(job));
    }
}

void HostMachine::start(Job job) {
    ++busy_;
    const TimeMs now = transport_.now();
    busy_intervals_.push_back({now, now + job.duration});
    if (busy_intervals_.size() > 4096) {
        std::erase_if(busy_intervals_, [&](const Interval& iv) { return iv.end < now - kHistoryMs; });
    }
    transport_.schedule(job.duration, [this, done = std::move(job.done)]() {
        --busy_;
        if (!waiting_.empty()) {
            Job next = std::move(waiting_.front());
            waiting_.pop_front();
            start(std::move(next));
        }
        if (done) done();
    });
}

double HostMachine::cpu_util(TimeMs window_ms) const {
    if (!(window_ms > 0.0)) return spec_.background_util;
    const TimeMs now = transport_.now();
    const TimeMs from = now - window_ms;
    double busy_ms = 0.0;
    for (const auto& iv : busy_intervals_) {
        const TimeMs lo = std::max(iv.start, from);
        const TimeMs hi = std::min(iv.end, now);
        if (hi > lo) busy_ms += hi - lo;
    }
    const double own = busy_ms / (window_ms * static_cast<double>(spec_.cpu_cores));
    return std::min(1.0, spec_.background_util + own);
}

HostProfile HostMachine::profile(TimeMs window_ms) const {
    HostProfile p;
    p.host = spec_.host;
    p.cpu_cores = spec_.cpu_cores;
    p.cpu_freq_ghz = spec_.cpu_freq_ghz;
    p.cpu_util = cpu_util(window_ms);
    p.mem_capacity_mb = spec_.mem_capacity_mb;
    p.mem_util = spec_.mem_util;
    p.sampled_at = transport_.now();
    return p;
}

}  // namespace fogbus
