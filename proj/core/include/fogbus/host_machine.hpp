#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "fogbus/netsim.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus {

struct HostSpec {
    std::string host;
    std::int64_t cpu_cores = 4;
    double cpu_freq_ghz = 2.0;
    std::int64_t mem_capacity_mb = 4096;
    /// Load from outside the framework, always present.
    double background_util = 0.0;
    double mem_util = 0.2;

    /// Work units per ms available to one task: freq * cores * (1 - background).
    double execution_rate() const {
        return cpu_freq_ghz * static_cast<double>(cpu_cores) * (1.0 - background_util);
    }
};

/// CPU of one simulated host. At most cpu_cores jobs hold a core at a time;
/// the rest wait FIFO. Jobs are durations, not work: callers convert work to
/// time with execution_rate().
class HostMachine {
public:
    HostMachine(HostSpec spec, Transport& transport);

    const HostSpec& spec() const { return spec_; }
    double execution_rate() const { return spec_.execution_rate(); }

    /// Occupies one core for `duration_ms` once a core is free, then calls
    /// `done`.
    void submit(TimeMs duration_ms, std::function<void()> done);

    /// background_util plus core-busy fraction over [now - window, now],
    /// clamped to 1.
    double cpu_util(TimeMs window_ms) const;

    HostProfile profile(TimeMs window_ms) const;

    std::size_t busy_cores() const { return busy_; }
    std::size_t queued_jobs() const { return waiting_.size(); }

private:
    struct Job {
        TimeMs duration;
        std::function<void()> done;
    };
    struct Interval {
        TimeMs start;
        TimeMs end;
    };

    void start(Job job);

    HostSpec spec_;
    Transport& transport_;
    std::size_t busy_ = 0;
    std::deque<Job> waiting_;
    std::vector<Interval> busy_intervals_;  // end may be in the future
};

}  // namespace fogbus
