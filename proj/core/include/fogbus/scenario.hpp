#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fogbus/components.hpp"

namespace fogbus {

/// Invalid scenario; path() names the offending field, e.g. "users[2].app".
class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Users still waiting with no foreground work left, or the time limit hit.
class DeadlockDetected : public Error {
public:
    DeadlockDetected(const std::string& what, std::string dump)
        : Error(what + "\n" + dump), dump_(std::move(dump)) {}
    const std::string& dump() const { return dump_; }

private:
    std::string dump_;
};

class IoError : public Error {
public:
    using Error::Error;
};

/// Hardware classes as relative rates: RPi (4 x 1.5), Desktop (8 x 3.6),
/// cloud-2c (2 x 2.6), cloud-4c (4 x 2.6).
std::optional<HostSpec> host_preset(const std::string& preset, const std::string& host);
std::vector<std::string> host_preset_names();

struct LinkEntry {
    std::string a;
    std::string b;
    LinkSpec spec;
};

struct ActorEntry {
    std::string host;
    /// Hosts of the Masters this actor registers with at start; empty means
    /// every initial Master.
    std::vector<std::string> masters;
    std::vector<std::string> images{kAnyImage};
};

struct UserEntry {
    std::string host;
    /// Host of the Master the user contacts; empty means the first Master.
    std::string master;
    UserConfig config;  // config.master is filled in by the runner
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    LinkSpec default_link{1.0, 1e8};
    std::vector<HostSpec> hosts;
    std::vector<LinkEntry> links;
    std::vector<std::string> masters;
    std::vector<ActorEntry> actors;
    std::string remote_logger;
    std::vector<AppSpec> apps;  // inline, in addition to the built-ins
    std::vector<UserEntry> users;
    std::string policy = "ohnsga";
    GaParams ga;
    SchedulerConfig scheduler;
    DiscoveryConfig discovery;
    bool discovery_enabled = true;
    RuntimeParams runtime;
    bool scaling_enabled = true;
    TimeMs time_limit_ms = 3'600'000.0;

    /// Throws ConfigError.
    void validate() const;
};

/// Parses the JSON scenario format. Throws ConfigError.
ScenarioConfig parse_scenario(std::string_view text);
/// Throws IoError or ConfigError.
ScenarioConfig load_scenario(const std::filesystem::path& path);
/// Canonical JSON text; parse_scenario(to_json(c)) reproduces c.
std::string scenario_to_json(const ScenarioConfig& config);

struct Stats {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
};

/// Nearest-rank percentiles over a copy of `values`.
Stats summarize(std::vector<double> values);

struct ConvergenceSeries {
    std::string policy;
    std::uint64_t seed = 0;
    std::string request_id;
    std::vector<double> best;
};

struct MasterDecision {
    std::string master;
    DecisionRecord record;
};

struct MetricsReport {
    std::string scenario;
    std::uint64_t seed = 0;
    std::string policy;
    bool scaling_enabled = true;
    TimeMs finished_at = 0.0;
    std::vector<RequestMetrics> requests;
    std::vector<MasterDecision> decisions;
    std::vector<ConvergenceSeries> convergence;
    Stats sft;
    Stats rrt;
    Stats response;
    EventCounters counters;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::size_t masters = 0;
};

enum class TransportKind { Sim, Tcp };

struct RunOptions {
    TransportKind transport = TransportKind::Sim;
    /// Virtual ms per wall-clock ms for TCP runs.
    double tcp_time_scale = 1.0;
};

/// Runs until every user finishes. Throws ConfigError or DeadlockDetected.
MetricsReport run_scenario(const ScenarioConfig& config, const RunOptions& options = {});

}  // namespace fogbus
