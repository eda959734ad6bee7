#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fogbus/scenario.hpp"

namespace fogbus {

/// Estimator inputs taken from the scenario itself: host rates net of
/// background load and the configured links, user devices included.
CostModel ground_truth_model(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Scheduling policies: 2 RPi, 1 Desktop, 2 cloud instances, GoL.
// ---------------------------------------------------------------------------

ScenarioConfig convergence_preset(const std::string& policy, std::uint64_t seed);

/// One run: a warm-up request fills the history, then the measured request.
struct ConvergenceOutcome {
    std::string policy;
    std::uint64_t seed = 0;
    std::vector<double> series;  // best fitness per iteration, measured request
    std::vector<std::string> placement;
    double scheduler_estimate_ms = 0.0;
    /// estimate_response of the chosen placement on ground_truth_model().
    double model_estimate_ms = 0.0;
    double measured_ms = 0.0;
};

ConvergenceOutcome run_convergence_case(const std::string& policy, std::uint64_t seed);
/// Seeds 1..n_seeds for every policy, policy-major.
std::vector<ConvergenceOutcome> run_convergence_experiment(std::size_t n_seeds,
                                                           const std::vector<std::string>& policies);
std::string convergence_experiment_csv(const std::vector<ConvergenceOutcome>& runs);
std::string placement_experiment_csv(const std::vector<ConvergenceOutcome>& runs);

// ---------------------------------------------------------------------------
// Master scalability: 10 hosts, simultaneous GoL and VOCR users.
// ---------------------------------------------------------------------------

ScenarioConfig scalability_preset(std::size_t n_users, bool scaling_enabled, std::uint64_t seed = 1);

struct ScalabilityOutcome {
    std::size_t users = 0;
    bool scaling_enabled = true;
    Stats sft;
    Stats rrt;
    std::size_t completed = 0;
    std::uint64_t forwards = 0;
    std::uint64_t scales = 0;
    std::size_t masters = 0;
};

ScalabilityOutcome run_scalability_case(std::size_t n_users, bool scaling_enabled, std::uint64_t seed = 1);
std::vector<ScalabilityOutcome> run_scalability_experiment(const std::vector<std::size_t>& user_counts,
                                                           std::uint64_t seed = 1);
std::string scalability_experiment_csv(const std::vector<ScalabilityOutcome>& rows);

// ---------------------------------------------------------------------------
// Executor reuse: one Desktop, a cold request then a warm one.
// ---------------------------------------------------------------------------

ScenarioConfig reuse_preset(const std::string& app, std::uint64_t seed = 1);

struct ReuseOutcome {
    std::string app;
    double cold_sft_ms = 0.0;
    double cold_rrt_ms = 0.0;
    double warm_sft_ms = 0.0;
    double warm_rrt_ms = 0.0;
    std::size_t warm_reused = 0;
    std::size_t warm_cold_starts = 0;
    double ratio() const { return warm_rrt_ms / cold_rrt_ms; }
};

ReuseOutcome run_reuse_case(const std::string& app, std::uint64_t seed = 1);
std::string reuse_experiment_csv(const std::vector<ReuseOutcome>& rows);

// ---------------------------------------------------------------------------
// Discovery: two Masters with disjoint actor sets on a random subnet.
// ---------------------------------------------------------------------------

struct DiscoveryOutcome {
    std::uint64_t seed = 0;
    std::size_t hosts = 0;
    /// Hop diameter of the random connected link graph.
    std::size_t diameter = 0;
    /// Discovery rounds until both Masters know and have registered every
    /// actor; 0 when that did not happen within diameter + 1 rounds.
    std::size_t rounds = 0;
    bool converged() const { return rounds > 0 && rounds <= diameter + 1; }
};

/// Hosts are 10.0.0.2 upwards on a random spanning tree plus extra edges;
/// pair latency is the hop-shortest path sum of per-edge latencies.
DiscoveryOutcome run_discovery_trial(std::uint64_t seed, std::size_t max_hosts = 16);
std::string discovery_experiment_csv(const std::vector<DiscoveryOutcome>& rows);

}  // namespace fogbus
