#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fogbus/ga_policies.hpp"
#include "fogbus/netsim.hpp"
#include "fogbus/registry.hpp"
#include "fogbus/taskgraph.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus {

struct SchedulerConfig {
    double max_cpu_util = 0.8;
    std::size_t max_sched_count = 2;

    void validate() const;  // throws InvalidArgument
};

/// Busy when either threshold is exceeded (strictly).
bool is_busy(double cpu_util, std::size_t sched_count, const SchedulerConfig& cfg);

/// Profiles the estimator reads. Hosts without a profile run at
/// `default_rate`; host pairs without a link sample use `default_link`.
struct CostModel {
    ProfileView profiles;
    LinkSpec default_link{1.0, 1e8};
    double default_rate = 1.0;

    double host_rate(const std::string& host) const;
    LinkSpec link(const std::string& a, const std::string& b) const;
};

struct EstimateInputs {
    std::string user_host;
    /// Bytes the user's sensor sends to each entry task.
    std::uint64_t input_size_bytes = 0;
};

/// Critical-path response estimate, compiled for a fixed host universe so
/// that repeated evaluation is array arithmetic.
///
/// A task starts once the input from the user (entry tasks) and the output of
/// every parent have arrived; it runs compute_cost / host rate; the estimate
/// is the latest arrival of an exit task's output back at the user. A
/// transfer costs latency + bytes * 8 / rate * 1000 ms and is free within a
/// host.
class ResponseEstimator {
public:
    ResponseEstimator(const AppGraph& app, const CostModel& model, EstimateInputs inputs,
                      std::vector<std::string> hosts);

    const std::vector<std::string>& hosts() const { return hosts_; }
    std::optional<std::size_t> host_index(const std::string& host) const;

    /// `host_of_task[i]` indexes hosts().
    double operator()(std::span<const std::size_t> host_of_task) const;

    /// Per-task start and finish times of the same schedule.
    struct Trace {
        std::vector<double> start;
        std::vector<double> finish;
        double response = 0.0;
    };
    Trace trace(std::span<const std::size_t> host_of_task) const;

private:
    double transfer(std::size_t a, std::size_t b, std::uint64_t bytes) const;

    const AppGraph* app_;
    std::vector<std::string> hosts_;
    std::vector<double> rate_;        // per host
    std::vector<double> latency_;     // n x n
    std::vector<double> bps_;         // n x n
    std::vector<double> user_latency_;
    std::vector<double> user_bps_;
    std::uint64_t input_bytes_;
};

/// One-shot estimate for a task -> host assignment given by host names.
double estimate_response(const AppGraph& app, std::span<const std::string> host_by_task, const CostModel& model,
                         const EstimateInputs& inputs);

/// Per task, indices into `actors` of the actors holding the task's image,
/// in the order given.
using TaskActorsMap = std::vector<std::vector<std::size_t>>;
TaskActorsMap build_task_actors_map(const AppGraph& app, std::span<const RegisteredActor* const> actors);

struct MasterCandidate {
    Address addr;
    double latency_ms = 0.0;
    double cpu_util = 0.0;
};

/// Lowest latency, then lowest cpu_util, then lowest address.
std::optional<Address> get_best_master(std::span<const MasterCandidate> candidates);

// ---------------------------------------------------------------------------
// Decision step of one dequeued request.
// ---------------------------------------------------------------------------

struct ScheduleInputs {
    const AppGraph* app = nullptr;
    QueuedRequest request;
    /// Live actors, registry order.
    std::vector<const RegisteredActor*> actors;
    double cpu_util = 0.0;
    /// In-flight scheduling jobs on this Master, excluding this one.
    std::size_t sched_count = 0;
    SchedulerConfig config;
    std::vector<MasterCandidate> sub_masters;
    bool scaling_enabled = true;
    CostModel model;
    std::uint64_t input_size_bytes = 0;
    std::uint64_t seed = 0;
};

struct Warned {
    std::string reason;
};

struct Forwarded {
    Address sub_master;
};

/// Busy, no sub-master yet: the caller runs the scaler.
struct ScaleNeeded {};

/// Busy and scaling disabled: the request waits for a free slot.
struct Deferred {};

struct SchedulingDecision {
    RequestId request_id;
    /// Per task, index into ScheduleInputs::actors.
    std::vector<std::size_t> actor_by_task;
    std::vector<Address> addr_by_task;
    std::map<std::string, ComponentId> assignment;
    double estimated_response_ms = 0.0;
    TimeMs decided_at = 0.0;
    std::vector<double> convergence;
    std::size_t evaluations = 0;
    std::size_t distinct_evaluations = 0;
};

using ScheduleOutcome = std::variant<SchedulingDecision, Forwarded, ScaleNeeded, Deferred, Warned>;

/// Warns when no actor is live or some task has no candidate, handles the
/// busy branch, otherwise runs `policy` on the candidate map. decided_at is
/// left for the caller.
ScheduleOutcome schedule_request(const ScheduleInputs& in, SchedulingPolicy& policy, HistoryStore& history);

}  // namespace fogbus
