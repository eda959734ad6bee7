#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogbus/discovery.hpp"
#include "fogbus/ga_policies.hpp"
#include "fogbus/host_machine.hpp"
#include "fogbus/netsim.hpp"
#include "fogbus/protocol.hpp"
#include "fogbus/registry.hpp"
#include "fogbus/scheduler.hpp"
#include "fogbus/taskgraph.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus {

inline constexpr std::uint16_t kMasterPort = 5000;
inline constexpr std::uint16_t kActorPort = 5001;
inline constexpr std::uint16_t kLoggerPort = 5002;
inline constexpr std::uint16_t kUserPortBase = 6000;

struct RuntimeParams {
    TimeMs profile_period_ms = 1000.0;
    int stale_periods = 3;
    TimeMs executor_startup_ms = 1500.0;
    TimeMs cool_off_ms = 30000.0;
    TimeMs master_startup_ms = 1000.0;
    /// Virtual scheduling cost on the Master's host: a fixed cost per GA
    /// iteration plus a cost per distinct assignment scored.
    double sched_iteration_ms = 100.0;
    double sched_eval_base_ms = 0.5;
    double sched_eval_per_task_ms = 0.005;
    TimeMs user_timeout_ms = 600000.0;

    void validate() const;  // throws InvalidArgument
    TimeMs stale_after_ms() const { return profile_period_ms * stale_periods; }
};

/// Virtual time the Master's host spends computing decision `d`.
TimeMs scheduling_time(const RuntimeParams& rt, const SchedulingDecision& d, std::size_t n_tasks);

/// Event totals shared by every component of a run.
struct EventCounters {
    std::uint64_t forwards = 0;
    std::uint64_t scales = 0;
    std::uint64_t reuses = 0;
    std::uint64_t cold_starts = 0;
    std::uint64_t reuse_races = 0;
    std::uint64_t warned = 0;
    std::uint64_t protocol_errors = 0;
    std::uint64_t masters_started = 0;
};

// ---------------------------------------------------------------------------
// Remote Logger
// ---------------------------------------------------------------------------

class RemoteLogger {
public:
    RemoteLogger(Transport& net, Address self, LogStore& store);
    void start();

    const Address& address() const { return self_; }
    /// Latest-per-key view maintained on ingest; equals latest_profiles(store).
    const ProfileView& view() const { return view_; }
    std::uint64_t rejected() const { return rejected_; }

private:
    void on_message(const MessageEnvelope& env);

    Transport& net_;
    Address self_;
    LogStore& store_;
    ProfileView view_;
    std::uint64_t rejected_ = 0;
};

// ---------------------------------------------------------------------------
// Master
// ---------------------------------------------------------------------------

struct MasterConfig {
    SchedulerConfig scheduler;
    bool scaling_enabled = true;
    std::string policy = "ohnsga";
    GaParams ga;
    DiscoveryConfig discovery;
    bool discovery_enabled = true;
    RuntimeParams runtime;
    Address logger;
    LinkSpec default_link{1.0, 1e8};
    /// Sensor frame size per app, used as entry input in estimates.
    std::map<std::string, std::uint64_t> input_bytes;
    std::uint64_t seed = 0;
};

/// What a Master decided for one request, for reporting.
struct DecisionRecord {
    RequestId request_id;
    std::string app;
    std::string policy;
    Address user;
    std::vector<std::string> tasks;
    std::vector<std::string> host_by_task;
    double estimated_response_ms = 0.0;
    TimeMs dequeued_at = 0.0;
    TimeMs decided_at = 0.0;
    TimeMs ready_at = -1.0;
    std::vector<double> convergence;
    std::size_t evaluations = 0;
    std::size_t distinct_evaluations = 0;
    TimeMs scheduling_ms = 0.0;
    std::size_t reused = 0;
    std::size_t cold = 0;
};

class Master {
public:
    Master(Transport& net, HostMachine& host, const AppCatalog& apps, const Topology& topo, Address self,
           MasterConfig cfg, EventCounters& counters, std::optional<Address> parent = std::nullopt);

    /// Binds the endpoint and starts periodic work. A Master with a parent
    /// first pulls the parent's actor list and advertises itself to them.
    void start();
    bool started() const { return started_; }
    /// Set once a spawned Master has announced itself to its parent.
    bool bootstrapped() const { return bootstrapped_; }

    const Address& address() const { return self_; }
    const Registry& registry() const { return registry_; }
    const Discovery& discovery() const { return *discovery_; }
    const ProfileView& profile_view() const { return view_; }
    const std::vector<DecisionRecord>& decisions() const { return decisions_; }
    const std::vector<Address>& sub_masters() const { return sub_masters_; }
    const HistoryStore& history() const { return history_; }
    std::size_t queued() const { return queue_.size(); }
    std::size_t in_flight() const { return in_flight_; }
    std::optional<Address> parent() const { return parent_; }

    /// Runs a discovery tick now (normally driven by the periodic timer).
    void discovery_tick();
    /// Closes the open discovery round now.
    void discovery_close();

    std::string state_dump() const;

private:
    struct RequestState {
        RequestId id;
        std::string app;
        Address user;
        std::vector<Address> actors;  // by task
        std::vector<TaskEndpoint> entries;
        std::size_t decision_index = 0;
        bool done = false;
    };
    struct IdleKey {
        Address actor;
        std::string app;
        std::string task;
        auto operator<=>(const IdleKey&) const = default;
    };

    void on_message(const MessageEnvelope& env);
    void send(const Address& to, MessagePayload payload);
    void enqueue(const Address& user, const std::string& app, TimeMs sent_at);
    void pump();
    void start_scale(const QueuedRequest& req);
    void dispatch(SchedulingDecision decision, const QueuedRequest& req, TimeMs dequeued_at);
    void on_ready(const ExecutorReady& msg);
    void on_request_done(const RequestDone& msg);
    void on_sub_master(const Address& sub);
    void periodic();
    void bootstrap_step();
    CostModel cost_model() const;
    std::set<std::string> master_hosts() const;

    Transport& net_;
    HostMachine& host_;
    const AppCatalog& apps_;
    const Topology& topo_;
    Address self_;
    MasterConfig cfg_;
    EventCounters& counters_;
    std::optional<Address> parent_;
    std::unique_ptr<SchedulingPolicy> policy_;
    std::unique_ptr<Discovery> discovery_;

    Registry registry_;
    RequestQueue queue_;
    HistoryStore history_;
    ProfileView view_;
    std::size_t in_flight_ = 0;
    std::uint64_t request_serial_ = 0;
    bool started_ = false;
    bool bootstrapped_ = false;
    bool retry_armed_ = false;

    std::map<RequestId, ReadinessTracker> trackers_;
    std::map<RequestId, RequestState> requests_;
    std::map<IdleKey, std::deque<TimeMs>> idle_;  // expiry times, FIFO
    std::vector<DecisionRecord> decisions_;

    std::vector<Address> sub_masters_;
    std::optional<std::string> scaling_host_;
    std::vector<QueuedRequest> pending_forward_;

    std::optional<std::vector<Address>> bootstrap_actors_;
};

// ---------------------------------------------------------------------------
// Actor and task executors
// ---------------------------------------------------------------------------

enum class ExecutorPhase { Initializing, Connecting, Ready, Running, CoolingOff, Terminated };

std::string_view to_string(ExecutorPhase phase);
bool legal_transition(ExecutorPhase from, ExecutorPhase to);

class IllegalTransition : public Error {
public:
    using Error::Error;
};

struct ExecutorState {
    ComponentId id;
    std::string app;
    std::string task;
    std::optional<RequestId> request_id;
    ExecutorPhase phase = ExecutorPhase::Initializing;
    std::map<std::string, Address> peers;
    std::optional<TimeMs> cool_off_deadline;
    Address master;
    Address user;
    std::uint64_t frames_in = 0;
    std::uint64_t frames_out = 0;
    std::uint64_t requests_served = 0;
    TimeMs terminated_at = -1.0;
};

struct ActorConfig {
    std::vector<Address> masters;
    Address logger;
    std::vector<std::string> images{kAnyImage};
    RuntimeParams runtime;
};

/// Creates a Master on `host` with `parent`, to be started by the caller.
using MasterSpawner = std::function<Master&(const std::string& host, const Address& parent)>;

class Actor {
public:
    Actor(Transport& net, HostMachine& host, const AppCatalog& apps, const Topology& topo, Address self,
          ActorConfig cfg, EventCounters& counters, MasterSpawner spawner = {});

    void start();

    const Address& address() const { return self_; }
    const std::map<std::uint64_t, ExecutorState>& executors() const { return executors_; }
    std::size_t pool_size(const std::string& app, const std::string& task) const;
    const std::vector<Address>& masters() const { return cfg_.masters; }
    /// Master created on this host, if any.
    std::optional<Address> hosted_master() const { return hosted_master_; }
    /// Declares a Master already running on this host.
    void set_hosted_master(const Address& addr, bool running = true);
    std::uint64_t uploads() const { return uploads_; }

    std::string state_dump() const;

private:
    struct Inputs {
        std::set<std::string> got;  // "" is the user's sensor
    };
    struct Wiring {
        std::set<Address> awaiting;
    };

    void on_message(const MessageEnvelope& env);
    void send(const Address& to, MessagePayload payload);
    void register_with(const Address& master);
    void periodic();
    void upload();

    void init_executor(const Address& master, const InitTaskExecutor& msg);
    void reuse_executor(const Address& master, const ReuseTaskExecutor& msg);
    void wire(ExecutorState& ex, const std::vector<TaskEndpoint>& deps);
    void set_phase(ExecutorState& ex, ExecutorPhase to);
    void become_ready(ExecutorState& ex);
    void on_peer_reply(const Address& from);
    void on_data(const Data& msg);
    void run_frame(std::uint64_t exec, std::uint64_t frame_seq);
    void on_request_done(const RequestDone& msg);
    void init_master(const InitNewMaster& msg);

    Transport& net_;
    HostMachine& host_;
    const AppCatalog& apps_;
    const Topology& topo_;
    Address self_;
    ActorConfig cfg_;
    EventCounters& counters_;
    MasterSpawner spawner_;

    std::uint64_t next_exec_ = 0;
    std::map<std::uint64_t, ExecutorState> executors_;
    std::map<std::uint64_t, Wiring> wiring_;
    std::map<std::pair<RequestId, std::string>, std::uint64_t> by_request_;
    std::map<std::pair<std::string, std::string>, std::deque<std::uint64_t>> pool_;
    std::map<std::uint64_t, TimerId> expiry_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, Inputs> inputs_;  // (exec, frame)
    LogBuffer buffer_;
    std::optional<Address> hosted_master_;
    bool hosted_master_running_ = false;
    std::uint64_t uploads_ = 0;
};

// ---------------------------------------------------------------------------
// User
// ---------------------------------------------------------------------------

struct UserConfig {
    std::string app;
    std::size_t frame_count = 1;
    TimeMs frame_interval_ms = 0.0;
    /// 0 selects the app's default frame size.
    std::uint64_t frame_size_bytes = 0;
    TimeMs start_at = 0.0;
    /// Sequential placement requests; the next one starts request_gap_ms
    /// after the previous one ends.
    std::size_t requests = 1;
    TimeMs request_gap_ms = 0.0;
    Address master;
};

enum class Outcome { Completed, Forwarded, Warned };
std::string_view to_string(Outcome outcome);

struct RequestMetrics {
    std::string user;
    std::size_t index = 0;
    std::string app;
    std::string request_id;
    Outcome outcome = Outcome::Warned;
    bool timed_out = false;
    std::size_t forwards = 0;
    TimeMs sent_at = 0.0;
    std::optional<double> sft_ms;
    std::optional<double> rrt_ms;
    std::vector<double> response_ms;
    std::string served_by;
};

class User {
public:
    User(Transport& net, const AppCatalog& apps, Address self, UserConfig cfg, Address logger,
         TimeMs timeout_ms);

    void start();
    bool finished() const { return finished_; }
    const Address& address() const { return self_; }
    const UserConfig& config() const { return cfg_; }
    const std::vector<RequestMetrics>& metrics() const { return metrics_; }
    std::string state_dump() const;

private:
    void on_message(const MessageEnvelope& env);
    void send(const Address& to, MessagePayload payload);
    void begin_request();
    void on_ready(const ResourcesReady& msg);
    void send_frame(std::uint64_t seq);
    void on_result(const Result& msg);
    void end_request(Outcome outcome, bool timed_out);

    Transport& net_;
    const AppGraph& app_;
    Address self_;
    UserConfig cfg_;
    Address logger_;
    TimeMs timeout_ms_;

    std::size_t current_ = 0;
    bool active_ = false;
    bool finished_ = false;
    bool registered_ = false;
    TimerId timeout_timer_ = 0;
    std::optional<RequestId> rid_;
    Address serving_master_;
    std::vector<TaskEndpoint> entries_;
    std::map<std::uint64_t, TimeMs> frame_sent_;
    std::map<std::uint64_t, std::set<std::string>> frame_results_;
    std::size_t frames_done_ = 0;
    std::vector<RequestMetrics> metrics_;
};

}  // namespace fogbus
