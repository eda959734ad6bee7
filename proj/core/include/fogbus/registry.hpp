#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fogbus/protocol.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus {

inline constexpr const char* kAnyImage = "*";

struct RegisteredActor {
    ComponentId id;
    Address addr;
    HostProfile profile;
    std::set<std::string> images;
    TimeMs last_seen = 0.0;

    bool has_image(const std::string& task) const {
        return images.count(kAnyImage) > 0 || images.count(task) > 0;
    }
};

struct RegisteredUser {
    ComponentId id;
    Address addr;
    std::string app;
};

/// Request waiting in a Master's FIFO intake.
struct QueuedRequest {
    RequestId request_id;
    Address user_addr;
    std::string app;
    TimeMs received_at = 0.0;
    /// When the user first sent the request, before any forwarding.
    TimeMs original_sent_at = 0.0;
};

/// Identity bookkeeping of one Master. Serials are shared by all component
/// kinds and grow by one per new registration; a repeated registration from
/// the same (address, kind) gets its old id back.
class Registry {
public:
    explicit Registry(Address self, std::uint64_t serial_base = 0)
        : self_(std::move(self)), next_serial_(serial_base) {}

    const Address& self() const { return self_; }

    /// Records or refreshes an actor. Returns its id.
    ComponentId register_actor(const Address& addr, const RegisterActor& msg, TimeMs now);
    ComponentId register_user(const Address& addr, const RegisterUser& msg);

    /// Issues a fresh id for an endpoint that is not tracked, e.g. an executor.
    ComponentId issue(ComponentKind kind);

    /// Actors ordered by id serial.
    std::vector<const RegisteredActor*> actors() const;
    /// Actors seen within `stale_after_ms` of `now`.
    std::vector<const RegisteredActor*> live_actors(TimeMs now, TimeMs stale_after_ms) const;
    const RegisteredActor* actor_at(const Address& addr) const;
    const RegisteredActor* actor_on_host(const std::string& host) const;
    bool has_actor(const Address& addr) const { return actor_at(addr) != nullptr; }
    std::size_t actor_count() const { return actors_.size(); }

    const RegisteredUser* user_at(const Address& addr) const;

    std::uint64_t next_serial() const { return next_serial_; }

private:
    Address self_;
    std::uint64_t next_serial_;
    std::map<std::pair<Address, ComponentKind>, ComponentId> ids_;
    std::map<Address, RegisteredActor> actors_;
    std::map<Address, RegisteredUser> users_;
};

/// Outcome of feeding one ExecutorReady to a tracker.
enum class ReadyOutcome { Pending, Completed, Duplicate, UnknownTask, AlreadyComplete };

/// Counts ExecutorReady messages of one request until every expected task
/// has reported exactly once.
class ReadinessTracker {
public:
    ReadinessTracker() = default;
    ReadinessTracker(RequestId id, std::set<std::string> expected)
        : id_(std::move(id)), expected_(std::move(expected)) {}

    ReadyOutcome on_ready(const std::string& task);

    const RequestId& request_id() const { return id_; }
    const std::set<std::string>& expected() const { return expected_; }
    const std::set<std::string>& ready() const { return ready_; }
    bool complete() const { return emitted_; }

private:
    RequestId id_;
    std::set<std::string> expected_;
    std::set<std::string> ready_;
    bool emitted_ = false;
};

/// FIFO intake ordered by arrival; ties keep enqueue order.
class RequestQueue {
public:
    void push(QueuedRequest req) { queue_.push_back(std::move(req)); }
    std::optional<QueuedRequest> pop();
    bool empty() const { return queue_.empty(); }
    std::size_t size() const { return queue_.size(); }
    const std::deque<QueuedRequest>& items() const { return queue_; }

private:
    std::deque<QueuedRequest> queue_;
};

}  // namespace fogbus
