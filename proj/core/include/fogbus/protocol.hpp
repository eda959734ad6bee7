#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fogbus/common.hpp"
#include "fogbus/telemetry.hpp"

namespace fogbus {

// ---------------------------------------------------------------------------
// Identity and addressing
// ---------------------------------------------------------------------------

enum class ComponentKind { Master, Actor, TaskExecutor, User, RemoteLogger };

inline constexpr ComponentKind kAllComponentKinds[] = {
    ComponentKind::Master, ComponentKind::Actor, ComponentKind::TaskExecutor,
    ComponentKind::User, ComponentKind::RemoteLogger};

std::string_view to_string(ComponentKind kind);
std::optional<ComponentKind> parse_component_kind(std::string_view text);

/// Parses a dotted quad. Returns nullopt unless exactly four octets 0-255.
std::optional<std::uint32_t> parse_ipv4(std::string_view host);
std::string format_ipv4(std::uint32_t bits);

struct Address {
    std::string host;
    std::uint16_t port = 0;

    bool valid() const { return parse_ipv4(host).has_value() && port != 0; }
    std::string str() const;
    /// "a.b.c.d:port"; throws InvalidArgument.
    static Address parse(std::string_view text);

    auto operator<=>(const Address&) const = default;
};

struct ComponentId {
    ComponentKind kind = ComponentKind::Actor;
    std::uint64_t serial = 0;
    Address origin;

    auto operator<=>(const ComponentId&) const = default;
};

/// Placement request identity: unique across Masters because it carries the
/// issuing Master's address.
struct RequestId {
    Address master;
    std::uint64_t serial = 0;

    std::string str() const;
    auto operator<=>(const RequestId&) const = default;
};

// ---------------------------------------------------------------------------
// Payloads
// ---------------------------------------------------------------------------

struct TaskEndpoint {
    std::string task;
    Address addr;
    bool operator==(const TaskEndpoint&) const = default;
};

struct RegisterActor {
    HostProfile profile;
    std::vector<std::string> images;  // "*" supports every task
    bool operator==(const RegisterActor&) const = default;
};

struct RegisterUser {
    std::string app;
    Address entry;
    bool operator==(const RegisterUser&) const = default;
};

/// Follow-up request from an already registered user. `request_id` is the
/// user's own sequence number.
struct PlacementRequest {
    std::uint64_t request_id = 0;
    std::string app;
    bool operator==(const PlacementRequest&) const = default;
};

struct InitTaskExecutor {
    RequestId request_id;
    std::string app;
    std::string task;
    std::vector<TaskEndpoint> dependencies;  // parents and children, by actor
    Address user;
    bool operator==(const InitTaskExecutor&) const = default;
};

struct ReuseTaskExecutor {
    RequestId request_id;
    std::string app;
    std::string task;
    std::vector<TaskEndpoint> dependencies;
    Address user;
    bool operator==(const ReuseTaskExecutor&) const = default;
};

struct ExecutorReady {
    RequestId request_id;
    std::string task;
    bool operator==(const ExecutorReady&) const = default;
};

struct ResourcesReady {
    RequestId request_id;
    TimeMs decided_at = 0.0;
    std::vector<TaskEndpoint> entries;
    bool operator==(const ResourcesReady&) const = default;
};

struct Data {
    RequestId request_id;
    std::string task;       // destination task
    std::string from_task;  // empty when sent by the user
    std::uint64_t frame_seq = 0;
    std::uint64_t size_bytes = 0;
    std::string payload;  // synthetic; size_bytes is what the link charges
    bool operator==(const Data&) const = default;
};

struct Result {
    RequestId request_id;
    std::string task;
    std::uint64_t frame_seq = 0;
    std::uint64_t size_bytes = 0;
    bool operator==(const Result&) const = default;
};

struct Probe {
    bool operator==(const Probe&) const = default;
};

struct ProbeReply {
    ComponentKind kind = ComponentKind::Actor;
    std::vector<Address> actors;
    bool operator==(const ProbeReply&) const = default;
};

struct AdvertiseMaster {
    Address master;
    bool operator==(const AdvertiseMaster&) const = default;
};

struct InitNewMaster {
    Address requester;
    bool operator==(const InitNewMaster&) const = default;
};

struct ForwardToMaster {
    Address sub_master;
    bool operator==(const ForwardToMaster&) const = default;
};

struct WarnNoResources {
    RequestId request_id;
    bool operator==(const WarnNoResources&) const = default;
};

struct LogUpload {
    std::vector<LogRecord> records;
    bool operator==(const LogUpload&) const = default;
};

/// Asks a Remote Logger for its latest profiles; answered with LogUpload.
struct LogQuery {
    bool operator==(const LogQuery&) const = default;
};

/// User finished streaming; executors of the request enter cooling-off.
struct RequestDone {
    RequestId request_id;
    bool operator==(const RequestDone&) const = default;
};

using MessagePayload =
    std::variant<RegisterActor, RegisterUser, PlacementRequest, InitTaskExecutor, ReuseTaskExecutor,
                 ExecutorReady, ResourcesReady, Data, Result, Probe, ProbeReply, AdvertiseMaster,
                 InitNewMaster, ForwardToMaster, WarnNoResources, LogUpload, LogQuery, RequestDone>;

/// Wire tag of the active alternative.
std::string_view payload_tag(const MessagePayload& payload);

struct MessageEnvelope {
    Address source;
    Address destination;
    std::optional<ComponentId> sender_id;
    MessagePayload payload;
    TimeMs sent_at = 0.0;

    bool operator==(const MessageEnvelope&) const = default;
};

// ---------------------------------------------------------------------------
// Codec: uint32 big-endian body length || canonical text body
// ---------------------------------------------------------------------------

inline constexpr std::size_t kFrameHeaderBytes = 4;
inline constexpr std::size_t kMaxBodyBytes = 0x7fffffffu;

class EncodingOverflow : public Error {
public:
    using Error::Error;
};

class NeedMoreBytes : public Error {
public:
    explicit NeedMoreBytes(std::size_t needed)
        : Error("incomplete frame, need " + std::to_string(needed) + " bytes"), needed_(needed) {}
    std::size_t needed() const { return needed_; }

private:
    std::size_t needed_;
};

class ProtocolError : public Error {
public:
    ProtocolError(std::string what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

using Bytes = std::vector<std::uint8_t>;

/// Throws ProtocolError when the envelope violates a type invariant and
/// EncodingOverflow when the body exceeds kMaxBodyBytes.
Bytes encode(const MessageEnvelope& msg);

struct Decoded {
    MessageEnvelope envelope;
    std::size_t consumed = 0;
};

/// Decodes the first frame of `bytes`; trailing bytes are left unconsumed.
Decoded decode_frame(std::span<const std::uint8_t> bytes);
inline MessageEnvelope decode(std::span<const std::uint8_t> bytes) {
    return decode_frame(bytes).envelope;
}
/// nullopt instead of NeedMoreBytes; other errors still throw.
std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes);

/// Bytes a link is charged for: the frame plus any synthetic data payload.
std::uint64_t wire_size(const MessageEnvelope& msg, std::size_t frame_bytes);

}  // namespace fogbus
