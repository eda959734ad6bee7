#include "fogbus/protocol.hpp"

#include <charconv>
#include <cmath>

#include "json_codec.hpp"

namespace fogbus {

using detail::CodecError;
using detail::finite;
using detail::Json;
using detail::ObjReader;

std::string_view to_string(ComponentKind kind) {
    switch (kind) {
        case ComponentKind::Master: return "Master";
        case ComponentKind::Actor: return "Actor";
        case ComponentKind::TaskExecutor: return "TaskExecutor";
        case ComponentKind::User: return "User";
        case ComponentKind::RemoteLogger: return "RemoteLogger";
    }
    return "?";
}

std::optional<ComponentKind> parse_component_kind(std::string_view text) {
    for (ComponentKind k : kAllComponentKinds) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<std::uint32_t> parse_ipv4(std::string_view host) {
    std::uint32_t bits = 0;
    std::size_t pos = 0;
    for (int octet = 0; octet < 4; ++octet) {
        const std::size_t end = octet < 3 ? host.find('.', pos) : host.size();
        if (end == std::string_view::npos) return std::nullopt;
        std::string_view part = host.substr(pos, end - pos);
        if (part.empty() || part.size() > 3) return std::nullopt;
        unsigned value = 0;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || ptr != part.data() + part.size() || value > 255) return std::nullopt;
        bits = (bits << 8) | value;
        pos = end + 1;
    }
    return bits;
}

std::string format_ipv4(std::uint32_t bits) {
    return std::to_string((bits >> 24) & 0xff) + "." + std::to_string((bits >> 16) & 0xff) + "." +
           std::to_string((bits >> 8) & 0xff) + "." + std::to_string(bits & 0xff);
}

std::string Address::str() const { return host + ":" + std::to_string(port); }

Address Address::parse(std::string_view text) {
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) throw InvalidArgument("address without port: " + std::string(text));
    Address a;
    a.host = std::string(text.substr(0, colon));
    std::string_view port = text.substr(colon + 1);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value == 0 || value > 65535) {
        throw InvalidArgument("bad port in address: " + std::string(text));
    }
    a.port = static_cast<std::uint16_t>(value);
    if (!parse_ipv4(a.host)) throw InvalidArgument("bad host in address: " + std::string(text));
    return a;
}

std::string RequestId::str() const { return master.str() + "/" + std::to_string(serial); }

namespace detail {

Json to_json(const Address& a) {
    if (!a.valid()) throw CodecError("invalid address '" + a.str() + "'");
    return a.str();
}

Address address_from_json(const Json& j) {
    if (!j.is_string()) throw CodecError("address: expected string");
    try {
        return Address::parse(j.get<std::string>());
    } catch (const InvalidArgument& e) {
        throw CodecError(e.what());
    }
}

}  // namespace detail

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using detail::address_from_json;
using detail::to_json;

Json kind_json(ComponentKind k) { return std::string(to_string(k)); }

ComponentKind kind_from(const std::string& s) {
    auto k = parse_component_kind(s);
    if (!k) throw CodecError("unknown component kind '" + s + "'");
    return *k;
}

Json request_json(const RequestId& r) { return Json{{"master", to_json(r.master)}, {"serial", r.serial}}; }

RequestId request_from(const Json& j) {
    ObjReader in(j, "request_id");
    RequestId r;
    r.master = address_from_json(in.raw("master"));
    r.serial = in.u64("serial");
    in.finish();
    return r;
}

Json endpoints_json(const std::vector<TaskEndpoint>& eps) {
    Json arr = Json::array();
    for (const auto& e : eps) arr.push_back(Json{{"task", e.task}, {"addr", to_json(e.addr)}});
    return arr;
}

std::vector<TaskEndpoint> endpoints_from(const Json& arr) {
    std::vector<TaskEndpoint> out;
    for (const auto& j : arr) {
        ObjReader in(j, "endpoint");
        TaskEndpoint e;
        e.task = in.str("task");
        e.addr = address_from_json(in.raw("addr"));
        in.finish();
        out.push_back(std::move(e));
    }
    return out;
}

Json strings_json(const std::vector<std::string>& v) { return Json(v); }

std::vector<std::string> strings_from(const Json& arr) {
    std::vector<std::string> out;
    for (const auto& j : arr) {
        if (!j.is_string()) throw CodecError("expected string element");
        out.push_back(j.get<std::string>());
    }
    return out;
}

Json executor_msg_json(const RequestId& rid, const std::string& app, const std::string& task,
                       const std::vector<TaskEndpoint>& deps, const Address& user) {
    return Json{{"request_id", request_json(rid)},
                {"app", app},
                {"task", task},
                {"dependencies", endpoints_json(deps)},
                {"user", to_json(user)}};
}

template <class T>
T executor_msg_from(ObjReader& in) {
    T m;
    m.request_id = request_from(in.raw("request_id"));
    m.app = in.str("app");
    m.task = in.str("task");
    m.dependencies = endpoints_from(in.array("dependencies"));
    m.user = address_from_json(in.raw("user"));
    return m;
}

Json payload_body(const MessagePayload& p) {
    return std::visit(
        Overloaded{
            [](const RegisterActor& m) {
                if (auto reason = validate_record(m.profile)) throw CodecError("RegisterActor.profile: " + *reason);
                Json prof = to_json(LogRecord{m.profile});
                prof.erase("type");
                return Json{{"profile", prof}, {"images", strings_json(m.images)}};
            },
            [](const RegisterUser& m) { return Json{{"app", m.app}, {"entry", to_json(m.entry)}}; },
            [](const PlacementRequest& m) { return Json{{"request_id", m.request_id}, {"app", m.app}}; },
            [](const InitTaskExecutor& m) {
                return executor_msg_json(m.request_id, m.app, m.task, m.dependencies, m.user);
            },
            [](const ReuseTaskExecutor& m) {
                return executor_msg_json(m.request_id, m.app, m.task, m.dependencies, m.user);
            },
            [](const ExecutorReady& m) { return Json{{"request_id", request_json(m.request_id)}, {"task", m.task}}; },
            [](const ResourcesReady& m) {
                return Json{{"request_id", request_json(m.request_id)},
                            {"decided_at", finite(m.decided_at, "decided_at")},
                            {"entries", endpoints_json(m.entries)}};
            },
            [](const Data& m) {
                return Json{{"request_id", request_json(m.request_id)},
                            {"task", m.task},
                            {"from_task", m.from_task},
                            {"frame_seq", m.frame_seq},
                            {"size_bytes", m.size_bytes},
                            {"payload", m.payload}};
            },
            [](const Result& m) {
                return Json{{"request_id", request_json(m.request_id)},
                            {"task", m.task},
                            {"frame_seq", m.frame_seq},
                            {"size_bytes", m.size_bytes}};
            },
            [](const Probe&) { return Json::object(); },
            [](const ProbeReply& m) {
                Json actors = Json::array();
                for (const auto& a : m.actors) actors.push_back(to_json(a));
                return Json{{"kind", kind_json(m.kind)}, {"actors", actors}};
            },
            [](const AdvertiseMaster& m) { return Json{{"master", to_json(m.master)}}; },
            [](const InitNewMaster& m) { return Json{{"requester", to_json(m.requester)}}; },
            [](const ForwardToMaster& m) { return Json{{"sub_master", to_json(m.sub_master)}}; },
            [](const WarnNoResources& m) { return Json{{"request_id", request_json(m.request_id)}}; },
            [](const LogUpload& m) {
                Json records = Json::array();
                for (const auto& r : m.records) {
                    if (auto reason = validate_record(r)) throw CodecError("LogUpload record: " + *reason);
                    records.push_back(to_json(r));
                }
                return Json{{"records", records}};
            },
            [](const LogQuery&) { return Json::object(); },
            [](const RequestDone& m) { return Json{{"request_id", request_json(m.request_id)}}; },
        },
        p);
}

MessagePayload payload_from(const std::string& tag, const Json& body) {
    ObjReader in(body, tag);
    MessagePayload out;
    if (tag == "RegisterActor") {
        RegisterActor m;
        Json prof = in.raw("profile");
        if (!prof.is_object()) throw CodecError("RegisterActor.profile: expected object");
        prof["type"] = "HostProfile";
        m.profile = std::get<HostProfile>(detail::record_from_json(prof));
        if (auto reason = validate_record(m.profile)) throw CodecError("RegisterActor.profile: " + *reason);
        m.images = strings_from(in.array("images"));
        out = std::move(m);
    } else if (tag == "RegisterUser") {
        RegisterUser m;
        m.app = in.str("app");
        m.entry = address_from_json(in.raw("entry"));
        out = std::move(m);
    } else if (tag == "PlacementRequest") {
        PlacementRequest m;
        m.request_id = in.u64("request_id");
        m.app = in.str("app");
        out = std::move(m);
    } else if (tag == "InitTaskExecutor") {
        out = executor_msg_from<InitTaskExecutor>(in);
    } else if (tag == "ReuseTaskExecutor") {
        out = executor_msg_from<ReuseTaskExecutor>(in);
    } else if (tag == "ExecutorReady") {
        ExecutorReady m;
        m.request_id = request_from(in.raw("request_id"));
        m.task = in.str("task");
        out = std::move(m);
    } else if (tag == "ResourcesReady") {
        ResourcesReady m;
        m.request_id = request_from(in.raw("request_id"));
        m.decided_at = in.num("decided_at");
        m.entries = endpoints_from(in.array("entries"));
        out = std::move(m);
    } else if (tag == "Data") {
        Data m;
        m.request_id = request_from(in.raw("request_id"));
        m.task = in.str("task");
        m.from_task = in.str("from_task");
        m.frame_seq = in.u64("frame_seq");
        m.size_bytes = in.u64("size_bytes");
        m.payload = in.str("payload");
        out = std::move(m);
    } else if (tag == "Result") {
        Result m;
        m.request_id = request_from(in.raw("request_id"));
        m.task = in.str("task");
        m.frame_seq = in.u64("frame_seq");
        m.size_bytes = in.u64("size_bytes");
        out = std::move(m);
    } else if (tag == "Probe") {
        out = Probe{};
    } else if (tag == "ProbeReply") {
        ProbeReply m;
        m.kind = kind_from(in.str("kind"));
        for (const auto& a : in.array("actors")) m.actors.push_back(address_from_json(a));
        out = std::move(m);
    } else if (tag == "AdvertiseMaster") {
        out = AdvertiseMaster{address_from_json(in.raw("master"))};
    } else if (tag == "InitNewMaster") {
        out = InitNewMaster{address_from_json(in.raw("requester"))};
    } else if (tag == "ForwardToMaster") {
        out = ForwardToMaster{address_from_json(in.raw("sub_master"))};
    } else if (tag == "WarnNoResources") {
        out = WarnNoResources{request_from(in.raw("request_id"))};
    } else if (tag == "LogUpload") {
        LogUpload m;
        for (const auto& r : in.array("records")) {
            m.records.push_back(detail::record_from_json(r));
            if (auto reason = validate_record(m.records.back())) throw CodecError("LogUpload record: " + *reason);
        }
        out = std::move(m);
    } else if (tag == "LogQuery") {
        out = LogQuery{};
    } else if (tag == "RequestDone") {
        out = RequestDone{request_from(in.raw("request_id"))};
    } else {
        throw CodecError("unknown payload tag '" + tag + "'");
    }
    in.finish();
    return out;
}

Json sender_json(const std::optional<ComponentId>& id) {
    if (!id) return nullptr;
    return Json{{"kind", kind_json(id->kind)}, {"serial", id->serial}, {"origin", to_json(id->origin)}};
}

std::optional<ComponentId> sender_from(const Json& j) {
    if (j.is_null()) return std::nullopt;
    ObjReader in(j, "sender_id");
    ComponentId id;
    id.kind = kind_from(in.str("kind"));
    id.serial = in.u64("serial");
    id.origin = address_from_json(in.raw("origin"));
    in.finish();
    return id;
}

}  // namespace

std::string_view payload_tag(const MessagePayload& payload) {
    static constexpr std::string_view kTags[] = {
        "RegisterActor",  "RegisterUser",    "PlacementRequest", "InitTaskExecutor", "ReuseTaskExecutor",
        "ExecutorReady",  "ResourcesReady",  "Data",             "Result",           "Probe",
        "ProbeReply",     "AdvertiseMaster", "InitNewMaster",    "ForwardToMaster",  "WarnNoResources",
        "LogUpload",      "LogQuery",        "RequestDone"};
    static_assert(std::size(kTags) == std::variant_size_v<MessagePayload>);
    return kTags[payload.index()];
}

Bytes encode(const MessageEnvelope& msg) {
    std::string body;
    try {
        if (!std::isfinite(msg.sent_at) || msg.sent_at < 0.0) throw CodecError("sent_at must be a non-negative time");
        Json j{{"src", to_json(msg.source)},
               {"dst", to_json(msg.destination)},
               {"sender_id", sender_json(msg.sender_id)},
               {"sent_at", msg.sent_at},
               {"type", std::string(payload_tag(msg.payload))},
               {"body", payload_body(msg.payload)}};
        body = j.dump();
    } catch (const CodecError& e) {
        throw ProtocolError(std::string("cannot encode: ") + e.what(), 0);
    }
    if (body.size() > kMaxBodyBytes) throw EncodingOverflow("frame body exceeds 2^31-1 bytes");
    Bytes out(kFrameHeaderBytes + body.size());
    const auto n = static_cast<std::uint32_t>(body.size());
    out[0] = static_cast<std::uint8_t>(n >> 24);
    out[1] = static_cast<std::uint8_t>(n >> 16);
    out[2] = static_cast<std::uint8_t>(n >> 8);
    out[3] = static_cast<std::uint8_t>(n);
    std::copy(body.begin(), body.end(), out.begin() + kFrameHeaderBytes);
    return out;
}

std::optional<Decoded> try_decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderBytes) return std::nullopt;
    const std::uint32_t n = (std::uint32_t{bytes[0]} << 24) | (std::uint32_t{bytes[1]} << 16) |
                            (std::uint32_t{bytes[2]} << 8) | std::uint32_t{bytes[3]};
    if (n > kMaxBodyBytes) throw ProtocolError("declared body length exceeds 2^31-1", 0);
    if (bytes.size() - kFrameHeaderBytes < n) return std::nullopt;
    const auto* first = reinterpret_cast<const char*>(bytes.data() + kFrameHeaderBytes);
    Json j;
    try {
        j = Json::parse(first, first + n);
    } catch (const Json::parse_error& e) {
        // nlohmann reports a 1-based byte position within the body.
        const std::size_t pos = e.byte > 0 ? e.byte - 1 : 0;
        throw ProtocolError("malformed body", kFrameHeaderBytes + pos);
    }
    try {
        ObjReader in(j, "envelope");
        MessageEnvelope env;
        env.source = detail::address_from_json(in.raw("src"));
        env.destination = detail::address_from_json(in.raw("dst"));
        env.sender_id = sender_from(in.raw("sender_id"));
        env.sent_at = in.num("sent_at");
        if (!(env.sent_at >= 0.0)) throw CodecError("sent_at must be non-negative");
        const std::string tag = in.str("type");
        env.payload = payload_from(tag, in.raw("body"));
        in.finish();
        return Decoded{std::move(env), kFrameHeaderBytes + n};
    } catch (const CodecError& e) {
        throw ProtocolError(e.what(), kFrameHeaderBytes);
    }
}

Decoded decode_frame(std::span<const std::uint8_t> bytes) {
    auto d = try_decode(bytes);
    if (!d) {
        std::size_t needed = kFrameHeaderBytes;
        if (bytes.size() >= kFrameHeaderBytes) {
            needed += (std::size_t{bytes[0]} << 24) | (std::size_t{bytes[1]} << 16) | (std::size_t{bytes[2]} << 8) |
                      std::size_t{bytes[3]};
        }
        throw NeedMoreBytes(needed);
    }
    return std::move(*d);
}

std::uint64_t wire_size(const MessageEnvelope& msg, std::size_t frame_bytes) {
    std::uint64_t extra = 0;
    if (const auto* d = std::get_if<Data>(&msg.payload)) {
        extra = d->size_bytes > d->payload.size() ? d->size_bytes - d->payload.size() : 0;
    } else if (const auto* r = std::get_if<Result>(&msg.payload)) {
        extra = r->size_bytes;
    }
    return frame_bytes + extra;
}

}  // namespace fogbus
