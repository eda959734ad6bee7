#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "fogbus/common.hpp"
#include "fogbus/protocol.hpp"

namespace fogbus {

struct LinkSpec {
    double latency_ms = 0.0;
    double data_rate_bps = 1e9;

    /// Milliseconds to push `bytes` through the link, latency included.
    double transfer_ms(std::uint64_t bytes) const {
        return latency_ms + static_cast<double>(bytes) * 8.0 / data_rate_bps * 1000.0;
    }

    bool operator==(const LinkSpec&) const = default;
};

inline constexpr LinkSpec kSelfLink{0.0, std::numeric_limits<double>::infinity()};

/// Hosts and symmetric pairwise link characteristics.
class Topology {
public:
    Topology() = default;
    explicit Topology(LinkSpec default_link) : default_link_(default_link) {}

    void add_host(const std::string& host);
    /// Throws InvalidArgument for negative latency or non-positive rate.
    void set_link(const std::string& a, const std::string& b, LinkSpec spec);

    /// spec(a, b) == spec(b, a); spec(a, a) is the zero-cost self link.
    LinkSpec spec(const std::string& a, const std::string& b) const;
    bool has_explicit_link(const std::string& a, const std::string& b) const;

    const std::vector<std::string>& hosts() const { return hosts_; }
    bool contains(const std::string& host) const;
    const LinkSpec& default_link() const { return default_link_; }
    void set_default_link(LinkSpec spec);

private:
    std::vector<std::string> hosts_;
    std::map<std::pair<std::string, std::string>, LinkSpec> links_;
    LinkSpec default_link_{1.0, 1e8};
};

/// Topology hosts sharing the first `mask` bits with `gateway`, ascending by
/// numeric address, `caller` excluded. Hosts that do not parse as IPv4 are
/// skipped.
std::vector<std::string> scan_subnet(const std::string& gateway, int mask, const Topology& topo,
                                     const std::string& caller = {});

// ---------------------------------------------------------------------------
// Transport contract shared by the simulated and TCP implementations.
// ---------------------------------------------------------------------------

using TimerId = std::uint64_t;

class Transport {
public:
    using Handler = std::function<void(const MessageEnvelope&)>;

    virtual ~Transport() = default;

    virtual void bind(const Address& addr, Handler handler) = 0;
    virtual void unbind(const Address& addr) = 0;
    virtual bool is_bound(const Address& addr) const = 0;

    /// Stamps sent_at with now() and queues the frame. Messages between the
    /// same ordered host pair arrive in send order. Frames addressed to an
    /// unbound endpoint are dropped and counted.
    virtual void send(MessageEnvelope env) = 0;

    virtual TimeMs now() const = 0;

    /// Runs `fn` after `delay` ms on the event loop. Background timers do not
    /// keep the loop alive for deadlock detection.
    virtual TimerId schedule(TimeMs delay, std::function<void()> fn, bool background = false) = 0;
    virtual void cancel(TimerId id) = 0;

    /// Processes events until `done()` holds, nothing but background work is
    /// left, or time passes `limit`. Returns done().
    virtual bool run_until(const std::function<bool()>& done, TimeMs limit) = 0;

    virtual std::uint64_t delivered_count() const = 0;
    virtual std::uint64_t dropped_count() const = 0;
};

class Undeliverable : public Error {
public:
    using Error::Error;
};

/// Deterministic discrete-event network. Single-threaded.
class SimNetwork final : public Transport {
public:
    explicit SimNetwork(Topology topo);

    void bind(const Address& addr, Handler handler) override;
    void unbind(const Address& addr) override;
    bool is_bound(const Address& addr) const override;
    void send(MessageEnvelope env) override;
    TimeMs now() const override { return now_; }
    TimerId schedule(TimeMs delay, std::function<void()> fn, bool background = false) override;
    void cancel(TimerId id) override;
    bool run_until(const std::function<bool()>& done, TimeMs limit) override;
    std::uint64_t delivered_count() const override { return delivered_; }
    std::uint64_t dropped_count() const override { return dropped_; }

    /// Arrival time the network assigns to `env` if sent now; also advances
    /// the per-pair FIFO watermark, so call once per sent frame.
    TimeMs deliver(const MessageEnvelope& env, std::uint64_t wire_bytes);

    /// Runs a single event. Returns false when the queue is empty.
    bool step();
    /// Runs every event due at or before `t`, background ones included, then
    /// sets the clock to `t`.
    void advance_to(TimeMs t);
    /// True when only background events remain.
    bool idle() const { return foreground_pending_ == 0; }
    std::size_t pending_events() const { return queue_.size(); }

    const Topology& topology() const { return topo_; }

private:
    struct Event {
        TimeMs at;
        std::uint64_t seq;
        TimerId id;
        bool background;
        std::function<void()> fn;
    };
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    TimerId push(TimeMs at, std::function<void()> fn, bool background);

    Topology topo_;
    TimeMs now_ = 0.0;
    std::uint64_t seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::set<TimerId> cancelled_;
    std::size_t foreground_pending_ = 0;
    std::map<Address, Handler> endpoints_;
    std::map<std::pair<std::string, std::string>, TimeMs> fifo_watermark_;
    std::uint64_t delivered_ = 0;
    std::uint64_t dropped_ = 0;
};

}  // namespace fogbus
