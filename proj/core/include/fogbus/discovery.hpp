#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "fogbus/netsim.hpp"
#include "fogbus/protocol.hpp"

namespace fogbus {

struct DiscoveryConfig {
    TimeMs interval_ms = 5000.0;
    std::string net_gateway = "10.0.0.1";
    int net_mask = 24;
    /// Ports probed on every subnet host (Master and Actor endpoints).
    std::vector<std::uint16_t> probe_ports{5000, 5001};
    /// Added to the round-trip bound before a silent host is skipped.
    TimeMs grace_ms = 5.0;

    void validate() const;  // throws InvalidArgument
};

struct DiscoveryState {
    TimeMs prev_ad_ts = -std::numeric_limits<double>::infinity();
    std::set<Address> known_masters;
    std::set<Address> known_actor_addrs;
    std::uint64_t scans = 0;
};

struct Outbound {
    Address to;
    MessagePayload payload;
};

/// Periodic subnet scan of one Master. A round probes every subnet host,
/// collects replies until its timeout and then advertises the Master to every
/// discovered actor that is not yet registered with it.
class Discovery {
public:
    Discovery(Address self, DiscoveryConfig cfg);

    /// Opens a round when at least interval_ms passed since the last one.
    /// Returns the probes to send (empty when gated). A still-open round is
    /// closed first through `close`, whose advertisements are appended.
    std::vector<Outbound> tick(TimeMs now, const Topology& topo,
                               const std::function<bool(const Address&)>& registered);

    void on_reply(const Address& from, const ProbeReply& reply);

    /// Ends the open round: merges what was learned and returns
    /// AdvertiseMaster for every new actor `registered` does not know.
    std::vector<Outbound> close(const std::function<bool(const Address&)>& registered);

    bool round_open() const { return open_; }
    /// Reply deadline of a round over `hosts`: twice the largest round trip
    /// plus grace.
    TimeMs round_timeout(const Topology& topo, const std::vector<std::string>& hosts) const;
    TimeMs last_round_timeout() const { return last_timeout_; }

    const DiscoveryState& state() const { return state_; }
    const DiscoveryConfig& config() const { return cfg_; }
    /// Actors learned from peers or own registry, for reporting.
    void note_registered(const Address& actor) { state_.known_actor_addrs.insert(actor); }

private:
    Address self_;
    DiscoveryConfig cfg_;
    DiscoveryState state_;
    bool open_ = false;
    std::set<Address> new_actrs_;
    TimeMs last_timeout_ = 0.0;
};

/// Reply a component gives to a Probe; Masters list their actors.
ProbeReply on_probe(ComponentKind kind, const std::vector<Address>& registered_actors = {});

}  // namespace fogbus
