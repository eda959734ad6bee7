#include "fogbus/discovery.hpp"

#include <algorithm>

namespace fogbus {

namespace {
// Upper bound on a Probe / ProbeReply frame, for the timeout bound.
constexpr std::uint64_t kProbeFrameBytes = 1024;
}  // namespace

void DiscoveryConfig::validate() const {
    if (!(interval_ms > 0.0)) throw InvalidArgument("discovery interval_ms must be positive");
    if (net_mask < 0 || net_mask > 32) throw InvalidArgument("discovery net_mask must be in 0..32");
    if (!parse_ipv4(net_gateway)) throw InvalidArgument("discovery net_gateway is not an IPv4 address");
    if (probe_ports.empty()) throw InvalidArgument("discovery needs at least one probe port");
    if (grace_ms < 0.0) throw InvalidArgument("discovery grace_ms must be non-negative");
}

Discovery::Discovery(Address self, DiscoveryConfig cfg) : self_(std::move(self)), cfg_(std::move(cfg)) {
    cfg_.validate();
}

TimeMs Discovery::round_timeout(const Topology& topo, const std::vector<std::string>& hosts) const {
    TimeMs rtt = 0.0;
    for (const auto& h : hosts) {
        const LinkSpec s = topo.spec(self_.host, h);
        rtt = std::max(rtt, 2.0 * s.transfer_ms(kProbeFrameBytes));
    }
    return 2.0 * rtt + cfg_.grace_ms;
}

std::vector<Outbound> Discovery::tick(TimeMs now, const Topology& topo,
                                      const std::function<bool(const Address&)>& registered) {
    std::vector<Outbound> out;
    if (now - state_.prev_ad_ts < cfg_.interval_ms) return out;
    if (open_) out = close(registered);
    state_.prev_ad_ts = now;
    ++state_.scans;
    open_ = true;
    new_actrs_.clear();
    const auto hosts = scan_subnet(cfg_.net_gateway, cfg_.net_mask, topo, self_.host);
    last_timeout_ = round_timeout(topo, hosts);
    for (const auto& h : hosts) {
        for (std::uint16_t port : cfg_.probe_ports) out.push_back(Outbound{Address{h, port}, Probe{}});
    }
    // Other endpoints on the Master's own host.
    for (std::uint16_t port : cfg_.probe_ports) {
        Address local{self_.host, port};
        if (local != self_) out.push_back(Outbound{local, Probe{}});
    }
    return out;
}

void Discovery::on_reply(const Address& from, const ProbeReply& reply) {
    if (from == self_) return;
    if (reply.kind == ComponentKind::Master) {
        state_.known_masters.insert(from);
        for (const auto& a : reply.actors) new_actrs_.insert(a);
    } else if (reply.kind == ComponentKind::Actor) {
        new_actrs_.insert(from);
    }
    if (!open_) {
        // Late reply: still learn from it, advertising waits for the next round.
        for (const auto& a : new_actrs_) state_.known_actor_addrs.insert(a);
    }
}

std::vector<Outbound> Discovery::close(const std::function<bool(const Address&)>& registered) {
    std::vector<Outbound> out;
    if (!open_) return out;
    open_ = false;
    for (const auto& a : new_actrs_) {
        state_.known_actor_addrs.insert(a);
        if (!registered(a)) out.push_back(Outbound{a, AdvertiseMaster{self_}});
    }
    new_actrs_.clear();
    return out;
}

ProbeReply on_probe(ComponentKind kind, const std::vector<Address>& registered_actors) {
    ProbeReply r;
    r.kind = kind;
    if (kind == ComponentKind::Master) r.actors = registered_actors;
    return r;
}

}  // namespace fogbus
