#include "fogbus/netsim.hpp"

#include <algorithm>
#include <cmath>

namespace fogbus {

namespace {

std::pair<std::string, std::string> ordered(const std::string& a, const std::string& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

void check_link(const LinkSpec& spec) {
    if (!(spec.latency_ms >= 0.0) || !std::isfinite(spec.latency_ms)) {
        throw InvalidArgument("link latency_ms must be finite and >= 0");
    }
    if (!(spec.data_rate_bps > 0.0)) throw InvalidArgument("link data_rate_bps must be > 0");
}

}  // namespace

void Topology::add_host(const std::string& host) {
    if (!contains(host)) hosts_.push_back(host);
}

bool Topology::contains(const std::string& host) const {
    return std::find(hosts_.begin(), hosts_.end(), host) != hosts_.end();
}

void Topology::set_link(const std::string& a, const std::string& b, LinkSpec spec) {
    check_link(spec);
    if (a == b) throw InvalidArgument("self links are fixed at zero cost");
    links_[ordered(a, b)] = spec;
}

void Topology::set_default_link(LinkSpec spec) {
    check_link(spec);
    default_link_ = spec;
}

LinkSpec Topology::spec(const std::string& a, const std::string& b) const {
    if (a == b) return kSelfLink;
    auto it = links_.find(ordered(a, b));
    return it == links_.end() ? default_link_ : it->second;
}

bool Topology::has_explicit_link(const std::string& a, const std::string& b) const {
    return links_.count(ordered(a, b)) > 0;
}

std::vector<std::string> scan_subnet(const std::string& gateway, int mask, const Topology& topo,
                                     const std::string& caller) {
    if (mask < 0 || mask > 32) throw InvalidArgument("subnet mask must be in 0..32");
    const auto gw = parse_ipv4(gateway);
    if (!gw) throw InvalidArgument("gateway is not an IPv4 address: " + gateway);
    const std::uint32_t bits = mask == 0 ? 0u : (~std::uint32_t{0} << (32 - mask));
    std::vector<std::pair<std::uint32_t, std::string>> found;
    for (const auto& host : topo.hosts()) {
        if (host == caller) continue;
        const auto ip = parse_ipv4(host);
        if (!ip) continue;
        if ((*ip & bits) == (*gw & bits)) found.emplace_back(*ip, host);
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    out.reserve(found.size());
    for (auto& [_, h] : found) out.push_back(std::move(h));
    return out;
}

// ---------------------------------------------------------------------------

SimNetwork::SimNetwork(Topology topo) : topo_(std::move(topo)) {}

void SimNetwork::bind(const Address& addr, Handler handler) { endpoints_[addr] = std::move(handler); }

void SimNetwork::unbind(const Address& addr) { endpoints_.erase(addr); }

bool SimNetwork::is_bound(const Address& addr) const { return endpoints_.count(addr) > 0; }

TimeMs SimNetwork::deliver(const MessageEnvelope& env, std::uint64_t wire_bytes) {
    const LinkSpec link = topo_.spec(env.source.host, env.destination.host);
    TimeMs arrival = env.source.host == env.destination.host ? now_ : now_ + link.transfer_ms(wire_bytes);
    auto& watermark = fifo_watermark_[{env.source.host, env.destination.host}];
    arrival = std::max(arrival, watermark);
    watermark = arrival;
    return arrival;
}

void SimNetwork::send(MessageEnvelope env) {
    env.sent_at = now_;
    // Every frame goes through the codec so the simulator exercises the
    // same byte format as the TCP transport.
    const Bytes frame = encode(env);
    const TimeMs arrival = deliver(env, wire_size(env, frame.size()));
    push(arrival,
         [this, frame = std::move(frame)]() {
             MessageEnvelope msg = decode(frame);
             auto it = endpoints_.find(msg.destination);
             if (it == endpoints_.end()) {
                 ++dropped_;
                 return;
             }
             ++delivered_;
             // Copy: the handler may rebind this endpoint.
             Handler handler = it->second;
             handler(msg);
         },
         false);
}

TimerId SimNetwork::push(TimeMs at, std::function<void()> fn, bool background) {
    const TimerId id = ++seq_;
    queue_.push(Event{at, id, id, background, std::move(fn)});
    if (!background) ++foreground_pending_;
    return id;
}

TimerId SimNetwork::schedule(TimeMs delay, std::function<void()> fn, bool background) {
    return push(now_ + std::max(0.0, delay), std::move(fn), background);
}

void SimNetwork::cancel(TimerId id) { cancelled_.insert(id); }

bool SimNetwork::step() {
    while (!queue_.empty()) {
        // top() is const only to protect the heap order, which pop() discards.
        Event ev = std::move(const_cast<Event&>(queue_.top()));
        queue_.pop();
        if (!ev.background) --foreground_pending_;
        if (auto it = cancelled_.find(ev.id); it != cancelled_.end()) {
            cancelled_.erase(it);
            continue;
        }
        now_ = std::max(now_, ev.at);
        ev.fn();
        return true;
    }
    return false;
}

void SimNetwork::advance_to(TimeMs t) {
    while (!queue_.empty() && queue_.top().at <= t) step();
    now_ = std::max(now_, t);
}

bool SimNetwork::run_until(const std::function<bool()>& done, TimeMs limit) {
    while (!done()) {
        if (queue_.empty() || idle()) return done();
        if (queue_.top().at > limit) return done();
        step();
    }
    return true;
}

}  // namespace fogbus
