#include "fogbus/registry.hpp"

#include <algorithm>

namespace fogbus {

ComponentId Registry::issue(ComponentKind kind) {
    return ComponentId{kind, next_serial_++, self_};
}

ComponentId Registry::register_actor(const Address& addr, const RegisterActor& msg, TimeMs now) {
    auto key = std::make_pair(addr, ComponentKind::Actor);
    auto it = ids_.find(key);
    if (it == ids_.end()) it = ids_.emplace(key, issue(ComponentKind::Actor)).first;
    RegisteredActor& a = actors_[addr];
    a.id = it->second;
    a.addr = addr;
    a.profile = msg.profile;
    a.images = std::set<std::string>(msg.images.begin(), msg.images.end());
    a.last_seen = now;
    return a.id;
}

ComponentId Registry::register_user(const Address& addr, const RegisterUser& msg) {
    auto key = std::make_pair(addr, ComponentKind::User);
    auto it = ids_.find(key);
    if (it == ids_.end()) it = ids_.emplace(key, issue(ComponentKind::User)).first;
    users_[addr] = RegisteredUser{it->second, addr, msg.app};
    return it->second;
}

std::vector<const RegisteredActor*> Registry::actors() const {
    std::vector<const RegisteredActor*> out;
    out.reserve(actors_.size());
    for (const auto& [_, a] : actors_) out.push_back(&a);
    std::sort(out.begin(), out.end(), [](auto* x, auto* y) { return x->id.serial < y->id.serial; });
    return out;
}

std::vector<const RegisteredActor*> Registry::live_actors(TimeMs now, TimeMs stale_after_ms) const {
    auto all = actors();
    std::erase_if(all, [&](const RegisteredActor* a) { return now - a->last_seen > stale_after_ms; });
    return all;
}

const RegisteredActor* Registry::actor_at(const Address& addr) const {
    auto it = actors_.find(addr);
    return it == actors_.end() ? nullptr : &it->second;
}

const RegisteredActor* Registry::actor_on_host(const std::string& host) const {
    for (const auto& [addr, a] : actors_) {
        if (addr.host == host) return &a;
    }
    return nullptr;
}

const RegisteredUser* Registry::user_at(const Address& addr) const {
    auto it = users_.find(addr);
    return it == users_.end() ? nullptr : &it->second;
}

ReadyOutcome ReadinessTracker::on_ready(const std::string& task) {
    if (!expected_.count(task)) return ReadyOutcome::UnknownTask;
    if (emitted_) return ReadyOutcome::AlreadyComplete;
    if (!ready_.insert(task).second) return ReadyOutcome::Duplicate;
    if (ready_.size() == expected_.size()) {
        emitted_ = true;
        return ReadyOutcome::Completed;
    }
    return ReadyOutcome::Pending;
}

std::optional<QueuedRequest> RequestQueue::pop() {
    if (queue_.empty()) return std::nullopt;
    QueuedRequest r = std::move(queue_.front());
    queue_.pop_front();
    return r;
}

}  // namespace fogbus
