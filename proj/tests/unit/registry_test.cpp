#include <set>

#include "doctest.h"
#include "fogbus/registry.hpp"

using namespace fogbus;

namespace {

const Address kMaster{"10.0.0.1", 5000};

RegisterActor reg(const std::string& host) {
    HostProfile p;
    p.host = host;
    return RegisterActor{p, {kAnyImage}};
}

}  // namespace

TEST_SUITE("registry") {

TEST_CASE("first registration gets the base serial") {
    Registry r(kMaster);
    CHECK(r.register_actor(Address{"10.0.0.2", 5001}, reg("10.0.0.2"), 0.0).serial == 0);
    Registry based(kMaster, 100);
    const ComponentId id = based.register_actor(Address{"10.0.0.2", 5001}, reg("10.0.0.2"), 0.0);
    CHECK(id.serial == 100);
    CHECK(id.origin == kMaster);
    CHECK(id.kind == ComponentKind::Actor);
}

TEST_CASE("re-registration is idempotent and refreshes the record") {
    Registry r(kMaster);
    const Address a{"10.0.0.2", 5001};
    const ComponentId first = r.register_actor(a, reg("10.0.0.2"), 0.0);
    RegisterActor again = reg("10.0.0.2");
    again.profile.cpu_util = 0.5;
    CHECK(r.register_actor(a, again, 10.0) == first);
    CHECK(r.actor_count() == 1);
    CHECK(r.actor_at(a)->profile.cpu_util == 0.5);
    CHECK(r.actor_at(a)->last_seen == 10.0);
}

TEST_CASE("k distinct registrations give serials 0..k-1") {
    Registry r(kMaster);
    std::set<std::uint64_t> serials;
    for (int i = 0; i < 20; ++i) {
        const std::string h = "10.0.0." + std::to_string(2 + i);
        if (i % 2 == 0) serials.insert(r.register_actor(Address{h, 5001}, reg(h), 0.0).serial);
        else serials.insert(r.register_user(Address{h, 6000}, RegisterUser{"GameOfLife", Address{h, 6000}}).serial);
    }
    CHECK(serials.size() == 20);
    CHECK(*serials.begin() == 0);
    CHECK(*serials.rbegin() == 19);
    CHECK(r.issue(ComponentKind::TaskExecutor).serial == 20);
}

TEST_CASE("same address, different kind gets a different id") {
    Registry r(kMaster);
    const Address a{"10.0.0.2", 5001};
    const ComponentId actor = r.register_actor(a, reg("10.0.0.2"), 0.0);
    const ComponentId user = r.register_user(a, RegisterUser{"VOCR", a});
    CHECK(actor != user);
}

TEST_CASE("stale actors drop out of the live set") {
    Registry r(kMaster);
    r.register_actor(Address{"10.0.0.2", 5001}, reg("10.0.0.2"), 0.0);
    r.register_actor(Address{"10.0.0.3", 5001}, reg("10.0.0.3"), 2500.0);
    CHECK(r.live_actors(3000.0, 3000.0).size() == 2);
    CHECK(r.live_actors(3500.0, 3000.0).size() == 1);
    CHECK(r.actor_on_host("10.0.0.3") != nullptr);
    CHECK(r.actor_on_host("10.0.0.9") == nullptr);
}

TEST_CASE("actors listed by serial") {
    Registry r(kMaster);
    r.register_actor(Address{"10.0.0.9", 5001}, reg("10.0.0.9"), 0.0);
    r.register_actor(Address{"10.0.0.2", 5001}, reg("10.0.0.2"), 0.0);
    const auto list = r.actors();
    REQUIRE(list.size() == 2);
    CHECK(list[0]->addr.host == "10.0.0.9");
    CHECK(list[1]->addr.host == "10.0.0.2");
}

TEST_CASE("readiness completes exactly once") {
    ReadinessTracker t(RequestId{kMaster, 1}, {"A", "B"});
    CHECK(t.on_ready("A") == ReadyOutcome::Pending);
    CHECK(t.on_ready("A") == ReadyOutcome::Duplicate);
    CHECK(t.ready() == std::set<std::string>{"A"});
    CHECK(t.on_ready("Z") == ReadyOutcome::UnknownTask);
    CHECK(t.ready() == std::set<std::string>{"A"});
    CHECK(t.on_ready("B") == ReadyOutcome::Completed);
    CHECK(t.complete());
    CHECK(t.on_ready("B") == ReadyOutcome::AlreadyComplete);
}

TEST_CASE("game of life completes after 62 distinct tasks") {
    std::set<std::string> tasks;
    for (int l = 0; l < 31; ++l) {
        tasks.insert("rect_" + std::to_string(l) + "_0");
        tasks.insert("rect_" + std::to_string(l) + "_1");
    }
    ReadinessTracker t(RequestId{kMaster, 2}, tasks);
    std::size_t completed = 0, n = 0;
    for (const auto& name : tasks) {
        ++n;
        if (t.on_ready(name) == ReadyOutcome::Completed) {
            ++completed;
            CHECK(n == 62);
        }
        t.on_ready(name);
    }
    CHECK(completed == 1);
}

TEST_CASE("request queue is FIFO") {
    RequestQueue q;
    for (std::uint64_t i = 0; i < 5; ++i) q.push(QueuedRequest{RequestId{kMaster, i}, {}, "a", 1.0, 1.0});
    for (std::uint64_t i = 0; i < 5; ++i) CHECK(q.pop()->request_id.serial == i);
    CHECK_FALSE(q.pop());
}

}
