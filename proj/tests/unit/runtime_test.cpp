#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "doctest.h"
#include "fogbus/components.hpp"
#include "fogbus/experiments.hpp"
#include "fogbus/scenario.hpp"

using namespace fogbus;

namespace {

constexpr ExecutorPhase kPhases[] = {ExecutorPhase::Initializing, ExecutorPhase::Connecting,
                                     ExecutorPhase::Ready,        ExecutorPhase::Running,
                                     ExecutorPhase::CoolingOff,   ExecutorPhase::Terminated};

// One task, 100 work units, 1000 bytes out; entry and exit.
AppSpec one_task_app() {
    AppSpec a;
    a.app_name = "one";
    a.tasks = {TaskSpec{"T", 100.0, 1000}};
    a.entry_tasks = {"T"};
    a.exit_tasks = {"T"};
    return a;
}

// Actor at 10.0.0.2 (4 x 2.5, rate 10) driven by scripted master and user
// endpoints that record everything they receive.
struct ActorRig {
    Topology topo{LinkSpec{1.0, 1e12}};
    std::unique_ptr<SimNetwork> net;
    AppCatalog apps;
    EventCounters counters;
    std::unique_ptr<HostMachine> machine;
    std::unique_ptr<Actor> actor;
    std::vector<std::unique_ptr<HostMachine>> spawned_hosts;
    std::vector<std::unique_ptr<Master>> spawned;
    const Address self{"10.0.0.2", kActorPort};
    const Address master{"10.0.0.3", kMasterPort};
    const Address user{"10.0.0.4", kUserPortBase};
    const Address logger{"10.0.0.3", kLoggerPort};
    std::vector<std::pair<TimeMs, MessageEnvelope>> at_master;
    std::vector<std::pair<TimeMs, MessageEnvelope>> at_user;

    explicit ActorRig(bool with_spawner = false, RuntimeParams rt = {}) {
        for (const char* h : {"10.0.0.2", "10.0.0.3", "10.0.0.4"}) topo.add_host(h);
        net = std::make_unique<SimNetwork>(topo);
        apps = AppCatalog::builtin();
        apps.add(one_task_app());
        HostSpec spec;
        spec.host = self.host;
        spec.cpu_cores = 4;
        spec.cpu_freq_ghz = 2.5;
        machine = std::make_unique<HostMachine>(spec, *net);
        ActorConfig cfg;
        cfg.masters = {master};
        cfg.logger = logger;
        cfg.runtime = rt;
        MasterSpawner spawner;
        if (with_spawner) {
            spawner = [this](const std::string& host, const Address& parent) -> Master& {
                HostSpec s;
                s.host = host;
                spawned_hosts.push_back(std::make_unique<HostMachine>(s, *net));
                MasterConfig mcfg;
                mcfg.logger = logger;
                mcfg.discovery_enabled = false;
                spawned.push_back(std::make_unique<Master>(*net, *spawned_hosts.back(), apps, topo,
                                                           Address{host, kMasterPort}, mcfg, counters, parent));
                return *spawned.back();
            };
        }
        actor = std::make_unique<Actor>(*net, *machine, apps, topo, self, cfg, counters, spawner);
        net->bind(master, [this](const MessageEnvelope& e) { at_master.emplace_back(net->now(), e); });
        net->bind(user, [this](const MessageEnvelope& e) { at_user.emplace_back(net->now(), e); });
        net->bind(logger, [](const MessageEnvelope&) {});
        actor->start();
    }

    void send(const Address& from, MessagePayload p) {
        MessageEnvelope env;
        env.source = from;
        env.destination = self;
        env.payload = std::move(p);
        net->send(std::move(env));
    }

    RequestId rid(std::uint64_t serial) const { return RequestId{master, serial}; }

    void init(std::uint64_t serial) { send(master, InitTaskExecutor{rid(serial), "one", "T", {}, user}); }
    void reuse(std::uint64_t serial) { send(master, ReuseTaskExecutor{rid(serial), "one", "T", {}, user}); }
    void frame(std::uint64_t serial, std::uint64_t seq = 0) {
        send(user, Data{rid(serial), "T", "", seq, 500, {}});
    }
    void done(std::uint64_t serial) { send(user, RequestDone{rid(serial)}); }

    template <typename T>
    std::vector<std::pair<TimeMs, T>> got(const std::vector<std::pair<TimeMs, MessageEnvelope>>& box) const {
        std::vector<std::pair<TimeMs, T>> out;
        for (const auto& [t, e] : box) {
            if (const auto* m = std::get_if<T>(&e.payload)) out.emplace_back(t, *m);
        }
        return out;
    }

    const ExecutorState& only_executor() const {
        REQUIRE(actor->executors().size() == 1);
        return actor->executors().begin()->second;
    }
};

ScenarioConfig single_host_scenario() {
    ScenarioConfig c;
    c.name = "single";
    c.seed = 1;
    HostSpec h;
    h.host = "10.0.0.2";
    h.cpu_cores = 4;
    h.cpu_freq_ghz = 2.5;
    c.hosts = {h};
    c.links = {LinkEntry{"10.0.0.2", "10.0.1.2", LinkSpec{50.0, 1e12}}};
    c.masters = {"10.0.0.2"};
    c.actors = {ActorEntry{"10.0.0.2", {}, {kAnyImage}}};
    c.remote_logger = "10.0.0.2";
    c.apps = {one_task_app()};
    UserEntry u;
    u.host = "10.0.1.2";
    u.config.app = "one";
    u.config.frame_count = 3;
    u.config.frame_interval_ms = 1000.0;
    u.config.frame_size_bytes = 1000;
    u.config.start_at = 5000.0;
    c.users = {u};
    c.time_limit_ms = 600000.0;
    return c;
}

}  // namespace

TEST_SUITE("actor") {

TEST_CASE("legal transition table") {
    using P = ExecutorPhase;
    const std::set<std::pair<P, P>> allowed{{P::Initializing, P::Connecting}, {P::Connecting, P::Ready},
                                            {P::Ready, P::Running},           {P::Running, P::CoolingOff},
                                            {P::CoolingOff, P::Connecting},   {P::CoolingOff, P::Terminated}};
    for (P from : kPhases) {
        for (P to : kPhases) {
            CAPTURE(to_string(from));
            CAPTURE(to_string(to));
            CHECK(legal_transition(from, to) == (allowed.count({from, to}) > 0));
        }
    }
}

TEST_CASE("cold start: ready after start-up, result after compute") {
    ActorRig rig;
    rig.init(1);
    rig.net->advance_to(1000.0);
    CHECK(rig.only_executor().phase == ExecutorPhase::Initializing);
    rig.net->advance_to(3000.0);
    const auto ready = rig.got<ExecutorReady>(rig.at_master);
    REQUIRE(ready.size() == 1);
    CHECK(ready[0].second.request_id == rig.rid(1));
    // 1 ms to the actor, 1500 ms start-up, 1 ms back.
    CHECK(ready[0].first == doctest::Approx(1502.0).epsilon(1e-6));
    CHECK(rig.only_executor().phase == ExecutorPhase::Ready);

    rig.frame(1);
    rig.net->advance_to(4000.0);
    const auto results = rig.got<Result>(rig.at_user);
    REQUIRE(results.size() == 1);
    // 1 ms in, 100 / 10 ms compute, 1 ms out.
    CHECK(results[0].first == doctest::Approx(3012.0).epsilon(1e-6));
    CHECK(results[0].second.size_bytes == 1000);
    CHECK(rig.only_executor().phase == ExecutorPhase::Running);
    CHECK(rig.counters.protocol_errors == 0);
}

TEST_CASE("request done enters cooling-off and expires at exactly t + cool_off") {
    RuntimeParams rt;
    rt.cool_off_ms = 4000.0;
    ActorRig rig(false, rt);
    rig.init(1);
    rig.net->advance_to(2000.0);
    rig.frame(1);
    rig.net->advance_to(2500.0);
    rig.done(1);
    rig.net->advance_to(2600.0);
    const ExecutorState& ex = rig.only_executor();
    CHECK(ex.phase == ExecutorPhase::CoolingOff);
    REQUIRE(ex.cool_off_deadline);
    const TimeMs deadline = *ex.cool_off_deadline;
    CHECK(deadline == doctest::Approx(2501.0 + 4000.0).epsilon(1e-9));
    CHECK(ex.requests_served == 1);
    CHECK(rig.actor->pool_size("one", "T") == 1);

    rig.net->advance_to(std::nextafter(deadline, 0.0));
    CHECK(rig.only_executor().phase == ExecutorPhase::CoolingOff);
    rig.net->advance_to(deadline);
    CHECK(rig.only_executor().phase == ExecutorPhase::Terminated);
    CHECK(rig.only_executor().terminated_at == deadline);
    CHECK(rig.actor->pool_size("one", "T") == 0);
}

TEST_CASE("reuse skips start-up and keeps the executor") {
    ActorRig rig;
    rig.init(1);
    rig.net->advance_to(2000.0);
    rig.frame(1);
    rig.net->advance_to(2100.0);
    rig.done(1);
    rig.net->advance_to(3000.0);
    const std::uint64_t serial = rig.only_executor().id.serial;

    rig.reuse(2);
    rig.net->advance_to(3100.0);
    const auto ready = rig.got<ExecutorReady>(rig.at_master);
    REQUIRE(ready.size() == 2);
    CHECK(ready[1].second.request_id == rig.rid(2));
    CHECK(ready[1].first == doctest::Approx(3002.0).epsilon(1e-6));
    const ExecutorState& ex = rig.only_executor();
    CHECK(ex.id.serial == serial);
    CHECK(ex.phase == ExecutorPhase::Ready);
    CHECK_FALSE(ex.cool_off_deadline);
    CHECK(rig.actor->pool_size("one", "T") == 0);

    // The expiry of the first cooling-off period no longer applies.
    rig.net->advance_to(60000.0);
    CHECK(rig.only_executor().phase == ExecutorPhase::Ready);
}

TEST_CASE("pool hands out the longest-idle executor first") {
    ActorRig rig;
    rig.init(1);
    rig.init(2);
    rig.net->advance_to(2000.0);
    rig.frame(1);
    rig.frame(2);
    rig.net->advance_to(2100.0);
    rig.done(2);
    rig.net->advance_to(2200.0);
    rig.done(1);
    rig.net->advance_to(2300.0);
    CHECK(rig.actor->pool_size("one", "T") == 2);

    std::uint64_t first_cooled = 0;
    for (const auto& [id, ex] : rig.actor->executors()) {
        if (*ex.cool_off_deadline < 2200.0 + 30000.0) first_cooled = id;
    }
    rig.reuse(3);
    rig.net->advance_to(2400.0);
    const auto& ex = rig.actor->executors().at(first_cooled);
    REQUIRE(ex.request_id);
    CHECK(*ex.request_id == rig.rid(3));
    CHECK(rig.actor->pool_size("one", "T") == 1);
}

TEST_CASE("reuse with an empty pool falls back to a cold start") {
    ActorRig rig;
    rig.reuse(1);
    rig.net->advance_to(3000.0);
    CHECK(rig.counters.reuse_races == 1);
    CHECK(rig.actor->executors().size() == 1);
    const auto ready = rig.got<ExecutorReady>(rig.at_master);
    REQUIRE(ready.size() == 1);
    CHECK(ready[0].first == doctest::Approx(1502.0).epsilon(1e-6));
}

TEST_CASE("protocol misuse is counted, not fatal") {
    ActorRig rig;
    rig.frame(9);  // unknown request
    rig.send(rig.master, InitTaskExecutor{rig.rid(1), "nope", "T", {}, rig.user});
    rig.send(rig.master, InitTaskExecutor{rig.rid(1), "one", "missing", {}, rig.user});
    rig.net->advance_to(100.0);
    CHECK(rig.counters.protocol_errors == 3);
    rig.init(2);
    rig.net->advance_to(2000.0);
    rig.done(2);  // Ready, never ran
    rig.net->advance_to(2100.0);
    CHECK(rig.counters.protocol_errors == 4);
    CHECK(rig.only_executor().phase == ExecutorPhase::Ready);
}

TEST_CASE("probe, advertisement and periodic registration") {
    ActorRig rig;
    rig.send(rig.master, Probe{});
    rig.net->advance_to(10.0);
    const auto replies = rig.got<ProbeReply>(rig.at_master);
    REQUIRE(replies.size() == 1);
    CHECK(replies[0].second.kind == ComponentKind::Actor);

    const std::size_t before = rig.got<RegisterActor>(rig.at_master).size();
    rig.net->advance_to(3500.0);
    // start() registers at 0, then every profile period.
    CHECK(rig.got<RegisterActor>(rig.at_master).size() == before + 3);

    const Address other{"10.0.0.4", kMasterPort};
    std::size_t registrations = 0;
    rig.net->bind(other, [&](const MessageEnvelope& e) {
        if (std::holds_alternative<RegisterActor>(e.payload)) ++registrations;
    });
    rig.send(other, AdvertiseMaster{other});
    rig.net->advance_to(3600.0);
    CHECK(registrations == 1);
    CHECK(rig.actor->masters().size() == 2);
    rig.send(other, AdvertiseMaster{other});
    rig.net->advance_to(3700.0);
    CHECK(rig.actor->masters().size() == 2);
}

TEST_CASE("InitNewMaster on a host running a master only re-advertises") {
    ActorRig rig;
    const Address hosted{"10.0.0.2", kMasterPort};
    rig.actor->set_hosted_master(hosted);
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.net->advance_to(100.0);
    const auto ads = rig.got<AdvertiseMaster>(rig.at_master);
    REQUIRE(ads.size() == 2);
    CHECK(ads[0].second.master == hosted);
    CHECK(rig.counters.protocol_errors == 0);
}

TEST_CASE("InitNewMaster spawns once") {
    ActorRig rig(true);
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.net->advance_to(100.0);
    CHECK(rig.spawned.size() == 1);
    REQUIRE(rig.actor->hosted_master());
    CHECK(*rig.actor->hosted_master() == Address{"10.0.0.2", kMasterPort});
    CHECK(rig.got<AdvertiseMaster>(rig.at_master).empty());
    rig.net->advance_to(2000.0);
    CHECK(rig.spawned[0]->started());
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.net->advance_to(2100.0);
    CHECK(rig.spawned.size() == 1);
    CHECK(rig.got<AdvertiseMaster>(rig.at_master).size() >= 1);
}

TEST_CASE("InitNewMaster without a spawner is a protocol error") {
    ActorRig rig;
    rig.send(rig.master, InitNewMaster{rig.master});
    rig.net->advance_to(100.0);
    CHECK(rig.counters.protocol_errors == 1);
    CHECK_FALSE(rig.actor->hosted_master());
}

}  // TEST_SUITE

TEST_SUITE("user") {

TEST_CASE("single-task response has the closed form") {
    const MetricsReport r = run_scenario(single_host_scenario());
    REQUIRE(r.requests.size() == 1);
    const RequestMetrics& m = r.requests[0];
    CHECK(m.outcome == Outcome::Completed);
    CHECK_FALSE(m.timed_out);
    REQUIRE(m.response_ms.size() == 3);
    // 50 ms up, 100 / 10 ms compute, 50 ms down; bytes are free at 1e12 bps.
    for (double x : m.response_ms) CHECK(x == doctest::Approx(110.0).epsilon(1e-4));
    REQUIRE(m.sft_ms);
    REQUIRE(m.rrt_ms);
    CHECK(*m.sft_ms > 0.0);
    CHECK(*m.rrt_ms >= *m.sft_ms);
    CHECK(m.sent_at == 5000.0);
}

TEST_CASE("no capable actor: the user is warned") {
    ScenarioConfig c = single_host_scenario();
    c.actors[0].images = {"something-else"};
    const MetricsReport r = run_scenario(c);
    REQUIRE(r.requests.size() == 1);
    CHECK(r.requests[0].outcome == Outcome::Warned);
    CHECK_FALSE(r.requests[0].timed_out);
    CHECK(r.requests[0].response_ms.empty());
    CHECK(r.counters.warned >= 1);
}

TEST_CASE("sequential requests reuse warm executors") {
    const ReuseOutcome r = run_reuse_case("VOCR");
    CHECK(r.warm_cold_starts == 0);
    CHECK(r.warm_reused == 3);
    CHECK(r.warm_rrt_ms < r.cold_rrt_ms);
}

TEST_CASE("forwarded users are served by a sub-master") {
    const ScenarioConfig c = scalability_preset(16, true);
    const std::string root = Address{c.masters.front(), kMasterPort}.str();
    const MetricsReport r = run_scenario(c);
    std::size_t forwarded = 0;
    for (const auto& m : r.requests) {
        CHECK(m.outcome == Outcome::Completed);
        if (m.forwards == 0) continue;
        ++forwarded;
        CHECK(m.served_by != root);
        REQUIRE(m.sft_ms);
        CHECK(*m.rrt_ms >= *m.sft_ms);
    }
    CHECK(forwarded > 0);
    CHECK(r.masters > 1);
}

}  // TEST_SUITE
