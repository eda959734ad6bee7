#include "fogbus/experiments.hpp"

#include <algorithm>
#include <limits>
#include <memory>
#include <set>

#include <fmt/format.h>

#include "fogbus/rng.hpp"

namespace fogbus {

namespace {

constexpr LinkSpec kEdgeLink{2.0, 1e8};
constexpr LinkSpec kWanLink{25.0, 2e7};
constexpr LinkSpec kCloudLink{1.0, 1e9};

HostSpec make_host(const std::string& preset, const std::string& host, double background) {
    HostSpec s = *host_preset(preset, host);
    s.background_util = background;
    return s;
}

bool is_cloud(const HostSpec& h) { return h.cpu_freq_ghz == 2.6; }

/// Edge hosts and user devices share a LAN; cloud instances sit behind a WAN
/// hop and talk to each other over a fast datacenter network.
void wire_links(ScenarioConfig& c, const std::vector<std::string>& user_hosts) {
    c.default_link = kEdgeLink;
    for (std::size_t i = 0; i < c.hosts.size(); ++i) {
        if (!is_cloud(c.hosts[i])) continue;
        for (std::size_t j = 0; j < c.hosts.size(); ++j) {
            if (i == j) continue;
            if (is_cloud(c.hosts[j])) {
                if (j > i) c.links.push_back({c.hosts[i].host, c.hosts[j].host, kCloudLink});
            } else {
                c.links.push_back({c.hosts[i].host, c.hosts[j].host, kWanLink});
            }
        }
        for (const auto& u : user_hosts) c.links.push_back({c.hosts[i].host, u, kWanLink});
    }
}

std::string user_host(std::size_t i) { return fmt::format("10.0.1.{}", 2 + i); }

}  // namespace

CostModel ground_truth_model(const ScenarioConfig& config) {
    CostModel m;
    m.default_link = config.default_link;
    Topology topo(config.default_link);
    for (const auto& h : config.hosts) {
        topo.add_host(h.host);
        HostProfile p;
        p.host = h.host;
        p.cpu_cores = h.cpu_cores;
        p.cpu_freq_ghz = h.cpu_freq_ghz;
        p.cpu_util = h.background_util;
        p.mem_capacity_mb = h.mem_capacity_mb;
        p.mem_util = h.mem_util;
        m.profiles.hosts[h.host] = p;
    }
    for (const auto& u : config.users) topo.add_host(u.host);
    for (const auto& l : config.links) topo.set_link(l.a, l.b, l.spec);
    const auto& hosts = topo.hosts();
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        for (std::size_t j = i + 1; j < hosts.size(); ++j) {
            const LinkSpec s = topo.spec(hosts[i], hosts[j]);
            m.profiles.links[host_pair(hosts[i], hosts[j])] = LinkSample{hosts[i], hosts[j], s.latency_ms, s.data_rate_bps, 1500, 0.0};
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// Scheduling policies
// ---------------------------------------------------------------------------

ScenarioConfig convergence_preset(const std::string& policy, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "convergence";
    c.seed = seed;
    c.policy = policy;
    c.hosts = {
        make_host("Desktop", "10.0.0.2", 0.05),
        make_host("RPi", "10.0.0.3", 0.10),
        make_host("RPi", "10.0.0.4", 0.10),
        make_host("cloud-2c", "10.0.0.5", 0.10),
        make_host("cloud-4c", "10.0.0.6", 0.10),
    };
    const std::string user = user_host(0);
    wire_links(c, {user});
    c.masters = {"10.0.0.2"};
    c.remote_logger = "10.0.0.2";
    for (const auto& h : c.hosts) c.actors.push_back(ActorEntry{h.host, {}, {kAnyImage}});
    UserEntry u;
    u.host = user;
    u.config.app = "GameOfLife";
    u.config.frame_count = 1;
    u.config.start_at = 2000.0;
    u.config.requests = 2;
    u.config.request_gap_ms = 5000.0;
    c.users.push_back(u);
    return c;
}

ConvergenceOutcome run_convergence_case(const std::string& policy, std::uint64_t seed) {
    const ScenarioConfig cfg = convergence_preset(policy, seed);
    const MetricsReport r = run_scenario(cfg);
    if (r.decisions.size() != 2 || r.requests.size() != 2 || r.requests[1].response_ms.empty()) {
        throw Error(fmt::format("convergence run {} seed {} did not complete both requests", policy, seed));
    }
    const DecisionRecord& d = r.decisions.back().record;
    ConvergenceOutcome out;
    out.policy = policy;
    out.seed = seed;
    out.series = d.convergence;
    out.placement = d.host_by_task;
    out.scheduler_estimate_ms = d.estimated_response_ms;
    const AppCatalog apps = AppCatalog::builtin();
    const CostModel model = ground_truth_model(cfg);
    out.model_estimate_ms = estimate_response(apps.get(d.app), out.placement, model,
                                              EstimateInputs{cfg.users[0].host, default_frame_bytes(d.app)});
    out.measured_ms = r.requests[1].response_ms.front();
    return out;
}

std::vector<ConvergenceOutcome> run_convergence_experiment(std::size_t n_seeds,
                                                           const std::vector<std::string>& policies) {
    std::vector<ConvergenceOutcome> out;
    for (const auto& p : policies) {
        for (std::uint64_t s = 1; s <= n_seeds; ++s) out.push_back(run_convergence_case(p, s));
    }
    return out;
}

std::string convergence_experiment_csv(const std::vector<ConvergenceOutcome>& runs) {
    std::string out = "policy,seed,iteration,best_fitness_ms\n";
    for (const auto& r : runs) {
        for (std::size_t i = 0; i < r.series.size(); ++i) {
            out += fmt::format("{},{},{},{}\n", r.policy, r.seed, i, r.series[i]);
        }
    }
    return out;
}

std::string placement_experiment_csv(const std::vector<ConvergenceOutcome>& runs) {
    std::string out = "policy,seed,scheduler_estimate_ms,model_estimate_ms,measured_ms\n";
    for (const auto& r : runs) {
        out += fmt::format("{},{},{},{},{}\n", r.policy, r.seed, r.scheduler_estimate_ms, r.model_estimate_ms,
                           r.measured_ms);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Master scalability
// ---------------------------------------------------------------------------

ScenarioConfig scalability_preset(std::size_t n_users, bool scaling_enabled, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "scalability";
    c.seed = seed;
    c.scaling_enabled = scaling_enabled;
    c.hosts = {
        make_host("Desktop", "10.0.0.2", 0.05),  make_host("RPi", "10.0.0.3", 0.10),
        make_host("RPi", "10.0.0.4", 0.10),      make_host("RPi", "10.0.0.5", 0.10),
        make_host("RPi", "10.0.0.6", 0.10),      make_host("cloud-2c", "10.0.0.7", 0.10),
        make_host("cloud-2c", "10.0.0.8", 0.10), make_host("cloud-2c", "10.0.0.9", 0.10),
        make_host("cloud-4c", "10.0.0.10", 0.10), make_host("cloud-4c", "10.0.0.11", 0.10),
    };
    std::vector<std::string> users;
    for (std::size_t i = 0; i < n_users; ++i) users.push_back(user_host(i));
    wire_links(c, users);
    c.masters = {"10.0.0.2"};
    c.remote_logger = "10.0.0.2";
    for (const auto& h : c.hosts) c.actors.push_back(ActorEntry{h.host, {}, {kAnyImage}});
    for (std::size_t i = 0; i < n_users; ++i) {
        UserEntry u;
        u.host = users[i];
        u.config.app = i % 2 == 0 ? "GameOfLife" : "VOCR";
        u.config.frame_count = 1;
        u.config.start_at = 2000.0;
        c.users.push_back(u);
    }
    return c;
}

ScalabilityOutcome run_scalability_case(std::size_t n_users, bool scaling_enabled, std::uint64_t seed) {
    const MetricsReport r = run_scenario(scalability_preset(n_users, scaling_enabled, seed));
    ScalabilityOutcome out;
    out.users = n_users;
    out.scaling_enabled = scaling_enabled;
    out.sft = r.sft;
    out.rrt = r.rrt;
    out.completed = r.sft.count;
    out.forwards = r.counters.forwards;
    out.scales = r.counters.scales;
    out.masters = r.masters;
    return out;
}

std::vector<ScalabilityOutcome> run_scalability_experiment(const std::vector<std::size_t>& user_counts,
                                                           std::uint64_t seed) {
    std::vector<ScalabilityOutcome> out;
    for (std::size_t n : user_counts) {
        for (bool scaling : {true, false}) out.push_back(run_scalability_case(n, scaling, seed));
    }
    return out;
}

std::string scalability_experiment_csv(const std::vector<ScalabilityOutcome>& rows) {
    std::string out = "users,scaling,completed,mean_sft_ms,median_sft_ms,p95_sft_ms,mean_rrt_ms,forwards,scales,masters\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.users, r.scaling_enabled ? "on" : "off", r.completed,
                           r.sft.mean, r.sft.median, r.sft.p95, r.rrt.mean, r.forwards, r.scales, r.masters);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Executor reuse
// ---------------------------------------------------------------------------

ScenarioConfig reuse_preset(const std::string& app, std::uint64_t seed) {
    ScenarioConfig c;
    c.name = "reuse-" + app;
    c.seed = seed;
    c.hosts = {make_host("Desktop", "10.0.0.2", 0.05)};
    c.default_link = kEdgeLink;
    c.masters = {"10.0.0.2"};
    c.remote_logger = "10.0.0.2";
    c.actors.push_back(ActorEntry{"10.0.0.2", {}, {kAnyImage}});
    UserEntry u;
    u.host = user_host(0);
    u.config.app = app;
    u.config.frame_count = 1;
    u.config.start_at = 2000.0;
    u.config.requests = 2;
    u.config.request_gap_ms = 2000.0;
    c.users.push_back(u);
    return c;
}

ReuseOutcome run_reuse_case(const std::string& app, std::uint64_t seed) {
    const MetricsReport r = run_scenario(reuse_preset(app, seed));
    if (r.requests.size() != 2 || r.decisions.size() != 2 || !r.requests[0].rrt_ms || !r.requests[1].rrt_ms) {
        throw Error("reuse run for " + app + " did not complete both requests");
    }
    ReuseOutcome out;
    out.app = app;
    out.cold_sft_ms = *r.requests[0].sft_ms;
    out.cold_rrt_ms = *r.requests[0].rrt_ms;
    out.warm_sft_ms = *r.requests[1].sft_ms;
    out.warm_rrt_ms = *r.requests[1].rrt_ms;
    out.warm_reused = r.decisions[1].record.reused;
    out.warm_cold_starts = r.decisions[1].record.cold;
    return out;
}

std::string reuse_experiment_csv(const std::vector<ReuseOutcome>& rows) {
    std::string out = "app,cold_sft_ms,cold_rrt_ms,warm_sft_ms,warm_rrt_ms,warm_over_cold,warm_reused,warm_cold_starts\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", r.app, r.cold_sft_ms, r.cold_rrt_ms, r.warm_sft_ms,
                           r.warm_rrt_ms, r.ratio(), r.warm_reused, r.warm_cold_starts);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Discovery
// ---------------------------------------------------------------------------

DiscoveryOutcome run_discovery_trial(std::uint64_t seed, std::size_t max_hosts) {
    if (max_hosts < 3) throw InvalidArgument("a discovery trial needs at least 3 hosts");
    Rng rng(seed);
    const std::size_t n = 3 + rng.index(max_hosts - 2);
    std::vector<std::string> hosts;
    for (std::size_t i = 0; i < n; ++i) hosts.push_back(fmt::format("10.0.0.{}", 2 + i));

    // Random spanning tree plus extra edges; hop-shortest paths with latency sums.
    constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 4;
    std::vector<std::vector<std::size_t>> hops(n, std::vector<std::size_t>(n, kInf));
    std::vector<std::vector<double>> lat(n, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> rate(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) hops[i][i] = 0;
    auto add_edge = [&](std::size_t a, std::size_t b) {
        hops[a][b] = hops[b][a] = 1;
        lat[a][b] = lat[b][a] = rng.uniform(0.5, 5.0);
        rate[a][b] = rate[b][a] = rng.uniform(1e7, 1e9);
    };
    for (std::size_t i = 1; i < n; ++i) add_edge(i, rng.index(i));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (hops[i][j] == kInf && rng.chance(0.1)) add_edge(i, j);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::size_t via = hops[i][k] + hops[k][j];
                if (via < hops[i][j]) {
                    hops[i][j] = via;
                    lat[i][j] = lat[i][k] + lat[k][j];
                    rate[i][j] = std::min(rate[i][k], rate[k][j]);
                }
            }
        }
    }
    DiscoveryOutcome out;
    out.seed = seed;
    out.hosts = n;
    Topology topo(kEdgeLink);
    for (const auto& h : hosts) topo.add_host(h);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            out.diameter = std::max(out.diameter, hops[i][j]);
            topo.set_link(hosts[i], hosts[j], LinkSpec{lat[i][j], rate[i][j]});
        }
    }

    SimNetwork net(topo);
    const AppCatalog apps = AppCatalog::builtin();
    std::vector<std::unique_ptr<HostMachine>> machines;
    for (const auto& h : hosts) {
        HostSpec s = *host_preset("RPi", h);
        machines.push_back(std::make_unique<HostMachine>(s, net));
    }
    EventCounters counters;
    LogStore store;
    const std::size_t m0 = rng.index(n);
    std::size_t m1 = rng.index(n - 1);
    if (m1 >= m0) ++m1;
    const Address logger_addr{hosts[m0], kLoggerPort};
    RemoteLogger logger(net, logger_addr, store);

    MasterConfig mcfg;
    mcfg.logger = logger_addr;
    mcfg.default_link = kEdgeLink;
    mcfg.discovery.interval_ms = 2000.0;
    mcfg.discovery.net_gateway = "10.0.0.1";
    mcfg.discovery.net_mask = 24;
    mcfg.seed = seed;
    std::vector<std::unique_ptr<Master>> masters;
    for (std::size_t m : {m0, m1}) {
        masters.push_back(std::make_unique<Master>(net, *machines[m], apps, topo, Address{hosts[m], kMasterPort},
                                                   mcfg, counters));
    }

    // Disjoint actor sets; each Master starts with at least one.
    std::vector<std::unique_ptr<Actor>> actors;
    std::set<Address> all_actors;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t owner = rng.index(2);
        if (i == m0) owner = 0;
        if (i == m1) owner = 1;
        ActorConfig acfg;
        acfg.masters = {masters[owner]->address()};
        acfg.logger = logger_addr;
        const Address addr{hosts[i], kActorPort};
        all_actors.insert(addr);
        actors.push_back(std::make_unique<Actor>(net, *machines[i], apps, topo, addr, acfg, counters));
        if (i == m0 || i == m1) actors.back()->set_hosted_master(Address{hosts[i], kMasterPort});
    }

    logger.start();
    for (auto& m : masters) m->start();
    for (auto& a : actors) a->start();

    auto knows_all = [&](const Master& m) {
        const auto& known = m.discovery().state().known_actor_addrs;
        for (const auto& a : all_actors) {
            if (!m.registry().has_actor(a) || !known.count(a)) return false;
        }
        return true;
    };
    // Rounds open at 0, I, 2I, ...; each is checked three quarters of an
    // interval later, well after its replies and advertisements settle.
    const TimeMs interval = mcfg.discovery.interval_ms;
    for (std::size_t round = 1; round <= out.diameter + 1; ++round) {
        net.advance_to(static_cast<double>(round - 1) * interval + 0.75 * interval);
        if (std::all_of(masters.begin(), masters.end(), [&](const auto& m) { return knows_all(*m); })) {
            out.rounds = round;
            break;
        }
    }
    return out;
}

std::string discovery_experiment_csv(const std::vector<DiscoveryOutcome>& rows) {
    std::string out = "seed,hosts,diameter,rounds,converged\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{}\n", r.seed, r.hosts, r.diameter, r.rounds, r.converged());
    }
    return out;
}

}  // namespace fogbus
