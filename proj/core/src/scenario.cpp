#include "fogbus/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fogbus/tcp_transport.hpp"

namespace fogbus {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Host presets
// ---------------------------------------------------------------------------

namespace {

struct Preset {
    const char* name;
    std::int64_t cores;
    double freq;
    std::int64_t mem_mb;
};

constexpr Preset kPresets[] = {
    {"RPi", 4, 1.5, 4096},
    {"Desktop", 8, 3.6, 16384},
    {"cloud-2c", 2, 2.6, 4096},
    {"cloud-4c", 4, 2.6, 8192},
};

}  // namespace

std::optional<HostSpec> host_preset(const std::string& preset, const std::string& host) {
    for (const auto& p : kPresets) {
        if (preset == p.name) {
            HostSpec s;
            s.host = host;
            s.cpu_cores = p.cores;
            s.cpu_freq_ghz = p.freq;
            s.mem_capacity_mb = p.mem_mb;
            return s;
        }
    }
    return std::nullopt;
}

std::vector<std::string> host_preset_names() {
    std::vector<std::string> out;
    for (const auto& p : kPresets) out.emplace_back(p.name);
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

/// Object reader that knows its path and rejects unknown keys on finish().
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_.empty() ? "$" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.contains(key);
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        if (!j_.contains(key)) throw ConfigError(at(key), "missing");
        return j_.at(key);
    }

    std::string str(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_string()) throw ConfigError(at(key), "expected a string");
        return v.get<std::string>();
    }
    std::string str(const std::string& key, const std::string& fallback) {
        return has(key) ? str(key) : fallback;
    }

    double num(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number()) throw ConfigError(at(key), "expected a number");
        return v.get<double>();
    }
    double num(const std::string& key, double fallback) { return has(key) ? num(key) : fallback; }

    std::uint64_t uint(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
            throw ConfigError(at(key), "expected a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }
    std::uint64_t uint(const std::string& key, std::uint64_t fallback) { return has(key) ? uint(key) : fallback; }

    std::int64_t integer(const std::string& key, std::int64_t fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_number_integer()) throw ConfigError(at(key), "expected an integer");
        return v.get<std::int64_t>();
    }

    bool boolean(const std::string& key, bool fallback) {
        if (!has(key)) return fallback;
        const json& v = raw(key);
        if (!v.is_boolean()) throw ConfigError(at(key), "expected a boolean");
        return v.get<bool>();
    }

    const json& array(const std::string& key) {
        const json& v = raw(key);
        if (!v.is_array()) throw ConfigError(at(key), "expected an array");
        return v;
    }

    std::vector<std::string> strings(const std::string& key) {
        const json& v = array(key);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string()) throw ConfigError(at(key) + "[" + std::to_string(i) + "]", "expected a string");
            out.push_back(v[i].get<std::string>());
        }
        return out;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!seen_.count(it.key())) throw ConfigError(at(it.key()), "unknown field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

LinkSpec parse_link(Obj& o) {
    LinkSpec s;
    s.latency_ms = o.num("latency_ms");
    s.data_rate_bps = o.num("data_rate_bps");
    if (!(s.latency_ms >= 0.0)) throw ConfigError(o.at("latency_ms"), "must be non-negative");
    if (!(s.data_rate_bps > 0.0)) throw ConfigError(o.at("data_rate_bps"), "must be positive");
    return s;
}

HostSpec parse_host(const json& j, const std::string& path) {
    Obj o(j, path);
    const std::string host = o.str("host");
    HostSpec s;
    s.host = host;
    if (o.has("preset")) {
        auto p = host_preset(o.str("preset"), host);
        if (!p) throw ConfigError(o.at("preset"), "unknown host preset");
        s = *p;
    }
    s.cpu_cores = o.integer("cpu_cores", s.cpu_cores);
    s.cpu_freq_ghz = o.num("cpu_freq_ghz", s.cpu_freq_ghz);
    s.mem_capacity_mb = o.integer("mem_capacity_mb", s.mem_capacity_mb);
    s.background_util = o.num("background_util", s.background_util);
    s.mem_util = o.num("mem_util", s.mem_util);
    o.finish();
    return s;
}

AppSpec parse_app(const json& j, const std::string& path) {
    Obj o(j, path);
    AppSpec a;
    a.app_name = o.str("name");
    const json& tasks = o.array("tasks");
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        Obj t(tasks[i], idx(o.at("tasks"), i));
        TaskSpec ts;
        ts.name = t.str("name");
        ts.compute_cost = t.num("compute_cost");
        ts.output_size_bytes = t.uint("output_size_bytes", 0);
        t.finish();
        a.tasks.push_back(std::move(ts));
    }
    if (o.has("edges")) {
        const json& edges = o.array("edges");
        for (std::size_t i = 0; i < edges.size(); ++i) {
            const json& e = edges[i];
            if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
                throw ConfigError(idx(o.at("edges"), i), "expected [parent, child]");
            }
            a.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
        }
    }
    a.entry_tasks = o.strings("entry_tasks");
    a.exit_tasks = o.strings("exit_tasks");
    o.finish();
    try {
        AppGraph check(a);
    } catch (const Error& e) {
        throw ConfigError(path, e.what());
    }
    return a;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("$", std::string("malformed JSON: ") + e.what());
    }
    Obj o(root, "");
    ScenarioConfig c;
    c.name = o.str("name", c.name);
    c.seed = o.uint("seed", c.seed);

    {
        Obj t(o.raw("topology"), "topology");
        if (t.has("default_link")) {
            Obj d(t.raw("default_link"), "topology.default_link");
            c.default_link = parse_link(d);
            d.finish();
        }
        const json& hosts = t.array("hosts");
        for (std::size_t i = 0; i < hosts.size(); ++i) c.hosts.push_back(parse_host(hosts[i], idx("topology.hosts", i)));
        if (t.has("links")) {
            const json& links = t.array("links");
            for (std::size_t i = 0; i < links.size(); ++i) {
                Obj l(links[i], idx("topology.links", i));
                LinkEntry e;
                e.a = l.str("a");
                e.b = l.str("b");
                e.spec = parse_link(l);
                l.finish();
                c.links.push_back(std::move(e));
            }
        }
        t.finish();
    }
    {
        Obj comp(o.raw("components"), "components");
        c.masters = comp.strings("masters");
        const json& actors = comp.array("actors");
        for (std::size_t i = 0; i < actors.size(); ++i) {
            ActorEntry a;
            if (actors[i].is_string()) {
                a.host = actors[i].get<std::string>();
            } else {
                Obj ao(actors[i], idx("components.actors", i));
                a.host = ao.str("host");
                if (ao.has("masters")) a.masters = ao.strings("masters");
                if (ao.has("images")) a.images = ao.strings("images");
                ao.finish();
            }
            c.actors.push_back(std::move(a));
        }
        c.remote_logger = comp.str("remote_logger");
        comp.finish();
    }
    if (o.has("apps")) {
        const json& apps = o.array("apps");
        for (std::size_t i = 0; i < apps.size(); ++i) c.apps.push_back(parse_app(apps[i], idx("apps", i)));
    }
    if (o.has("users")) {
        const json& users = o.array("users");
        for (std::size_t i = 0; i < users.size(); ++i) {
            Obj u(users[i], idx("users", i));
            UserEntry e;
            e.host = u.str("host");
            e.master = u.str("master", "");
            e.config.app = u.str("app");
            e.config.frame_count = u.uint("frame_count", e.config.frame_count);
            e.config.frame_interval_ms = u.num("frame_interval_ms", e.config.frame_interval_ms);
            e.config.frame_size_bytes = u.uint("frame_size_bytes", e.config.frame_size_bytes);
            e.config.start_at = u.num("start_at", e.config.start_at);
            e.config.requests = u.uint("requests", e.config.requests);
            e.config.request_gap_ms = u.num("request_gap_ms", e.config.request_gap_ms);
            u.finish();
            c.users.push_back(std::move(e));
        }
    }
    c.policy = o.str("policy", c.policy);
    if (o.has("ga")) {
        Obj g(o.raw("ga"), "ga");
        c.ga.pop_size = g.uint("pop_size", c.ga.pop_size);
        c.ga.hist_ratio = g.uint("hist_ratio", c.ga.hist_ratio);
        c.ga.max_iteration_num = g.uint("max_iteration_num", c.ga.max_iteration_num);
        c.ga.n_parents = g.uint("n_parents", c.ga.n_parents);
        c.ga.n_offsprings = g.uint("n_offsprings", c.ga.n_offsprings);
        c.ga.crossover_eta = g.num("crossover_eta", c.ga.crossover_eta);
        c.ga.mutation_eta = g.num("mutation_eta", c.ga.mutation_eta);
        c.ga.mutation_prob = g.num("mutation_prob", c.ga.mutation_prob);
        g.finish();
    }
    if (o.has("scheduler")) {
        Obj s(o.raw("scheduler"), "scheduler");
        c.scheduler.max_cpu_util = s.num("max_cpu_util", c.scheduler.max_cpu_util);
        c.scheduler.max_sched_count = s.uint("max_sched_count", c.scheduler.max_sched_count);
        s.finish();
    }
    if (o.has("discovery")) {
        Obj d(o.raw("discovery"), "discovery");
        c.discovery_enabled = d.boolean("enabled", c.discovery_enabled);
        c.discovery.interval_ms = d.num("interval_ms", c.discovery.interval_ms);
        c.discovery.net_gateway = d.str("net_gateway", c.discovery.net_gateway);
        c.discovery.net_mask = static_cast<int>(d.integer("net_mask", c.discovery.net_mask));
        if (d.has("probe_ports")) {
            const json& ports = d.array("probe_ports");
            c.discovery.probe_ports.clear();
            for (std::size_t i = 0; i < ports.size(); ++i) {
                if (!ports[i].is_number_unsigned() || ports[i].get<std::uint64_t>() == 0 ||
                    ports[i].get<std::uint64_t>() > 65535) {
                    throw ConfigError(idx("discovery.probe_ports", i), "expected a port number");
                }
                c.discovery.probe_ports.push_back(static_cast<std::uint16_t>(ports[i].get<std::uint64_t>()));
            }
        }
        c.discovery.grace_ms = d.num("grace_ms", c.discovery.grace_ms);
        d.finish();
    }
    if (o.has("runtime")) {
        Obj r(o.raw("runtime"), "runtime");
        auto& rt = c.runtime;
        rt.profile_period_ms = r.num("profile_period_ms", rt.profile_period_ms);
        rt.stale_periods = static_cast<int>(r.integer("stale_periods", rt.stale_periods));
        rt.executor_startup_ms = r.num("executor_startup_ms", rt.executor_startup_ms);
        rt.cool_off_ms = r.num("cool_off_ms", rt.cool_off_ms);
        rt.master_startup_ms = r.num("master_startup_ms", rt.master_startup_ms);
        rt.sched_iteration_ms = r.num("sched_iteration_ms", rt.sched_iteration_ms);
        rt.sched_eval_base_ms = r.num("sched_eval_base_ms", rt.sched_eval_base_ms);
        rt.sched_eval_per_task_ms = r.num("sched_eval_per_task_ms", rt.sched_eval_per_task_ms);
        rt.user_timeout_ms = r.num("user_timeout_ms", rt.user_timeout_ms);
        r.finish();
    }
    c.scaling_enabled = o.boolean("scaling_enabled", c.scaling_enabled);
    c.time_limit_ms = o.num("time_limit_ms", c.time_limit_ms);
    o.finish();
    c.validate();
    return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
    auto link = [](const LinkSpec& s) { return json{{"latency_ms", s.latency_ms}, {"data_rate_bps", s.data_rate_bps}}; };
    json root;
    root["name"] = c.name;
    root["seed"] = c.seed;
    json hosts = json::array();
    for (const auto& h : c.hosts) {
        hosts.push_back({{"host", h.host},
                         {"cpu_cores", h.cpu_cores},
                         {"cpu_freq_ghz", h.cpu_freq_ghz},
                         {"mem_capacity_mb", h.mem_capacity_mb},
                         {"background_util", h.background_util},
                         {"mem_util", h.mem_util}});
    }
    json links = json::array();
    for (const auto& l : c.links) {
        json e = link(l.spec);
        e["a"] = l.a;
        e["b"] = l.b;
        links.push_back(std::move(e));
    }
    root["topology"] = {{"default_link", link(c.default_link)}, {"hosts", hosts}, {"links", links}};
    json actors = json::array();
    for (const auto& a : c.actors) {
        json e = {{"host", a.host}, {"images", a.images}};
        if (!a.masters.empty()) e["masters"] = a.masters;
        actors.push_back(std::move(e));
    }
    root["components"] = {{"masters", c.masters}, {"actors", actors}, {"remote_logger", c.remote_logger}};
    json apps = json::array();
    for (const auto& a : c.apps) {
        json tasks = json::array();
        for (const auto& t : a.tasks) {
            tasks.push_back({{"name", t.name}, {"compute_cost", t.compute_cost}, {"output_size_bytes", t.output_size_bytes}});
        }
        json edges = json::array();
        for (const auto& [p, ch] : a.edges) edges.push_back({p, ch});
        apps.push_back({{"name", a.app_name},
                        {"tasks", tasks},
                        {"edges", edges},
                        {"entry_tasks", a.entry_tasks},
                        {"exit_tasks", a.exit_tasks}});
    }
    root["apps"] = apps;
    json users = json::array();
    for (const auto& u : c.users) {
        json e = {{"host", u.host},
                  {"app", u.config.app},
                  {"frame_count", u.config.frame_count},
                  {"frame_interval_ms", u.config.frame_interval_ms},
                  {"frame_size_bytes", u.config.frame_size_bytes},
                  {"start_at", u.config.start_at},
                  {"requests", u.config.requests},
                  {"request_gap_ms", u.config.request_gap_ms}};
        if (!u.master.empty()) e["master"] = u.master;
        users.push_back(std::move(e));
    }
    root["users"] = users;
    root["policy"] = c.policy;
    root["ga"] = {{"pop_size", c.ga.pop_size},
                  {"hist_ratio", c.ga.hist_ratio},
                  {"max_iteration_num", c.ga.max_iteration_num},
                  {"n_parents", c.ga.n_parents},
                  {"n_offsprings", c.ga.n_offsprings},
                  {"crossover_eta", c.ga.crossover_eta},
                  {"mutation_eta", c.ga.mutation_eta},
                  {"mutation_prob", c.ga.mutation_prob}};
    root["scheduler"] = {{"max_cpu_util", c.scheduler.max_cpu_util}, {"max_sched_count", c.scheduler.max_sched_count}};
    root["discovery"] = {{"enabled", c.discovery_enabled},
                         {"interval_ms", c.discovery.interval_ms},
                         {"net_gateway", c.discovery.net_gateway},
                         {"net_mask", c.discovery.net_mask},
                         {"probe_ports", c.discovery.probe_ports},
                         {"grace_ms", c.discovery.grace_ms}};
    const auto& rt = c.runtime;
    root["runtime"] = {{"profile_period_ms", rt.profile_period_ms},
                       {"stale_periods", rt.stale_periods},
                       {"executor_startup_ms", rt.executor_startup_ms},
                       {"cool_off_ms", rt.cool_off_ms},
                       {"master_startup_ms", rt.master_startup_ms},
                       {"sched_iteration_ms", rt.sched_iteration_ms},
                       {"sched_eval_base_ms", rt.sched_eval_base_ms},
                       {"sched_eval_per_task_ms", rt.sched_eval_per_task_ms},
                       {"user_timeout_ms", rt.user_timeout_ms}};
    root["scaling_enabled"] = c.scaling_enabled;
    root["time_limit_ms"] = c.time_limit_ms;
    return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

void ScenarioConfig::validate() const {
    std::set<std::string> known;
    for (std::size_t i = 0; i < hosts.size(); ++i) {
        const auto& h = hosts[i];
        const std::string p = idx("topology.hosts", i);
        if (!parse_ipv4(h.host)) throw ConfigError(p + ".host", "not an IPv4 address");
        if (!known.insert(h.host).second) throw ConfigError(p + ".host", "duplicate host");
        if (h.cpu_cores <= 0) throw ConfigError(p + ".cpu_cores", "must be positive");
        if (!(h.cpu_freq_ghz > 0.0)) throw ConfigError(p + ".cpu_freq_ghz", "must be positive");
        if (!(h.background_util >= 0.0 && h.background_util < 1.0)) {
            throw ConfigError(p + ".background_util", "must be in [0,1)");
        }
        if (!(h.mem_util >= 0.0 && h.mem_util <= 1.0)) throw ConfigError(p + ".mem_util", "must be in [0,1]");
    }
    auto need_host = [&](const std::string& host, const std::string& path) {
        if (!known.count(host)) throw ConfigError(path, "unknown host " + host);
    };
    // Links may also name user devices, which are not compute hosts.
    std::set<std::string> endpoints = known;
    for (const auto& u : users) endpoints.insert(u.host);
    for (std::size_t i = 0; i < links.size(); ++i) {
        for (const auto& [end, key] : {std::pair{&links[i].a, ".a"}, std::pair{&links[i].b, ".b"}}) {
            if (!endpoints.count(*end)) throw ConfigError(idx("topology.links", i) + key, "unknown host " + *end);
        }
    }
    if (masters.empty()) throw ConfigError("components.masters", "at least one Master is required");
    std::set<std::string> master_set;
    for (std::size_t i = 0; i < masters.size(); ++i) {
        need_host(masters[i], idx("components.masters", i));
        if (!master_set.insert(masters[i]).second) throw ConfigError(idx("components.masters", i), "duplicate");
    }
    std::set<std::string> actor_set;
    for (std::size_t i = 0; i < actors.size(); ++i) {
        const std::string p = idx("components.actors", i);
        need_host(actors[i].host, p + ".host");
        if (!actor_set.insert(actors[i].host).second) throw ConfigError(p + ".host", "duplicate actor host");
        for (std::size_t k = 0; k < actors[i].masters.size(); ++k) {
            if (!master_set.count(actors[i].masters[k])) throw ConfigError(idx(p + ".masters", k), "not a Master host");
        }
        if (actors[i].images.empty()) throw ConfigError(p + ".images", "must not be empty");
    }
    if (remote_logger.empty()) throw ConfigError("components.remote_logger", "exactly one Remote Logger is required");
    need_host(remote_logger, "components.remote_logger");

    AppCatalog catalog = AppCatalog::builtin();
    for (std::size_t i = 0; i < apps.size(); ++i) {
        if (catalog.contains(apps[i].app_name)) throw ConfigError(idx("apps", i) + ".name", "duplicate app name");
        try {
            catalog.add(apps[i]);
        } catch (const Error& e) {
            throw ConfigError(idx("apps", i), e.what());
        }
    }
    for (std::size_t i = 0; i < users.size(); ++i) {
        const auto& u = users[i];
        const std::string p = idx("users", i);
        if (!parse_ipv4(u.host)) throw ConfigError(p + ".host", "not an IPv4 address");
        if (!catalog.contains(u.config.app)) throw ConfigError(p + ".app", "unknown app " + u.config.app);
        if (!u.master.empty() && !master_set.count(u.master)) throw ConfigError(p + ".master", "not a Master host");
        if (u.config.frame_count == 0) throw ConfigError(p + ".frame_count", "must be at least 1");
        if (u.config.frame_interval_ms < 0.0) throw ConfigError(p + ".frame_interval_ms", "must be non-negative");
        if (u.config.start_at < 0.0) throw ConfigError(p + ".start_at", "must be non-negative");
        if (u.config.request_gap_ms < 0.0) throw ConfigError(p + ".request_gap_ms", "must be non-negative");
        if (kUserPortBase + i > 65535) throw ConfigError(p, "too many users");
    }
    if (std::find(policy_names().begin(), policy_names().end(), policy) == policy_names().end()) {
        throw ConfigError("policy", "unknown policy " + policy);
    }
    auto wrap = [](const char* path, auto&& check) {
        try {
            check();
        } catch (const InvalidArgument& e) {
            throw ConfigError(path, e.what());
        }
    };
    wrap("ga", [&] { ga.validate(); });
    wrap("scheduler", [&] { scheduler.validate(); });
    wrap("discovery", [&] { discovery.validate(); });
    wrap("runtime", [&] { runtime.validate(); });
    if (!(time_limit_ms > 0.0)) throw ConfigError("time_limit_ms", "must be positive");
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

Stats summarize(std::vector<double> values) {
    Stats s;
    s.count = values.size();
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    const std::size_t n = values.size();
    s.median = n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.95 * static_cast<double>(n)));
    s.p95 = values[std::max<std::size_t>(rank, 1) - 1];
    return s;
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

MetricsReport run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    config.validate();

    Topology topo(config.default_link);
    for (const auto& h : config.hosts) topo.add_host(h.host);
    // User devices join the topology so that actors profile links to them.
    for (const auto& u : config.users) topo.add_host(u.host);
    for (const auto& l : config.links) topo.set_link(l.a, l.b, l.spec);

    std::unique_ptr<Transport> net;
    if (options.transport == TransportKind::Tcp) {
        net = std::make_unique<TcpTransport>(options.tcp_time_scale);
    } else {
        net = std::make_unique<SimNetwork>(topo);
    }

    AppCatalog apps = AppCatalog::builtin();
    for (const auto& a : config.apps) apps.add(a);

    std::map<std::string, std::unique_ptr<HostMachine>> machines;
    for (const auto& h : config.hosts) machines.emplace(h.host, std::make_unique<HostMachine>(h, *net));

    EventCounters counters;
    LogStore store;
    const Address logger_addr{config.remote_logger, kLoggerPort};
    RemoteLogger logger(*net, logger_addr, store);

    MasterConfig mcfg;
    mcfg.scheduler = config.scheduler;
    mcfg.scaling_enabled = config.scaling_enabled;
    mcfg.policy = config.policy;
    mcfg.ga = config.ga;
    mcfg.discovery = config.discovery;
    mcfg.discovery_enabled = config.discovery_enabled;
    mcfg.runtime = config.runtime;
    mcfg.logger = logger_addr;
    mcfg.default_link = config.default_link;
    mcfg.seed = config.seed;
    for (const auto& u : config.users) {
        const std::uint64_t bytes = u.config.frame_size_bytes ? u.config.frame_size_bytes : default_frame_bytes(u.config.app);
        mcfg.input_bytes.emplace(u.config.app, bytes);
    }

    std::deque<std::unique_ptr<Master>> masters;
    for (const auto& h : config.masters) {
        masters.push_back(std::make_unique<Master>(*net, *machines.at(h), apps, topo, Address{h, kMasterPort}, mcfg,
                                                   counters));
    }
    MasterSpawner spawner = [&](const std::string& host, const Address& parent) -> Master& {
        masters.push_back(std::make_unique<Master>(*net, *machines.at(host), apps, topo, Address{host, kMasterPort},
                                                   mcfg, counters, parent));
        return *masters.back();
    };

    std::vector<std::unique_ptr<Actor>> actors;
    for (const auto& a : config.actors) {
        ActorConfig acfg;
        const auto& hosts = a.masters.empty() ? config.masters : a.masters;
        for (const auto& m : hosts) acfg.masters.push_back(Address{m, kMasterPort});
        acfg.logger = logger_addr;
        acfg.images = a.images;
        acfg.runtime = config.runtime;
        actors.push_back(std::make_unique<Actor>(*net, *machines.at(a.host), apps, topo, Address{a.host, kActorPort},
                                                 acfg, counters, spawner));
        if (std::find(config.masters.begin(), config.masters.end(), a.host) != config.masters.end()) {
            actors.back()->set_hosted_master(Address{a.host, kMasterPort});
        }
    }

    std::vector<std::unique_ptr<User>> users;
    for (std::size_t i = 0; i < config.users.size(); ++i) {
        const auto& u = config.users[i];
        UserConfig ucfg = u.config;
        ucfg.master = Address{u.master.empty() ? config.masters.front() : u.master, kMasterPort};
        users.push_back(std::make_unique<User>(*net, apps, Address{u.host, static_cast<std::uint16_t>(kUserPortBase + i)},
                                               ucfg, logger_addr, config.runtime.user_timeout_ms));
    }

    logger.start();
    for (auto& m : masters) m->start();
    for (auto& a : actors) a->start();
    for (auto& u : users) u->start();

    auto all_done = [&] {
        return std::all_of(users.begin(), users.end(), [](const auto& u) { return u->finished(); });
    };
    const bool done = net->run_until(all_done, config.time_limit_ms);
    if (!done) {
        std::ostringstream dump;
        for (const auto& m : masters) dump << m->state_dump() << "\n";
        for (const auto& a : actors) dump << a->state_dump() << "\n";
        for (const auto& u : users) {
            if (!u->finished()) dump << u->state_dump() << "\n";
        }
        const bool timed_out = net->now() >= config.time_limit_ms;
        throw DeadlockDetected(timed_out ? "time limit reached with users unfinished"
                                         : "no pending work while users are unfinished",
                               dump.str());
    }

    MetricsReport r;
    r.scenario = config.name;
    r.seed = config.seed;
    r.policy = config.policy;
    r.scaling_enabled = config.scaling_enabled;
    r.finished_at = net->now();
    std::vector<double> sft, rrt, resp;
    for (const auto& u : users) {
        for (const auto& m : u->metrics()) {
            r.requests.push_back(m);
            if (m.outcome != Outcome::Completed) continue;
            if (m.sft_ms) sft.push_back(*m.sft_ms);
            if (m.rrt_ms) rrt.push_back(*m.rrt_ms);
            resp.insert(resp.end(), m.response_ms.begin(), m.response_ms.end());
        }
    }
    for (const auto& m : masters) {
        for (const auto& d : m->decisions()) {
            r.decisions.push_back(MasterDecision{m->address().str(), d});
            r.convergence.push_back(ConvergenceSeries{d.policy, config.seed, d.request_id.str(), d.convergence});
        }
    }
    r.sft = summarize(std::move(sft));
    r.rrt = summarize(std::move(rrt));
    r.response = summarize(std::move(resp));
    r.counters = counters;
    r.delivered = net->delivered_count();
    r.dropped = net->dropped_count();
    r.masters = masters.size();
    return r;
}

}  // namespace fogbus
