#include "fogbus/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace fogbus {

void SchedulerConfig::validate() const {
    if (!(max_cpu_util > 0.0 && max_cpu_util <= 1.0)) throw InvalidArgument("max_cpu_util must be in (0,1]");
    if (max_sched_count == 0) throw InvalidArgument("max_sched_count must be positive");
}

bool is_busy(double cpu_util, std::size_t sched_count, const SchedulerConfig& cfg) {
    return cpu_util > cfg.max_cpu_util || sched_count > cfg.max_sched_count;
}

double CostModel::host_rate(const std::string& host) const {
    auto it = profiles.hosts.find(host);
    if (it == profiles.hosts.end()) return default_rate;
    return std::max(it->second.execution_rate(), 1e-9);
}

LinkSpec CostModel::link(const std::string& a, const std::string& b) const {
    if (a == b) return kSelfLink;
    auto it = profiles.links.find(host_pair(a, b));
    if (it == profiles.links.end()) return default_link;
    return LinkSpec{it->second.latency_ms, it->second.data_rate_bps};
}

ResponseEstimator::ResponseEstimator(const AppGraph& app, const CostModel& model, EstimateInputs inputs,
                                     std::vector<std::string> hosts)
    : app_(&app), hosts_(std::move(hosts)), input_bytes_(inputs.input_size_bytes) {
    const std::size_t n = hosts_.size();
    rate_.resize(n);
    latency_.resize(n * n);
    bps_.resize(n * n);
    user_latency_.resize(n);
    user_bps_.resize(n);
    for (std::size_t a = 0; a < n; ++a) {
        rate_[a] = model.host_rate(hosts_[a]);
        for (std::size_t b = 0; b < n; ++b) {
            const LinkSpec s = model.link(hosts_[a], hosts_[b]);
            latency_[a * n + b] = s.latency_ms;
            bps_[a * n + b] = s.data_rate_bps;
        }
        const LinkSpec u = model.link(inputs.user_host, hosts_[a]);
        user_latency_[a] = u.latency_ms;
        user_bps_[a] = u.data_rate_bps;
    }
}

std::optional<std::size_t> ResponseEstimator::host_index(const std::string& host) const {
    auto it = std::find(hosts_.begin(), hosts_.end(), host);
    if (it == hosts_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - hosts_.begin());
}

double ResponseEstimator::transfer(std::size_t a, std::size_t b, std::uint64_t bytes) const {
    if (a == b) return 0.0;
    const std::size_t k = a * hosts_.size() + b;
    return latency_[k] + static_cast<double>(bytes) * 8.0 / bps_[k] * 1000.0;
}

ResponseEstimator::Trace ResponseEstimator::trace(std::span<const std::size_t> host_of_task) const {
    const AppGraph& g = *app_;
    Trace t;
    t.start.assign(g.size(), 0.0);
    t.finish.assign(g.size(), 0.0);
    auto user_leg = [&](std::size_t h, std::uint64_t bytes) {
        return user_latency_[h] + static_cast<double>(bytes) * 8.0 / user_bps_[h] * 1000.0;
    };
    for (std::size_t i : g.topo_order()) {
        const std::size_t h = host_of_task[i];
        double start = 0.0;
        if (g.is_entry(i)) start = user_leg(h, input_bytes_);
        for (std::size_t p : g.parents(i)) {
            start = std::max(start, t.finish[p] + transfer(host_of_task[p], h, g.task(p).output_size_bytes));
        }
        t.start[i] = start;
        t.finish[i] = start + g.task(i).compute_cost / rate_[h];
        if (g.is_exit(i)) t.response = std::max(t.response, t.finish[i] + user_leg(h, g.task(i).output_size_bytes));
    }
    return t;
}

double ResponseEstimator::operator()(std::span<const std::size_t> host_of_task) const {
    return trace(host_of_task).response;
}

double estimate_response(const AppGraph& app, std::span<const std::string> host_by_task, const CostModel& model,
                         const EstimateInputs& inputs) {
    if (host_by_task.size() != app.size()) throw InvalidArgument("assignment does not cover every task");
    std::vector<std::string> hosts;
    std::vector<std::size_t> idx(host_by_task.size());
    for (std::size_t i = 0; i < host_by_task.size(); ++i) {
        auto it = std::find(hosts.begin(), hosts.end(), host_by_task[i]);
        if (it == hosts.end()) {
            hosts.push_back(host_by_task[i]);
            it = hosts.end() - 1;
        }
        idx[i] = static_cast<std::size_t>(it - hosts.begin());
    }
    ResponseEstimator est(app, model, inputs, std::move(hosts));
    return est(idx);
}

TaskActorsMap build_task_actors_map(const AppGraph& app, std::span<const RegisteredActor* const> actors) {
    TaskActorsMap map(app.size());
    for (std::size_t i = 0; i < app.size(); ++i) {
        for (std::size_t a = 0; a < actors.size(); ++a) {
            if (actors[a]->has_image(app.task(i).name)) map[i].push_back(a);
        }
    }
    return map;
}

std::optional<Address> get_best_master(std::span<const MasterCandidate> candidates) {
    const MasterCandidate* best = nullptr;
    for (const auto& c : candidates) {
        if (!best || std::tie(c.latency_ms, c.cpu_util, c.addr) < std::tie(best->latency_ms, best->cpu_util, best->addr)) {
            best = &c;
        }
    }
    if (!best) return std::nullopt;
    return best->addr;
}

ScheduleOutcome schedule_request(const ScheduleInputs& in, SchedulingPolicy& policy, HistoryStore& history) {
    if (in.actors.empty()) return Warned{"no registered actors"};
    if (is_busy(in.cpu_util, in.sched_count, in.config)) {
        if (auto sub = get_best_master(in.sub_masters)) return Forwarded{*sub};
        if (in.scaling_enabled) return ScaleNeeded{};
        return Deferred{};
    }
    const AppGraph& app = *in.app;
    const TaskActorsMap map = build_task_actors_map(app, in.actors);
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i].empty()) return Warned{"no actor holds the image of " + app.task(i).name};
    }

    // Candidate hosts form the estimator's universe; a candidate maps to its
    // actor's host.
    std::vector<std::string> hosts;
    std::vector<std::size_t> host_of_actor(in.actors.size());
    for (std::size_t a = 0; a < in.actors.size(); ++a) {
        const std::string& h = in.actors[a]->addr.host;
        auto it = std::find(hosts.begin(), hosts.end(), h);
        if (it == hosts.end()) {
            hosts.push_back(h);
            it = hosts.end() - 1;
        }
        host_of_actor[a] = static_cast<std::size_t>(it - hosts.begin());
    }
    ResponseEstimator est(app, in.model, EstimateInputs{in.request.user_addr.host, in.input_size_bytes},
                          std::move(hosts));

    GaProblem problem;
    problem.sizes.resize(map.size());
    std::vector<std::vector<std::string>> keys(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) {
        problem.sizes[i] = map[i].size();
        for (std::size_t a : map[i]) keys[i].push_back(in.actors[a]->addr.str());
    }
    std::vector<std::size_t> scratch(map.size());
    problem.fitness = [&](std::span<const std::size_t> choice) {
        for (std::size_t i = 0; i < choice.size(); ++i) scratch[i] = host_of_actor[map[i][choice[i]]];
        return est(scratch);
    };

    const GaResult r = policy.solve(app.name(), problem, keys, history, in.seed);

    SchedulingDecision d;
    d.request_id = in.request.request_id;
    d.estimated_response_ms = r.best.fitness;
    d.convergence = r.best_per_iteration;
    d.evaluations = r.evaluations;
    d.distinct_evaluations = r.distinct_evaluations;
    for (std::size_t i = 0; i < map.size(); ++i) {
        const std::size_t a = map[i][r.best.decoded[i]];
        d.actor_by_task.push_back(a);
        d.addr_by_task.push_back(in.actors[a]->addr);
        d.assignment.emplace(app.task(i).name, in.actors[a]->id);
    }
    return d;
}

}  // namespace fogbus
