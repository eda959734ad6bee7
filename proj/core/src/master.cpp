#include <algorithm>
#include <sstream>

#include "fogbus/components.hpp"
#include "fogbus/scaler.hpp"

namespace fogbus {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

TimeMs scheduling_time(const RuntimeParams& rt, const SchedulingDecision& d, std::size_t n_tasks) {
    const double per_eval = rt.sched_eval_base_ms + rt.sched_eval_per_task_ms * static_cast<double>(n_tasks);
    return static_cast<double>(d.convergence.size()) * rt.sched_iteration_ms +
           static_cast<double>(d.distinct_evaluations) * per_eval;
}

void RuntimeParams::validate() const {
    if (!(profile_period_ms > 0.0)) throw InvalidArgument("profile_period_ms must be positive");
    if (stale_periods <= 0) throw InvalidArgument("stale_periods must be positive");
    if (executor_startup_ms < 0.0) throw InvalidArgument("executor_startup_ms must be non-negative");
    if (cool_off_ms < 0.0) throw InvalidArgument("cool_off_ms must be non-negative");
    if (master_startup_ms < 0.0) throw InvalidArgument("master_startup_ms must be non-negative");
    if (sched_iteration_ms < 0.0 || sched_eval_base_ms < 0.0 || sched_eval_per_task_ms < 0.0) {
        throw InvalidArgument("scheduling costs must be non-negative");
    }
    if (!(user_timeout_ms > 0.0)) throw InvalidArgument("user_timeout_ms must be positive");
}

Master::Master(Transport& net, HostMachine& host, const AppCatalog& apps, const Topology& topo, Address self,
               MasterConfig cfg, EventCounters& counters, std::optional<Address> parent)
    : net_(net),
      host_(host),
      apps_(apps),
      topo_(topo),
      self_(std::move(self)),
      cfg_(std::move(cfg)),
      counters_(counters),
      parent_(std::move(parent)),
      registry_(self_) {
    cfg_.scheduler.validate();
    cfg_.runtime.validate();
    policy_ = make_policy(cfg_.policy, cfg_.ga);
    discovery_ = std::make_unique<Discovery>(self_, cfg_.discovery);
}

void Master::send(const Address& to, MessagePayload payload) {
    MessageEnvelope env;
    env.source = self_;
    env.destination = to;
    env.sender_id = ComponentId{ComponentKind::Master, 0, self_};
    env.payload = std::move(payload);
    net_.send(std::move(env));
}

void Master::start() {
    if (started_) return;
    started_ = true;
    ++counters_.masters_started;
    net_.bind(self_, [this](const MessageEnvelope& env) { on_message(env); });
    if (parent_) {
        send(*parent_, Probe{});
    } else {
        bootstrapped_ = true;
    }
    periodic();
    if (cfg_.discovery_enabled) discovery_tick();
}

void Master::periodic() {
    send(cfg_.logger, LogQuery{});
    net_.schedule(cfg_.runtime.profile_period_ms, [this] { periodic(); }, true);
}

void Master::discovery_tick() {
    auto registered = [this](const Address& a) { return registry_.has_actor(a); };
    auto out = discovery_->tick(net_.now(), topo_, registered);
    for (auto& o : out) send(o.to, std::move(o.payload));
    if (discovery_->round_open()) {
        net_.schedule(discovery_->last_round_timeout(), [this] { discovery_close(); }, true);
    }
    if (cfg_.discovery_enabled) {
        net_.schedule(cfg_.discovery.interval_ms, [this] { discovery_tick(); }, true);
    }
}

void Master::discovery_close() {
    auto out = discovery_->close([this](const Address& a) { return registry_.has_actor(a); });
    for (auto& o : out) send(o.to, std::move(o.payload));
}

void Master::on_message(const MessageEnvelope& env) {
    const Address& src = env.source;
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, RegisterActor>) {
                registry_.register_actor(src, msg, net_.now());
                view_.apply(LogRecord{msg.profile});
                discovery_->note_registered(src);
                bootstrap_step();
            } else if constexpr (std::is_same_v<T, RegisterUser>) {
                registry_.register_user(src, msg);
                enqueue(src, msg.app, env.sent_at);
            } else if constexpr (std::is_same_v<T, PlacementRequest>) {
                if (!registry_.user_at(src)) {
                    ++counters_.protocol_errors;
                    return;
                }
                enqueue(src, msg.app, env.sent_at);
            } else if constexpr (std::is_same_v<T, ExecutorReady>) {
                on_ready(msg);
            } else if constexpr (std::is_same_v<T, RequestDone>) {
                on_request_done(msg);
            } else if constexpr (std::is_same_v<T, Probe>) {
                std::vector<Address> actors;
                for (const auto* a : registry_.actors()) actors.push_back(a->addr);
                send(src, on_probe(ComponentKind::Master, actors));
            } else if constexpr (std::is_same_v<T, ProbeReply>) {
                if (parent_ && !bootstrap_actors_ && src == *parent_) {
                    bootstrap_actors_ = msg.actors;
                    for (const auto& a : msg.actors) send(a, AdvertiseMaster{self_});
                    bootstrap_step();
                } else {
                    discovery_->on_reply(src, msg);
                }
            } else if constexpr (std::is_same_v<T, AdvertiseMaster>) {
                on_sub_master(msg.master);
            } else if constexpr (std::is_same_v<T, LogUpload>) {
                view_.apply(msg.records);
            } else {
                ++counters_.protocol_errors;
            }
        },
        env.payload);
}

void Master::bootstrap_step() {
    if (bootstrapped_ || !bootstrap_actors_) return;
    for (const auto& a : *bootstrap_actors_) {
        if (!registry_.has_actor(a)) return;
    }
    bootstrapped_ = true;
    send(*parent_, AdvertiseMaster{self_});
}

void Master::enqueue(const Address& user, const std::string& app, TimeMs sent_at) {
    const RequestId id{self_, request_serial_++};
    if (!apps_.contains(app)) {
        ++counters_.warned;
        send(user, WarnNoResources{id});
        return;
    }
    queue_.push(QueuedRequest{id, user, app, net_.now(), sent_at});
    pump();
}

CostModel Master::cost_model() const {
    CostModel m;
    m.profiles = view_;
    m.default_link = cfg_.default_link;
    return m;
}

std::set<std::string> Master::master_hosts() const {
    std::set<std::string> hosts{self_.host};
    for (const auto& s : sub_masters_) hosts.insert(s.host);
    for (const auto& m : discovery_->state().known_masters) hosts.insert(m.host);
    if (parent_) hosts.insert(parent_->host);
    if (scaling_host_) hosts.insert(*scaling_host_);
    return hosts;
}

void Master::pump() {
    while (!queue_.empty()) {
        const QueuedRequest req = queue_.items().front();
        const CostModel model = cost_model();

        ScheduleInputs in;
        in.app = &apps_.get(req.app);
        in.request = req;
        in.actors = registry_.live_actors(net_.now(), cfg_.runtime.stale_after_ms());
        in.cpu_util = host_.cpu_util(cfg_.runtime.profile_period_ms);
        in.sched_count = in_flight_;
        in.config = cfg_.scheduler;
        for (const auto& s : sub_masters_) {
            double util = 0.0;
            if (auto it = view_.hosts.find(s.host); it != view_.hosts.end()) util = it->second.cpu_util;
            in.sub_masters.push_back(MasterCandidate{s, model.link(self_.host, s.host).latency_ms, util});
        }
        in.scaling_enabled = cfg_.scaling_enabled;
        in.model = model;
        auto ib = cfg_.input_bytes.find(req.app);
        in.input_size_bytes = ib != cfg_.input_bytes.end() ? ib->second : default_frame_bytes(req.app);
        in.seed = splitmix64(cfg_.seed ^ splitmix64(parse_ipv4(self_.host).value_or(0)) ^
                             splitmix64(req.request_id.serial + 1));

        ScheduleOutcome outcome = schedule_request(in, *policy_, history_);
        if (std::holds_alternative<Deferred>(outcome)) {
            if (in_flight_ == 0 && !retry_armed_) {
                retry_armed_ = true;
                net_.schedule(cfg_.runtime.profile_period_ms, [this] {
                    retry_armed_ = false;
                    pump();
                });
            }
            return;
        }
        queue_.pop();
        if (auto* w = std::get_if<Warned>(&outcome)) {
            (void)w;
            ++counters_.warned;
            send(req.user_addr, WarnNoResources{req.request_id});
        } else if (auto* f = std::get_if<Forwarded>(&outcome)) {
            ++counters_.forwards;
            send(req.user_addr, ForwardToMaster{f->sub_master});
        } else if (std::holds_alternative<ScaleNeeded>(outcome)) {
            start_scale(req);
        } else {
            auto& d = std::get<SchedulingDecision>(outcome);
            const TimeMs duration = scheduling_time(cfg_.runtime, d, in.app->size());
            const TimeMs dequeued = net_.now();
            ++in_flight_;
            host_.submit(duration, [this, d = std::move(d), req, dequeued]() mutable {
                --in_flight_;
                dispatch(std::move(d), req, dequeued);
                pump();
            });
        }
    }
}

void Master::start_scale(const QueuedRequest& req) {
    pending_forward_.push_back(req);
    if (scaling_host_) return;
    const auto excluded = master_hosts();
    const CostModel model = cost_model();
    std::vector<ScaleCandidate> candidates;
    for (const auto* a : registry_.live_actors(net_.now(), cfg_.runtime.stale_after_ms())) {
        if (excluded.count(a->addr.host)) continue;
        ScaleCandidate c;
        c.actor = a->id;
        c.addr = a->addr;
        c.latency_ms = model.link(req.user_addr.host, a->addr.host).latency_ms;
        const auto it = view_.hosts.find(a->addr.host);
        const HostProfile& p = it != view_.hosts.end() ? it->second : a->profile;
        c.cpu_util = p.cpu_util;
        c.cpu_freq_ghz = p.cpu_freq_ghz;
        candidates.push_back(c);
    }
    std::size_t pick = 0;
    try {
        pick = select_scale_target(candidates);
    } catch (const NoActorsAvailable&) {
        for (const auto& r : pending_forward_) {
            ++counters_.warned;
            send(r.user_addr, WarnNoResources{r.request_id});
        }
        pending_forward_.clear();
        return;
    }
    scaling_host_ = candidates[pick].addr.host;
    ++counters_.scales;
    send(candidates[pick].addr, InitNewMaster{self_});
}

void Master::on_sub_master(const Address& sub) {
    if (sub == self_) return;
    if (!scaling_host_ || *scaling_host_ != sub.host) return;
    scaling_host_.reset();
    if (std::find(sub_masters_.begin(), sub_masters_.end(), sub) == sub_masters_.end()) sub_masters_.push_back(sub);
    for (const auto& r : pending_forward_) {
        ++counters_.forwards;
        send(r.user_addr, ForwardToMaster{sub});
    }
    pending_forward_.clear();
    pump();
}

void Master::dispatch(SchedulingDecision d, const QueuedRequest& req, TimeMs dequeued_at) {
    const AppGraph& g = apps_.get(req.app);
    const TimeMs now = net_.now();
    d.decided_at = now;

    RequestState st;
    st.id = req.request_id;
    st.app = req.app;
    st.user = req.user_addr;
    st.actors = d.addr_by_task;

    DecisionRecord rec;
    rec.request_id = req.request_id;
    rec.app = req.app;
    rec.policy = policy_->name();
    rec.user = req.user_addr;
    rec.estimated_response_ms = d.estimated_response_ms;
    rec.dequeued_at = dequeued_at;
    rec.decided_at = now;
    rec.convergence = d.convergence;
    rec.evaluations = d.evaluations;
    rec.distinct_evaluations = d.distinct_evaluations;
    rec.scheduling_ms = scheduling_time(cfg_.runtime, d, g.size());

    std::set<std::string> expected;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const std::string& task = g.task(i).name;
        const Address& actor = d.addr_by_task[i];
        rec.tasks.push_back(task);
        rec.host_by_task.push_back(actor.host);
        expected.insert(task);

        std::vector<TaskEndpoint> deps;
        for (std::size_t p : g.parents(i)) deps.push_back(TaskEndpoint{g.task(p).name, d.addr_by_task[p]});
        for (std::size_t c : g.children(i)) deps.push_back(TaskEndpoint{g.task(c).name, d.addr_by_task[c]});
        if (g.is_entry(i)) st.entries.push_back(TaskEndpoint{task, actor});

        auto& idle = idle_[IdleKey{actor, req.app, task}];
        while (!idle.empty() && idle.front() <= now) idle.pop_front();
        if (!idle.empty()) {
            idle.pop_front();
            ++counters_.reuses;
            ++rec.reused;
            send(actor, ReuseTaskExecutor{req.request_id, req.app, task, std::move(deps), req.user_addr});
        } else {
            ++counters_.cold_starts;
            ++rec.cold;
            send(actor, InitTaskExecutor{req.request_id, req.app, task, std::move(deps), req.user_addr});
        }
    }
    trackers_[req.request_id] = ReadinessTracker(req.request_id, std::move(expected));
    decisions_.push_back(std::move(rec));
    st.decision_index = decisions_.size() - 1;
    requests_[req.request_id] = std::move(st);
}

void Master::on_ready(const ExecutorReady& msg) {
    auto it = trackers_.find(msg.request_id);
    if (it == trackers_.end()) {
        ++counters_.protocol_errors;
        return;
    }
    switch (it->second.on_ready(msg.task)) {
        case ReadyOutcome::Completed: {
            RequestState& st = requests_.at(msg.request_id);
            DecisionRecord& rec = decisions_[st.decision_index];
            rec.ready_at = net_.now();
            send(st.user, ResourcesReady{st.id, rec.decided_at, st.entries});
            break;
        }
        case ReadyOutcome::UnknownTask:
            ++counters_.protocol_errors;
            break;
        default:
            break;
    }
}

void Master::on_request_done(const RequestDone& msg) {
    auto it = requests_.find(msg.request_id);
    if (it == requests_.end() || it->second.done) return;
    RequestState& st = it->second;
    st.done = true;
    const TimeMs expiry = net_.now() + cfg_.runtime.cool_off_ms;
    const AppGraph& g = apps_.get(st.app);
    std::set<Address> notified;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (notified.insert(st.actors[i]).second) send(st.actors[i], RequestDone{st.id});
        idle_[IdleKey{st.actors[i], st.app, g.task(i).name}].push_back(expiry);
    }
    trackers_.erase(st.id);
}

std::string Master::state_dump() const {
    std::ostringstream os;
    os << "master " << self_.str() << " started=" << started_ << " bootstrapped=" << bootstrapped_
       << " actors=" << registry_.actor_count() << " queued=" << queue_.size() << " in_flight=" << in_flight_
       << " pending_forward=" << pending_forward_.size() << " sub_masters=" << sub_masters_.size()
       << " open_trackers=" << trackers_.size();
    for (const auto& [id, t] : trackers_) {
        if (!t.complete()) os << "\n  waiting " << id.str() << " ready " << t.ready().size() << "/" << t.expected().size();
    }
    return os.str();
}

}  // namespace fogbus
