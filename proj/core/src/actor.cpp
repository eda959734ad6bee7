#include <algorithm>
#include <sstream>

#include "fogbus/components.hpp"

namespace fogbus {

namespace {
// Nominal MTU-sized probe reported with link samples.
constexpr std::int64_t kProbePacketBytes = 1500;
}  // namespace

std::string_view to_string(ExecutorPhase phase) {
    switch (phase) {
        case ExecutorPhase::Initializing: return "Initializing";
        case ExecutorPhase::Connecting: return "Connecting";
        case ExecutorPhase::Ready: return "Ready";
        case ExecutorPhase::Running: return "Running";
        case ExecutorPhase::CoolingOff: return "CoolingOff";
        case ExecutorPhase::Terminated: return "Terminated";
    }
    return "?";
}

bool legal_transition(ExecutorPhase from, ExecutorPhase to) {
    using P = ExecutorPhase;
    switch (from) {
        case P::Initializing: return to == P::Connecting;
        case P::Connecting: return to == P::Ready;
        case P::Ready: return to == P::Running;
        case P::Running: return to == P::CoolingOff;
        case P::CoolingOff: return to == P::Connecting || to == P::Terminated;
        case P::Terminated: return false;
    }
    return false;
}

Actor::Actor(Transport& net, HostMachine& host, const AppCatalog& apps, const Topology& topo, Address self,
             ActorConfig cfg, EventCounters& counters, MasterSpawner spawner)
    : net_(net),
      host_(host),
      apps_(apps),
      topo_(topo),
      self_(std::move(self)),
      cfg_(std::move(cfg)),
      counters_(counters),
      spawner_(std::move(spawner)) {
    cfg_.runtime.validate();
}

void Actor::send(const Address& to, MessagePayload payload) {
    MessageEnvelope env;
    env.source = self_;
    env.destination = to;
    env.sender_id = ComponentId{ComponentKind::Actor, 0, self_};
    env.payload = std::move(payload);
    net_.send(std::move(env));
}

void Actor::start() {
    net_.bind(self_, [this](const MessageEnvelope& env) { on_message(env); });
    periodic();
}

void Actor::set_hosted_master(const Address& addr, bool running) {
    hosted_master_ = addr;
    hosted_master_running_ = running;
}

void Actor::register_with(const Address& master) {
    send(master, RegisterActor{host_.profile(cfg_.runtime.profile_period_ms), cfg_.images});
}

void Actor::periodic() {
    for (const auto& m : cfg_.masters) register_with(m);
    upload();
    net_.schedule(cfg_.runtime.profile_period_ms, [this] { periodic(); }, true);
}

void Actor::upload() {
    const TimeMs now = net_.now();
    buffer_.push(host_.profile(cfg_.runtime.profile_period_ms));
    for (const auto& img : cfg_.images) buffer_.push(ImageRecord{self_.host, img, true, now});
    for (const auto& other : topo_.hosts()) {
        if (other == self_.host) continue;
        const LinkSpec s = topo_.spec(self_.host, other);
        buffer_.push(LinkSample{self_.host, other, s.latency_ms, s.data_rate_bps, kProbePacketBytes, now});
    }
    buffer_.flush([&](std::span<const LogRecord> records) {
        send(cfg_.logger, LogUpload{std::vector<LogRecord>(records.begin(), records.end())});
    });
    ++uploads_;
}

void Actor::on_message(const MessageEnvelope& env) {
    const Address& src = env.source;
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, InitTaskExecutor>) {
                init_executor(src, msg);
            } else if constexpr (std::is_same_v<T, ReuseTaskExecutor>) {
                reuse_executor(src, msg);
            } else if constexpr (std::is_same_v<T, Data>) {
                on_data(msg);
            } else if constexpr (std::is_same_v<T, RequestDone>) {
                on_request_done(msg);
            } else if constexpr (std::is_same_v<T, Probe>) {
                send(src, on_probe(ComponentKind::Actor));
            } else if constexpr (std::is_same_v<T, ProbeReply>) {
                on_peer_reply(src);
            } else if constexpr (std::is_same_v<T, AdvertiseMaster>) {
                // Multi-homing: register with every Master that advertises.
                if (std::find(cfg_.masters.begin(), cfg_.masters.end(), msg.master) == cfg_.masters.end()) {
                    cfg_.masters.push_back(msg.master);
                }
                register_with(msg.master);
            } else if constexpr (std::is_same_v<T, InitNewMaster>) {
                init_master(msg);
            } else {
                ++counters_.protocol_errors;
            }
        },
        env.payload);
}

void Actor::set_phase(ExecutorState& ex, ExecutorPhase to) {
    if (!legal_transition(ex.phase, to)) {
        throw IllegalTransition(std::string("executor ") + ex.task + ": " + std::string(to_string(ex.phase)) +
                                " -> " + std::string(to_string(to)));
    }
    ex.phase = to;
}

void Actor::init_executor(const Address& master, const InitTaskExecutor& msg) {
    if (!apps_.contains(msg.app) || !apps_.get(msg.app).index_of(msg.task)) {
        ++counters_.protocol_errors;
        return;
    }
    const bool has_image = std::find(cfg_.images.begin(), cfg_.images.end(), kAnyImage) != cfg_.images.end() ||
                           std::find(cfg_.images.begin(), cfg_.images.end(), msg.task) != cfg_.images.end();
    if (!has_image) {
        ++counters_.protocol_errors;
        return;
    }
    const std::uint64_t id = next_exec_++;
    ExecutorState ex;
    ex.id = ComponentId{ComponentKind::TaskExecutor, id, self_};
    ex.app = msg.app;
    ex.task = msg.task;
    ex.request_id = msg.request_id;
    ex.master = master;
    ex.user = msg.user;
    executors_.emplace(id, std::move(ex));
    by_request_[{msg.request_id, msg.task}] = id;
    // A cold start holds a core for the container start-up time.
    host_.submit(cfg_.runtime.executor_startup_ms, [this, id, deps = msg.dependencies] {
        wire(executors_.at(id), deps);
    });
}

void Actor::reuse_executor(const Address& master, const ReuseTaskExecutor& msg) {
    auto& pool = pool_[{msg.app, msg.task}];
    if (pool.empty()) {
        // Expired between the Master's bookkeeping and now.
        ++counters_.reuse_races;
        init_executor(master, InitTaskExecutor{msg.request_id, msg.app, msg.task, msg.dependencies, msg.user});
        return;
    }
    const std::uint64_t id = pool.front();
    pool.pop_front();
    if (auto it = expiry_.find(id); it != expiry_.end()) {
        net_.cancel(it->second);
        expiry_.erase(it);
    }
    ExecutorState& ex = executors_.at(id);
    ex.request_id = msg.request_id;
    ex.master = master;
    ex.user = msg.user;
    ex.cool_off_deadline.reset();
    by_request_[{msg.request_id, msg.task}] = id;
    wire(ex, msg.dependencies);
}

void Actor::wire(ExecutorState& ex, const std::vector<TaskEndpoint>& deps) {
    set_phase(ex, ExecutorPhase::Connecting);
    ex.peers.clear();
    std::set<Address> remote;
    for (const auto& d : deps) {
        ex.peers[d.task] = d.addr;
        if (d.addr != self_) remote.insert(d.addr);
    }
    if (remote.empty()) {
        become_ready(ex);
        return;
    }
    wiring_[ex.id.serial].awaiting = remote;
    for (const auto& a : remote) send(a, Probe{});
}

void Actor::become_ready(ExecutorState& ex) {
    set_phase(ex, ExecutorPhase::Ready);
    send(ex.master, ExecutorReady{*ex.request_id, ex.task});
}

void Actor::on_peer_reply(const Address& from) {
    std::vector<std::uint64_t> done;
    for (auto& [id, w] : wiring_) {
        w.awaiting.erase(from);
        if (w.awaiting.empty()) done.push_back(id);
    }
    for (std::uint64_t id : done) {
        wiring_.erase(id);
        become_ready(executors_.at(id));
    }
}

void Actor::on_data(const Data& msg) {
    auto it = by_request_.find({msg.request_id, msg.task});
    if (it == by_request_.end()) {
        ++counters_.protocol_errors;
        return;
    }
    const std::uint64_t id = it->second;
    ExecutorState& ex = executors_.at(id);
    const AppGraph& g = apps_.get(ex.app);
    const std::size_t ti = *g.index_of(ex.task);

    std::set<std::string> required;
    if (g.is_entry(ti)) required.insert("");
    for (std::size_t p : g.parents(ti)) required.insert(g.task(p).name);
    if (!required.count(msg.from_task)) {
        ++counters_.protocol_errors;
        return;
    }
    auto& got = inputs_[{id, msg.frame_seq}].got;
    got.insert(msg.from_task);
    if (got.size() < required.size()) return;
    inputs_.erase({id, msg.frame_seq});
    if (ex.phase == ExecutorPhase::Ready) set_phase(ex, ExecutorPhase::Running);
    run_frame(id, msg.frame_seq);
}

void Actor::run_frame(std::uint64_t id, std::uint64_t frame_seq) {
    ExecutorState& ex = executors_.at(id);
    ++ex.frames_in;
    const AppGraph& g = apps_.get(ex.app);
    const std::size_t ti = *g.index_of(ex.task);
    const TimeMs duration = g.task(ti).compute_cost / host_.execution_rate();
    const RequestId rid = *ex.request_id;
    host_.submit(duration, [this, id, frame_seq, rid, duration] {
        ExecutorState& e = executors_.at(id);
        const AppGraph& app = apps_.get(e.app);
        const std::size_t t = *app.index_of(e.task);
        const std::uint64_t out = app.task(t).output_size_bytes;
        for (std::size_t c : app.children(t)) {
            const std::string& child = app.task(c).name;
            send(e.peers.at(child), Data{rid, child, e.task, frame_seq, out, {}});
        }
        if (app.is_exit(t)) send(e.user, Result{rid, e.task, frame_seq, out});
        ++e.frames_out;
        buffer_.push(ProcessingSample{e.task, self_.host, duration, net_.now()});
    });
}

void Actor::on_request_done(const RequestDone& msg) {
    const TimeMs now = net_.now();
    for (auto it = by_request_.begin(); it != by_request_.end();) {
        if (it->first.first != msg.request_id) {
            ++it;
            continue;
        }
        const std::uint64_t id = it->second;
        it = by_request_.erase(it);
        ExecutorState& ex = executors_.at(id);
        if (ex.phase != ExecutorPhase::Running) {
            ++counters_.protocol_errors;
            continue;
        }
        set_phase(ex, ExecutorPhase::CoolingOff);
        ex.request_id.reset();
        ++ex.requests_served;
        ex.cool_off_deadline = now + cfg_.runtime.cool_off_ms;
        pool_[{ex.app, ex.task}].push_back(id);
        expiry_[id] = net_.schedule(
            cfg_.runtime.cool_off_ms,
            [this, id] {
                expiry_.erase(id);
                ExecutorState& e = executors_.at(id);
                set_phase(e, ExecutorPhase::Terminated);
                e.terminated_at = net_.now();
                auto& pool = pool_[{e.app, e.task}];
                pool.erase(std::remove(pool.begin(), pool.end(), id), pool.end());
            },
            true);
    }
}

void Actor::init_master(const InitNewMaster& msg) {
    if (hosted_master_) {
        // Idempotent: a running Master answers for itself; one that is still
        // starting announces itself when its bootstrap completes.
        if (hosted_master_running_) send(msg.requester, AdvertiseMaster{*hosted_master_});
        return;
    }
    if (!spawner_) {
        ++counters_.protocol_errors;
        return;
    }
    Master& m = spawner_(self_.host, msg.requester);
    hosted_master_ = m.address();
    net_.schedule(cfg_.runtime.master_startup_ms, [this, &m] {
        m.start();
        hosted_master_running_ = true;
    });
}

std::size_t Actor::pool_size(const std::string& app, const std::string& task) const {
    auto it = pool_.find({app, task});
    return it == pool_.end() ? 0 : it->second.size();
}

std::string Actor::state_dump() const {
    std::map<std::string, int> phases;
    for (const auto& [_, ex] : executors_) ++phases[std::string(to_string(ex.phase))];
    std::ostringstream os;
    os << "actor " << self_.str() << " executors=" << executors_.size() << " wiring=" << wiring_.size()
       << " busy_cores=" << host_.busy_cores() << " queued_jobs=" << host_.queued_jobs();
    for (const auto& [p, n] : phases) os << " " << p << "=" << n;
    return os.str();
}

}  // namespace fogbus
