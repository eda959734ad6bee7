#include <sstream>

#include "fogbus/components.hpp"

namespace fogbus {

std::string_view to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::Completed: return "completed";
        case Outcome::Forwarded: return "forwarded";
        case Outcome::Warned: return "warned";
    }
    return "?";
}

User::User(Transport& net, const AppCatalog& apps, Address self, UserConfig cfg, Address logger, TimeMs timeout_ms)
    : net_(net),
      app_(apps.get(cfg.app)),
      self_(std::move(self)),
      cfg_(std::move(cfg)),
      logger_(std::move(logger)),
      timeout_ms_(timeout_ms),
      serving_master_(cfg_.master) {
    if (cfg_.frame_count == 0) throw InvalidArgument("frame_count must be positive");
    if (cfg_.frame_interval_ms < 0.0 || cfg_.request_gap_ms < 0.0 || cfg_.start_at < 0.0) {
        throw InvalidArgument("user times must be non-negative");
    }
    if (!(timeout_ms_ > 0.0)) throw InvalidArgument("timeout must be positive");
    if (cfg_.frame_size_bytes == 0) cfg_.frame_size_bytes = default_frame_bytes(cfg_.app);
}

void User::send(const Address& to, MessagePayload payload) {
    MessageEnvelope env;
    env.source = self_;
    env.destination = to;
    env.sender_id = ComponentId{ComponentKind::User, 0, self_};
    env.payload = std::move(payload);
    net_.send(std::move(env));
}

void User::start() {
    net_.bind(self_, [this](const MessageEnvelope& env) { on_message(env); });
    if (cfg_.requests == 0) {
        finished_ = true;
        return;
    }
    net_.schedule(cfg_.start_at, [this] { begin_request(); });
}

void User::begin_request() {
    RequestMetrics m;
    m.user = self_.str();
    m.index = current_;
    m.app = cfg_.app;
    m.sent_at = net_.now();
    metrics_.push_back(std::move(m));
    active_ = true;
    rid_.reset();
    entries_.clear();
    frame_sent_.clear();
    frame_results_.clear();
    frames_done_ = 0;

    if (!registered_) {
        registered_ = true;
        send(serving_master_, RegisterUser{cfg_.app, self_});
    } else {
        send(serving_master_, PlacementRequest{current_, cfg_.app});
    }
    // Background, so a stalled run still surfaces as a deadlock.
    timeout_timer_ = net_.schedule(timeout_ms_, [this] { end_request(Outcome::Warned, true); }, true);
}

void User::on_message(const MessageEnvelope& env) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, ForwardToMaster>) {
                if (!active_ || rid_) return;
                ++metrics_.back().forwards;
                serving_master_ = msg.sub_master;
                send(serving_master_, RegisterUser{cfg_.app, self_});
            } else if constexpr (std::is_same_v<T, WarnNoResources>) {
                if (active_ && !rid_) end_request(Outcome::Warned, false);
            } else if constexpr (std::is_same_v<T, ResourcesReady>) {
                on_ready(msg);
            } else if constexpr (std::is_same_v<T, Result>) {
                on_result(msg);
            } else if constexpr (std::is_same_v<T, Probe>) {
                send(env.source, ProbeReply{ComponentKind::User, {}});
            }
        },
        env.payload);
}

void User::on_ready(const ResourcesReady& msg) {
    if (!active_ || rid_) return;
    rid_ = msg.request_id;
    entries_ = msg.entries;
    RequestMetrics& m = metrics_.back();
    m.request_id = msg.request_id.str();
    m.served_by = msg.request_id.master.str();
    m.sft_ms = msg.decided_at - m.sent_at;
    m.rrt_ms = net_.now() - m.sent_at;
    send_frame(0);
    for (std::uint64_t seq = 1; seq < cfg_.frame_count; ++seq) {
        const RequestId rid = *rid_;
        net_.schedule(static_cast<double>(seq) * cfg_.frame_interval_ms, [this, seq, rid] {
            if (rid_ && *rid_ == rid) send_frame(seq);
        });
    }
}

void User::send_frame(std::uint64_t seq) {
    frame_sent_[seq] = net_.now();
    for (const auto& e : entries_) send(e.addr, Data{*rid_, e.task, "", seq, cfg_.frame_size_bytes, {}});
}

void User::on_result(const Result& msg) {
    if (!rid_ || msg.request_id != *rid_) return;
    auto& got = frame_results_[msg.frame_seq];
    if (!got.insert(msg.task).second) return;
    if (got.size() < app_.spec().exit_tasks.size()) return;

    const double response = net_.now() - frame_sent_.at(msg.frame_seq);
    metrics_.back().response_ms.push_back(response);
    send(logger_, LogUpload{{ResponseSample{cfg_.app, rid_->str(), msg.frame_seq, response, net_.now()}}});
    if (++frames_done_ < cfg_.frame_count) return;
    send(rid_->master, RequestDone{*rid_});
    end_request(Outcome::Completed, false);
}

void User::end_request(Outcome outcome, bool timed_out) {
    if (!active_) return;
    net_.cancel(timeout_timer_);
    RequestMetrics& m = metrics_.back();
    m.outcome = outcome;
    m.timed_out = timed_out;
    active_ = false;
    rid_.reset();
    if (++current_ < cfg_.requests) {
        net_.schedule(cfg_.request_gap_ms, [this] { begin_request(); });
    } else {
        finished_ = true;
    }
}

std::string User::state_dump() const {
    std::ostringstream os;
    os << "user " << self_.str() << " request " << current_ << "/" << cfg_.requests << " active=" << active_
       << " master=" << serving_master_.str() << " scheduled=" << (rid_ ? rid_->str() : "-")
       << " frames_done=" << frames_done_ << "/" << cfg_.frame_count;
    return os.str();
}

}  // namespace fogbus
