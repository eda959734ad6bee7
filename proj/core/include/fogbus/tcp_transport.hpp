#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <thread>
#include <vector>

#include "fogbus/netsim.hpp"

namespace fogbus {

/// Real TCP over 127.0.0.1. Each bound Address gets its own listening socket
/// on an ephemeral port; the Address -> port directory is process-local.
/// Handlers and timers run on the thread calling run_until(), one at a time.
/// `time_scale` is virtual milliseconds per wall-clock millisecond.
class TcpTransport final : public Transport {
public:
    explicit TcpTransport(double time_scale = 1.0);
    ~TcpTransport() override;

    TcpTransport(const TcpTransport&) = delete;
    TcpTransport& operator=(const TcpTransport&) = delete;

    void bind(const Address& addr, Handler handler) override;
    void unbind(const Address& addr) override;
    bool is_bound(const Address& addr) const override;
    void send(MessageEnvelope env) override;
    TimeMs now() const override;
    TimerId schedule(TimeMs delay, std::function<void()> fn, bool background = false) override;
    void cancel(TimerId id) override;
    bool run_until(const std::function<bool()>& done, TimeMs limit) override;
    std::uint64_t delivered_count() const override { return delivered_; }
    std::uint64_t dropped_count() const override { return dropped_; }

    /// Loopback port backing `addr`, or 0.
    std::uint16_t local_port(const Address& addr) const;

private:
    struct Listener;
    struct Connection;
    struct Timer {
        TimeMs at;
        TimerId id;
        bool background;
        std::function<void()> fn;
    };

    void accept_loop(std::shared_ptr<Listener> listener);
    void read_loop(int fd);
    void post(MessageEnvelope env);
    std::shared_ptr<Connection> connection_to(const Address& src, const Address& dst);

    const double time_scale_;
    const std::chrono::steady_clock::time_point epoch_;

    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::map<Address, Handler> handlers_;
    std::map<Address, std::shared_ptr<Listener>> listeners_;
    std::map<std::pair<std::string, Address>, std::shared_ptr<Connection>> connections_;
    std::deque<MessageEnvelope> inbox_;
    std::vector<Timer> timers_;
    TimerId next_timer_ = 0;
    std::size_t in_flight_ = 0;  // sent, not yet handled

    std::mutex threads_mu_;
    std::vector<std::thread> threads_;
    std::vector<int> reader_fds_;
    std::atomic<bool> stopping_{false};

    std::atomic<std::uint64_t> delivered_{0};
    std::atomic<std::uint64_t> dropped_{0};
};

}  // namespace fogbus
