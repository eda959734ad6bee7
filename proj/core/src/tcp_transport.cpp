#include "fogbus/tcp_transport.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace fogbus {

struct TcpTransport::Listener {
    int fd = -1;
    std::uint16_t port = 0;
};

struct TcpTransport::Connection {
    int fd = -1;
    std::mutex write_mu;
};

namespace {

bool write_all(int fd, const std::uint8_t* data, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
    return true;
}

}  // namespace

TcpTransport::TcpTransport(double time_scale)
    : time_scale_(time_scale), epoch_(std::chrono::steady_clock::now()) {
    if (!(time_scale > 0.0)) throw InvalidArgument("time_scale must be positive");
}

TcpTransport::~TcpTransport() {
    stopping_ = true;
    {
        std::lock_guard lock(mu_);
        for (auto& [_, l] : listeners_) ::shutdown(l->fd, SHUT_RDWR);
        for (auto& [_, c] : connections_) ::shutdown(c->fd, SHUT_RDWR);
    }
    {
        std::lock_guard lock(threads_mu_);
        for (int fd : reader_fds_) ::shutdown(fd, SHUT_RDWR);
    }
    for (auto& t : threads_) {
        if (t.joinable()) t.join();
    }
    std::lock_guard lock(mu_);
    for (auto& [_, l] : listeners_) ::close(l->fd);
    for (auto& [_, c] : connections_) ::close(c->fd);
    for (int fd : reader_fds_) ::close(fd);
}

TimeMs TcpTransport::now() const {
    const auto wall = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - epoch_);
    return wall.count() * time_scale_;
}

void TcpTransport::bind(const Address& addr, Handler handler) {
    auto listener = std::make_shared<Listener>();
    listener->fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listener->fd < 0) throw Error(std::string("socket: ") + std::strerror(errno));
    int one = 1;
    ::setsockopt(listener->fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = 0;
    if (::bind(listener->fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0 || ::listen(listener->fd, 64) < 0) {
        const std::string err = std::strerror(errno);
        ::close(listener->fd);
        throw Error("bind/listen: " + err);
    }
    socklen_t len = sizeof(sa);
    ::getsockname(listener->fd, reinterpret_cast<sockaddr*>(&sa), &len);
    listener->port = ntohs(sa.sin_port);
    {
        std::lock_guard lock(mu_);
        if (listeners_.count(addr)) {
            ::close(listener->fd);
            handlers_[addr] = std::move(handler);
            return;
        }
        handlers_[addr] = std::move(handler);
        listeners_[addr] = listener;
    }
    std::lock_guard lock(threads_mu_);
    threads_.emplace_back([this, listener] { accept_loop(listener); });
}

void TcpTransport::unbind(const Address& addr) {
    std::lock_guard lock(mu_);
    handlers_.erase(addr);
    if (auto it = listeners_.find(addr); it != listeners_.end()) {
        ::shutdown(it->second->fd, SHUT_RDWR);
        listeners_.erase(it);
    }
}

bool TcpTransport::is_bound(const Address& addr) const {
    std::lock_guard lock(mu_);
    return handlers_.count(addr) > 0;
}

std::uint16_t TcpTransport::local_port(const Address& addr) const {
    std::lock_guard lock(mu_);
    auto it = listeners_.find(addr);
    return it == listeners_.end() ? 0 : it->second->port;
}

void TcpTransport::accept_loop(std::shared_ptr<Listener> listener) {
    while (!stopping_) {
        const int fd = ::accept(listener->fd, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        std::lock_guard lock(threads_mu_);
        if (stopping_) {
            ::close(fd);
            return;
        }
        reader_fds_.push_back(fd);
        threads_.emplace_back([this, fd] { read_loop(fd); });
    }
}

void TcpTransport::read_loop(int fd) {
    Bytes buffer;
    std::uint8_t chunk[64 * 1024];
    for (;;) {
        const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return;
        buffer.insert(buffer.end(), chunk, chunk + n);
        std::size_t offset = 0;
        for (;;) {
            std::optional<Decoded> d;
            try {
                d = try_decode(std::span<const std::uint8_t>(buffer).subspan(offset));
            } catch (const ProtocolError&) {
                // A corrupt stream cannot be resynchronised.
                ::shutdown(fd, SHUT_RDWR);
                return;
            }
            if (!d) break;
            offset += d->consumed;
            post(std::move(d->envelope));
        }
        buffer.erase(buffer.begin(), buffer.begin() + static_cast<std::ptrdiff_t>(offset));
    }
}

void TcpTransport::post(MessageEnvelope env) {
    {
        std::lock_guard lock(mu_);
        inbox_.push_back(std::move(env));
    }
    cv_.notify_all();
}

std::shared_ptr<TcpTransport::Connection> TcpTransport::connection_to(const Address& src, const Address& dst) {
    std::uint16_t port = 0;
    {
        std::lock_guard lock(mu_);
        auto key = std::make_pair(src.host, dst);
        if (auto it = connections_.find(key); it != connections_.end()) return it->second;
        auto lit = listeners_.find(dst);
        if (lit == listeners_.end()) return nullptr;
        port = lit->second->port;
    }
    auto conn = std::make_shared<Connection>();
    conn->fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (conn->fd < 0) return nullptr;
    int one = 1;
    ::setsockopt(conn->fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    sockaddr_in sa{};
    sa.sin_family = AF_INET;
    sa.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    sa.sin_port = htons(port);
    if (::connect(conn->fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) < 0) {
        ::close(conn->fd);
        return nullptr;
    }
    std::lock_guard lock(mu_);
    auto [it, inserted] = connections_.emplace(std::make_pair(src.host, dst), conn);
    if (!inserted) ::close(conn->fd);
    return it->second;
}

void TcpTransport::send(MessageEnvelope env) {
    env.sent_at = now();
    const Bytes frame = encode(env);
    auto conn = connection_to(env.source, env.destination);
    if (!conn) {
        ++dropped_;
        return;
    }
    {
        std::lock_guard lock(mu_);
        ++in_flight_;
    }
    bool ok = false;
    {
        std::lock_guard wlock(conn->write_mu);
        ok = write_all(conn->fd, frame.data(), frame.size());
    }
    if (!ok) {
        std::lock_guard lock(mu_);
        --in_flight_;
        ++dropped_;
    }
}

TimerId TcpTransport::schedule(TimeMs delay, std::function<void()> fn, bool background) {
    TimerId id;
    {
        std::lock_guard lock(mu_);
        id = ++next_timer_;
        timers_.push_back(Timer{now() + std::max(0.0, delay), id, background, std::move(fn)});
    }
    cv_.notify_all();
    return id;
}

void TcpTransport::cancel(TimerId id) {
    std::lock_guard lock(mu_);
    std::erase_if(timers_, [id](const Timer& t) { return t.id == id; });
}

bool TcpTransport::run_until(const std::function<bool()>& done, TimeMs limit) {
    for (;;) {
        if (done()) return true;
        std::unique_lock lock(mu_);
        if (!inbox_.empty()) {
            MessageEnvelope env = std::move(inbox_.front());
            inbox_.pop_front();
            --in_flight_;
            auto it = handlers_.find(env.destination);
            if (it == handlers_.end()) {
                ++dropped_;
                continue;
            }
            Handler handler = it->second;
            lock.unlock();
            ++delivered_;
            handler(env);
            continue;
        }
        const TimeMs t = now();
        auto due = std::min_element(timers_.begin(), timers_.end(), [](const Timer& a, const Timer& b) {
            return a.at != b.at ? a.at < b.at : a.id < b.id;
        });
        if (due != timers_.end() && due->at <= t) {
            auto fn = std::move(due->fn);
            timers_.erase(due);
            lock.unlock();
            fn();
            continue;
        }
        const bool foreground_timers =
            std::any_of(timers_.begin(), timers_.end(), [](const Timer& x) { return !x.background; });
        if (!foreground_timers && in_flight_ == 0) return false;
        if (t > limit) return false;
        TimeMs wait_ms = 10.0;
        if (due != timers_.end()) wait_ms = std::min(wait_ms, (due->at - t) / time_scale_);
        cv_.wait_for(lock, std::chrono::duration<double, std::milli>(std::max(0.0, wait_ms)));
    }
}

}  // namespace fogbus
