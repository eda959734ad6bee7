#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "fogbus/common.hpp"

namespace fogbus {

// ---------------------------------------------------------------------------
// Record types of the three stores: images, resources, system performance.
// ---------------------------------------------------------------------------

struct HostProfile {
    std::string host;
    std::int64_t cpu_cores = 1;
    double cpu_freq_ghz = 1.0;
    double cpu_util = 0.0;
    std::int64_t mem_capacity_mb = 1024;
    double mem_util = 0.0;
    TimeMs sampled_at = 0.0;

    /// Abstract work units per millisecond this host sustains.
    double execution_rate() const {
        return cpu_freq_ghz * static_cast<double>(cpu_cores) * (1.0 - cpu_util);
    }

    bool operator==(const HostProfile&) const = default;
};

struct ImageRecord {
    std::string host;
    std::string task_name;
    bool available = true;
    TimeMs sampled_at = 0.0;

    bool operator==(const ImageRecord&) const = default;
};

struct LinkSample {
    std::string host_a;
    std::string host_b;
    double latency_ms = 0.0;
    double data_rate_bps = 1.0;
    std::int64_t packet_size = 0;
    TimeMs sampled_at = 0.0;

    bool operator==(const LinkSample&) const = default;
};

struct ProcessingSample {
    std::string task_name;
    std::string host;
    double processing_ms = 0.0;
    TimeMs sampled_at = 0.0;

    bool operator==(const ProcessingSample&) const = default;
};

struct ResponseSample {
    std::string app;
    std::string request_id;
    std::uint64_t frame_seq = 0;
    double response_ms = 0.0;
    TimeMs sampled_at = 0.0;

    bool operator==(const ResponseSample&) const = default;
};

using PerfRecord = std::variant<LinkSample, ProcessingSample, ResponseSample>;
using LogRecord = std::variant<HostProfile, ImageRecord, LinkSample, ProcessingSample, ResponseSample>;

/// Reason a record violates its invariants, or nullopt when valid.
std::optional<std::string> validate_record(const LogRecord& record);

/// One canonical text line (no trailing newline).
std::string record_to_line(const LogRecord& record);
/// Throws InvalidArgument on malformed input.
LogRecord record_from_line(std::string_view line);

// ---------------------------------------------------------------------------
// Profiler view: latest record per key.
// ---------------------------------------------------------------------------

using HostPair = std::pair<std::string, std::string>;

/// Unordered pair key, smaller host first.
inline HostPair host_pair(const std::string& a, const std::string& b) {
    return a < b ? HostPair{a, b} : HostPair{b, a};
}

struct ProfileView {
    std::map<std::string, HostProfile> hosts;
    std::map<HostPair, LinkSample> links;  // key via host_pair()
    std::map<HostPair, ProcessingSample> processing;  // ordered (task, host)

    /// Applies one record with the latest-wins rule: greater sampled_at
    /// replaces, equal sampled_at replaces too (later insertion wins).
    void apply(const LogRecord& record);
    void apply(std::span<const LogRecord> records) {
        for (const auto& r : records) apply(r);
    }

    /// Flattened form, in deterministic key order.
    std::vector<LogRecord> to_records() const;

    bool operator==(const ProfileView&) const = default;
};

// ---------------------------------------------------------------------------
// Append-only store backing the Remote Logger.
// ---------------------------------------------------------------------------

class LoggerUnavailable : public Error {
public:
    LoggerUnavailable() : Error("remote logger store unavailable") {}
};

struct IngestResult {
    std::size_t accepted = 0;
    std::vector<std::pair<std::size_t, std::string>> rejected;  // (index, reason)
};

struct LogSnapshot {
    std::vector<ImageRecord> images;
    std::vector<HostProfile> resources;
    std::vector<PerfRecord> perf;
};

class LogStore {
public:
    LogStore() = default;
    LogStore(LogStore&& other) noexcept;
    LogStore& operator=(LogStore&&) = delete;

    /// Appends all valid records. Throws LoggerUnavailable when the store is
    /// marked unavailable, in which case nothing is appended.
    IngestResult ingest(std::span<const LogRecord> records);

    LogSnapshot snapshot() const;

    std::size_t image_count() const;
    std::size_t resource_count() const;
    std::size_t perf_count() const;

    void set_available(bool available);
    bool available() const;

    /// Mirrors every accepted record to `path`, one line each.
    void persist_to(std::filesystem::path path);
    /// Rebuilds a store from a persistence file.
    static LogStore replay(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    std::vector<ImageRecord> images_;
    std::vector<HostProfile> resources_;
    std::vector<PerfRecord> perf_;
    bool available_ = true;
    std::optional<std::filesystem::path> persist_path_;
};

/// Latest record per key over a store snapshot, insertion order breaking
/// timestamp ties.
ProfileView latest_profiles(const LogSnapshot& snapshot);
ProfileView latest_profiles(const LogStore& store);

/// Component-side buffer that retries uploads the next period when the
/// logger rejects them as unavailable.
class LogBuffer {
public:
    void push(LogRecord record) { pending_.push_back(std::move(record)); }

    /// Hands pending records to `sink`; keeps them if it throws
    /// LoggerUnavailable. Returns the number of records delivered.
    template <typename Sink>
    std::size_t flush(Sink&& sink) {
        if (pending_.empty()) return 0;
        try {
            sink(std::span<const LogRecord>(pending_));
        } catch (const LoggerUnavailable&) {
            return 0;
        }
        const std::size_t n = pending_.size();
        pending_.clear();
        return n;
    }

    std::size_t size() const { return pending_.size(); }

private:
    std::vector<LogRecord> pending_;
};

}  // namespace fogbus
