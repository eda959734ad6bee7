#include "fogbus/telemetry.hpp"

#include <cmath>
#include <fstream>

#include "json_codec.hpp"

namespace fogbus {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool unit_interval(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

TimeMs sampled_at(const LogRecord& r) {
    return std::visit([](const auto& x) { return x.sampled_at; }, r);
}

}  // namespace

std::optional<std::string> validate_record(const LogRecord& record) {
    using R = std::optional<std::string>;
    if (!non_negative(sampled_at(record))) return R{"sampled_at must be a non-negative time"};
    return std::visit(
        Overloaded{
            [](const HostProfile& p) -> R {
                if (p.host.empty()) return "host is empty";
                if (p.cpu_cores <= 0) return "cpu_cores must be positive";
                if (!(std::isfinite(p.cpu_freq_ghz) && p.cpu_freq_ghz > 0.0)) return "cpu_freq_ghz must be positive";
                if (!unit_interval(p.cpu_util)) return "cpu_util outside [0,1]";
                if (p.mem_capacity_mb <= 0) return "mem_capacity_mb must be positive";
                if (!unit_interval(p.mem_util)) return "mem_util outside [0,1]";
                return std::nullopt;
            },
            [](const ImageRecord& r) -> R {
                if (r.host.empty() || r.task_name.empty()) return "host and task_name are required";
                return std::nullopt;
            },
            [](const LinkSample& s) -> R {
                if (s.host_a.empty() || s.host_b.empty()) return "link endpoints are required";
                if (!non_negative(s.latency_ms)) return "latency_ms must be >= 0";
                if (!(std::isfinite(s.data_rate_bps) && s.data_rate_bps > 0.0)) return "data_rate_bps must be > 0";
                if (s.packet_size < 0) return "packet_size must be >= 0";
                return std::nullopt;
            },
            [](const ProcessingSample& s) -> R {
                if (s.task_name.empty() || s.host.empty()) return "task_name and host are required";
                if (!non_negative(s.processing_ms)) return "processing_ms must be >= 0";
                return std::nullopt;
            },
            [](const ResponseSample& s) -> R {
                if (s.app.empty()) return "app is required";
                if (!non_negative(s.response_ms)) return "response_ms must be >= 0";
                return std::nullopt;
            },
        },
        record);
}

namespace detail {

Json to_json(const LogRecord& r) {
    return std::visit(
        Overloaded{
            [](const HostProfile& p) {
                return Json{{"type", "HostProfile"},
                            {"host", p.host},
                            {"cpu_cores", p.cpu_cores},
                            {"cpu_freq_ghz", finite(p.cpu_freq_ghz, "cpu_freq_ghz")},
                            {"cpu_util", finite(p.cpu_util, "cpu_util")},
                            {"mem_capacity_mb", p.mem_capacity_mb},
                            {"mem_util", finite(p.mem_util, "mem_util")},
                            {"sampled_at", finite(p.sampled_at, "sampled_at")}};
            },
            [](const ImageRecord& r) {
                return Json{{"type", "ImageRecord"},
                            {"host", r.host},
                            {"task_name", r.task_name},
                            {"available", r.available},
                            {"sampled_at", finite(r.sampled_at, "sampled_at")}};
            },
            [](const LinkSample& s) {
                return Json{{"type", "LinkSample"},
                            {"host_a", s.host_a},
                            {"host_b", s.host_b},
                            {"latency_ms", finite(s.latency_ms, "latency_ms")},
                            {"data_rate_bps", finite(s.data_rate_bps, "data_rate_bps")},
                            {"packet_size", s.packet_size},
                            {"sampled_at", finite(s.sampled_at, "sampled_at")}};
            },
            [](const ProcessingSample& s) {
                return Json{{"type", "ProcessingSample"},
                            {"task_name", s.task_name},
                            {"host", s.host},
                            {"processing_ms", finite(s.processing_ms, "processing_ms")},
                            {"sampled_at", finite(s.sampled_at, "sampled_at")}};
            },
            [](const ResponseSample& s) {
                return Json{{"type", "ResponseSample"},
                            {"app", s.app},
                            {"request_id", s.request_id},
                            {"frame_seq", s.frame_seq},
                            {"response_ms", finite(s.response_ms, "response_ms")},
                            {"sampled_at", finite(s.sampled_at, "sampled_at")}};
            },
        },
        r);
}

LogRecord record_from_json(const Json& j) {
    ObjReader in(j, "record");
    const std::string type = in.str("type");
    LogRecord out;
    if (type == "HostProfile") {
        HostProfile p;
        p.host = in.str("host");
        p.cpu_cores = in.i64("cpu_cores");
        p.cpu_freq_ghz = in.num("cpu_freq_ghz");
        p.cpu_util = in.num("cpu_util");
        p.mem_capacity_mb = in.i64("mem_capacity_mb");
        p.mem_util = in.num("mem_util");
        p.sampled_at = in.num("sampled_at");
        out = p;
    } else if (type == "ImageRecord") {
        ImageRecord r;
        r.host = in.str("host");
        r.task_name = in.str("task_name");
        r.available = in.boolean("available");
        r.sampled_at = in.num("sampled_at");
        out = r;
    } else if (type == "LinkSample") {
        LinkSample s;
        s.host_a = in.str("host_a");
        s.host_b = in.str("host_b");
        s.latency_ms = in.num("latency_ms");
        s.data_rate_bps = in.num("data_rate_bps");
        s.packet_size = in.i64("packet_size");
        s.sampled_at = in.num("sampled_at");
        out = s;
    } else if (type == "ProcessingSample") {
        ProcessingSample s;
        s.task_name = in.str("task_name");
        s.host = in.str("host");
        s.processing_ms = in.num("processing_ms");
        s.sampled_at = in.num("sampled_at");
        out = s;
    } else if (type == "ResponseSample") {
        ResponseSample s;
        s.app = in.str("app");
        s.request_id = in.str("request_id");
        s.frame_seq = in.u64("frame_seq");
        s.response_ms = in.num("response_ms");
        s.sampled_at = in.num("sampled_at");
        out = s;
    } else {
        throw CodecError("record: unknown type '" + type + "'");
    }
    in.finish();
    return out;
}

}  // namespace detail

std::string record_to_line(const LogRecord& record) {
    try {
        return detail::to_json(record).dump();
    } catch (const detail::CodecError& e) {
        throw InvalidArgument(e.what());
    }
}

LogRecord record_from_line(std::string_view line) {
    try {
        return detail::record_from_json(detail::Json::parse(line));
    } catch (const detail::CodecError& e) {
        throw InvalidArgument(e.what());
    } catch (const detail::Json::exception& e) {
        throw InvalidArgument(e.what());
    }
}

// ---------------------------------------------------------------------------

void ProfileView::apply(const LogRecord& record) {
    auto keep_latest = [](auto& map, const auto& key, const auto& value) {
        auto it = map.find(key);
        if (it == map.end() || value.sampled_at >= it->second.sampled_at) map.insert_or_assign(key, value);
    };
    std::visit(Overloaded{
                   [&](const HostProfile& p) { keep_latest(hosts, p.host, p); },
                   [&](const LinkSample& s) { keep_latest(links, host_pair(s.host_a, s.host_b), s); },
                   [&](const ProcessingSample& s) {
                       keep_latest(processing, HostPair{s.task_name, s.host}, s);
                   },
                   [](const ImageRecord&) {},
                   [](const ResponseSample&) {},
               },
               record);
}

std::vector<LogRecord> ProfileView::to_records() const {
    std::vector<LogRecord> out;
    out.reserve(hosts.size() + links.size() + processing.size());
    for (const auto& [_, p] : hosts) out.emplace_back(p);
    for (const auto& [_, l] : links) out.emplace_back(l);
    for (const auto& [_, s] : processing) out.emplace_back(s);
    return out;
}

// ---------------------------------------------------------------------------

IngestResult LogStore::ingest(std::span<const LogRecord> records) {
    std::lock_guard lock(mu_);
    if (!available_) throw LoggerUnavailable();
    IngestResult result;
    std::ofstream persist;
    if (persist_path_) persist.open(*persist_path_, std::ios::app);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const LogRecord& r = records[i];
        if (auto reason = validate_record(r)) {
            result.rejected.emplace_back(i, *reason);
            continue;
        }
        std::visit(Overloaded{
                       [&](const HostProfile& p) { resources_.push_back(p); },
                       [&](const ImageRecord& x) { images_.push_back(x); },
                       [&](const LinkSample& s) { perf_.emplace_back(s); },
                       [&](const ProcessingSample& s) { perf_.emplace_back(s); },
                       [&](const ResponseSample& s) { perf_.emplace_back(s); },
                   },
                   r);
        if (persist.is_open()) persist << record_to_line(r) << '\n';
        ++result.accepted;
    }
    return result;
}

LogSnapshot LogStore::snapshot() const {
    std::lock_guard lock(mu_);
    return LogSnapshot{images_, resources_, perf_};
}

std::size_t LogStore::image_count() const {
    std::lock_guard lock(mu_);
    return images_.size();
}

std::size_t LogStore::resource_count() const {
    std::lock_guard lock(mu_);
    return resources_.size();
}

std::size_t LogStore::perf_count() const {
    std::lock_guard lock(mu_);
    return perf_.size();
}

void LogStore::set_available(bool available) {
    std::lock_guard lock(mu_);
    available_ = available;
}

LogStore::LogStore(LogStore&& other) noexcept {
    std::lock_guard lock(other.mu_);
    images_ = std::move(other.images_);
    resources_ = std::move(other.resources_);
    perf_ = std::move(other.perf_);
    available_ = other.available_;
    persist_path_ = std::move(other.persist_path_);
}

bool LogStore::available() const {
    std::lock_guard lock(mu_);
    return available_;
}

void LogStore::persist_to(std::filesystem::path path) {
    std::lock_guard lock(mu_);
    persist_path_ = std::move(path);
}

LogStore LogStore::replay(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open log file " + path.string());
    std::vector<LogRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(record_from_line(line));
    }
    LogStore store;
    store.ingest(records);
    return store;
}

ProfileView latest_profiles(const LogSnapshot& snapshot) {
    ProfileView view;
    for (const auto& p : snapshot.resources) view.apply(LogRecord{p});
    for (const auto& r : snapshot.perf) {
        std::visit([&](const auto& x) { view.apply(LogRecord{x}); }, r);
    }
    return view;
}

ProfileView latest_profiles(const LogStore& store) { return latest_profiles(store.snapshot()); }

}  // namespace fogbus
