#include <filesystem>

#include "doctest.h"
#include "fogbus/telemetry.hpp"
#include "generators.hpp"

using namespace fogbus;

namespace {

HostProfile host_at(const std::string& h, TimeMs t, double util = 0.1) {
    HostProfile p;
    p.host = h;
    p.cpu_util = util;
    p.sampled_at = t;
    return p;
}

TimeMs stamp(const LogRecord& r) {
    return std::visit([](const auto& x) { return x.sampled_at; }, r);
}

}  // namespace

TEST_SUITE("telemetry") {

TEST_CASE("ingest of valid profiles") {
    LogStore store;
    std::vector<LogRecord> recs{host_at("a", 1), host_at("b", 1), host_at("c", 1)};
    const IngestResult r = store.ingest(recs);
    CHECK(r.accepted == 3);
    CHECK(r.rejected.empty());
    CHECK(store.resource_count() == 3);
}

TEST_CASE("invalid record is rejected with a reason") {
    LogStore store;
    std::vector<LogRecord> recs{host_at("a", 1, 1.5)};
    const IngestResult r = store.ingest(recs);
    CHECK(r.accepted == 0);
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].first == 0);
    CHECK_FALSE(r.rejected[0].second.empty());
    CHECK(store.resource_count() == 0);
}

TEST_CASE("record validation rules") {
    CHECK(validate_record(host_at("a", 0)) == std::nullopt);
    CHECK(validate_record(host_at("a", -1)));
    CHECK(validate_record(LinkSample{"a", "b", -1.0, 1.0, 0, 0.0}));
    CHECK(validate_record(LinkSample{"a", "b", 1.0, 0.0, 0, 0.0}));
    CHECK(validate_record(ProcessingSample{"t", "h", -0.5, 0.0}));
    CHECK(validate_record(ResponseSample{"", "r", 0, 1.0, 0.0}));
    CHECK(validate_record(ImageRecord{"h", "", true, 0.0}));
}

TEST_CASE("unavailable store throws and appends nothing") {
    LogStore store;
    store.set_available(false);
    std::vector<LogRecord> recs{host_at("a", 1)};
    CHECK_THROWS_AS(store.ingest(recs), LoggerUnavailable);
    CHECK(store.resource_count() == 0);
    store.set_available(true);
    CHECK(store.ingest(recs).accepted == 1);
}

TEST_CASE("log buffer retries after the logger comes back") {
    LogStore store;
    LogBuffer buf;
    buf.push(host_at("a", 1));
    buf.push(host_at("b", 2));
    auto sink = [&](std::span<const LogRecord> r) { store.ingest(r); };
    store.set_available(false);
    CHECK(buf.flush(sink) == 0);
    CHECK(buf.size() == 2);
    store.set_available(true);
    CHECK(buf.flush(sink) == 2);
    CHECK(buf.size() == 0);
    CHECK(store.resource_count() == 2);
}

TEST_CASE("latest profile wins by timestamp") {
    LogStore store;
    std::vector<LogRecord> recs{host_at("h", 2, 0.2), host_at("h", 1, 0.9)};
    store.ingest(recs);
    CHECK(latest_profiles(store).hosts.at("h").cpu_util == 0.2);
}

TEST_CASE("empty store gives empty views") {
    LogStore store;
    const ProfileView v = latest_profiles(store);
    CHECK(v.hosts.empty());
    CHECK(v.links.empty());
    CHECK(v.processing.empty());
}

TEST_CASE("timestamp ties go to the later insertion") {
    LogStore store;
    std::vector<LogRecord> recs{host_at("h", 5, 0.3), host_at("h", 5, 0.4)};
    store.ingest(recs);
    CHECK(latest_profiles(store).hosts.at("h").cpu_util == 0.4);
}

TEST_CASE("link samples are keyed by unordered host pair") {
    ProfileView v;
    v.apply(LinkSample{"b", "a", 1.0, 1e6, 0, 1.0});
    v.apply(LinkSample{"a", "b", 2.0, 1e6, 0, 2.0});
    REQUIRE(v.links.size() == 1);
    CHECK(v.links.at(host_pair("a", "b")).latency_ms == 2.0);
}

TEST_CASE("property: per-table counts match an independent tally") {
    Rng rng(8);
    LogStore store;
    std::size_t images = 0, resources = 0, perf = 0;
    for (int batch = 0; batch < 200; ++batch) {
        std::vector<LogRecord> recs;
        for (std::size_t i = rng.index(8); i > 0; --i) {
            LogRecord r = testgen::record(rng);
            if (rng.chance(0.1)) r = host_at("bad", 1, 2.0);
            recs.push_back(r);
        }
        for (const auto& r : recs) {
            if (validate_record(r)) continue;
            if (std::holds_alternative<ImageRecord>(r)) ++images;
            else if (std::holds_alternative<HostProfile>(r)) ++resources;
            else ++perf;
        }
        store.ingest(recs);
    }
    CHECK(store.image_count() == images);
    CHECK(store.resource_count() == resources);
    CHECK(store.perf_count() == perf);
}

TEST_CASE("property: latest_profiles equals a brute-force scan") {
    Rng rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        LogStore store;
        std::vector<LogRecord> all;
        for (int i = 0; i < 60; ++i) {
            HostProfile p = host_at("h" + std::to_string(rng.index(4)), static_cast<double>(rng.index(5)),
                                    rng.uniform01());
            LinkSample s{"h" + std::to_string(rng.index(3)), "h" + std::to_string(rng.index(3)), rng.uniform(0, 9),
                         1e6, 0, static_cast<double>(rng.index(5))};
            all.push_back(p);
            all.push_back(s);
        }
        store.ingest(all);
        ProfileView expect;
        for (const auto& r : all) {
            if (const auto* p = std::get_if<HostProfile>(&r)) {
                auto it = expect.hosts.find(p->host);
                if (it == expect.hosts.end() || stamp(r) >= it->second.sampled_at) expect.hosts[p->host] = *p;
            } else if (const auto* s = std::get_if<LinkSample>(&r)) {
                const auto key = host_pair(s->host_a, s->host_b);
                auto it = expect.links.find(key);
                if (it == expect.links.end() || stamp(r) >= it->second.sampled_at) expect.links[key] = *s;
            }
        }
        const ProfileView got = latest_profiles(store);
        REQUIRE(got.hosts == expect.hosts);
        REQUIRE(got.links == expect.links);
    }
}

TEST_CASE("record lines round-trip") {
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const LogRecord r = testgen::record(rng);
        REQUIRE(record_from_line(record_to_line(r)) == r);
    }
    CHECK_THROWS_AS(record_from_line("{not json"), InvalidArgument);
}

TEST_CASE("persistence file replays into an equal store") {
    const auto path = std::filesystem::temp_directory_path() / "fogbus_telemetry_replay.log";
    std::filesystem::remove(path);
    Rng rng(6);
    LogStore store;
    store.persist_to(path);
    std::vector<LogRecord> recs;
    for (int i = 0; i < 40; ++i) recs.push_back(testgen::record(rng));
    store.ingest(recs);
    const LogStore back = LogStore::replay(path);
    CHECK(back.image_count() == store.image_count());
    CHECK(back.resource_count() == store.resource_count());
    CHECK(back.perf_count() == store.perf_count());
    CHECK(latest_profiles(back) == latest_profiles(store));
    std::filesystem::remove(path);
}

}
