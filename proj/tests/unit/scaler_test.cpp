#include "doctest.h"
#include "fogbus/scaler.hpp"
#include "generators.hpp"

using namespace fogbus;

namespace {

ScaleCandidate cand(std::uint64_t serial, double latency, double util, double freq) {
    ScaleCandidate c;
    c.actor = ComponentId{ComponentKind::Actor, serial, Address{"10.0.0.1", 5000}};
    c.addr = Address{"10.0.0." + std::to_string(2 + serial), 5001};
    c.latency_ms = latency;
    c.cpu_util = util;
    c.cpu_freq_ghz = freq;
    return c;
}

}  // namespace

TEST_SUITE("scaler") {

TEST_CASE("score formula") {
    CHECK(cand(0, 1, 0.5, 2.0).score() == doctest::Approx(1.0));
    CHECK(cand(0, 1, 0.1, 1.0).score() == doctest::Approx(0.9));
}

TEST_CASE("equal latency: higher score wins") {
    const std::vector<ScaleCandidate> c{cand(0, 5, 0.5, 2.0), cand(1, 5, 0.1, 1.0)};
    CHECK(select_scale_target(c) == 0);
}

TEST_CASE("latency dominates score") {
    const std::vector<ScaleCandidate> c{cand(0, 10, 0.0, 5.0), cand(1, 2, 0.9, 1.0)};
    CHECK(select_scale_target(c) == 1);
}

TEST_CASE("exact ties keep the first candidate") {
    const std::vector<ScaleCandidate> c{cand(0, 3, 0.2, 2.0), cand(1, 3, 0.2, 2.0), cand(2, 3, 0.2, 2.0)};
    CHECK(select_scale_target(c) == 0);
}

TEST_CASE("empty list throws") {
    CHECK_THROWS_AS(select_scale_target(std::span<const ScaleCandidate>{}), NoActorsAvailable);
}

TEST_CASE("property: matches the lexicographic oracle") {
    Rng rng(71);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto c = testgen::scale_candidates(rng, 1 + rng.index(12));
        const std::size_t got = select_scale_target(c);
        REQUIRE(got == testgen::scale_oracle(c));
        for (const auto& x : c) {
            REQUIRE(c[got].latency_ms <= x.latency_ms);
            if (x.latency_ms == c[got].latency_ms) REQUIRE(c[got].score() >= x.score());
        }
    }
}

}
