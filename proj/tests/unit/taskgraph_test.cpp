#include <map>
#include <set>

#include "doctest.h"
#include "fogbus/taskgraph.hpp"
#include "fogbus/rng.hpp"

using namespace fogbus;

namespace {

AppSpec path_app() {
    AppSpec a;
    a.app_name = "path";
    a.tasks = {{"A", 1.0, 10}, {"B", 2.0, 10}, {"C", 3.0, 10}};
    a.edges = {{"A", "B"}, {"B", "C"}};
    a.entry_tasks = {"A"};
    a.exit_tasks = {"C"};
    return a;
}

/// Position of every task in `order`.
std::vector<std::size_t> positions(const std::vector<std::size_t>& order) {
    std::vector<std::size_t> pos(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    return pos;
}

}  // namespace

TEST_SUITE("taskgraph") {

TEST_CASE("path levels") {
    CHECK(topo_levels(path_app()) == std::vector<std::vector<std::string>>{{"A"}, {"B"}, {"C"}});
}

TEST_CASE("edge both ways is a cycle") {
    AppSpec a = path_app();
    a.edges.emplace_back("B", "A");
    CHECK_THROWS_AS(topo_levels(a), CyclicDependency);
    CHECK_THROWS_AS(AppGraph{a}, CyclicDependency);
}

TEST_CASE("invalid apps are rejected") {
    AppSpec a = path_app();
    a.tasks[1].compute_cost = 0.0;
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
    a = path_app();
    a.edges.emplace_back("A", "Z");
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
    a = path_app();
    a.entry_tasks.clear();
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
    a = path_app();
    a.exit_tasks = {"Q"};
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
    a = path_app();
    a.tasks.push_back(a.tasks[0]);
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
    a = path_app();
    a.tasks.push_back({"orphan", 1.0, 0});
    CHECK_THROWS_AS(AppGraph{a}, InvalidApp);
}

TEST_CASE("game of life shape") {
    const AppSpec spec = gol_app();
    const AppGraph g(spec);
    CHECK(g.name() == "GameOfLife");
    CHECK(g.size() == 62);
    const auto levels = topo_levels(spec);
    REQUIRE(levels.size() == 31);
    double prev_cost = 0.0;
    for (std::size_t l = 0; l < levels.size(); ++l) {
        REQUIRE(levels[l].size() == 2);
        const double c0 = g.task(*g.index_of(levels[l][0])).compute_cost;
        const double c1 = g.task(*g.index_of(levels[l][1])).compute_cost;
        CHECK(c0 == c1);
        if (l > 0) CHECK(c0 == doctest::Approx(prev_cost / 2.0));
        prev_cost = c0;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!g.is_entry(i)) CHECK(g.parents(i).size() >= 1);
    }
    CHECK(gol_app() == spec);
}

TEST_CASE("video ocr pipeline") {
    const AppGraph g(vocr_app());
    CHECK(g.name() == "VOCR");
    CHECK(g.size() <= 5);
    CHECK(g.size() < AppGraph(gol_app()).size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(g.parents(i).size() <= 1);
        CHECK(g.children(i).size() <= 1);
    }
    CHECK(g.spec().entry_tasks == std::vector<std::string>{g.task(g.topo_order().front()).name});
    CHECK(g.spec().exit_tasks == std::vector<std::string>{g.task(g.topo_order().back()).name});
    const auto ocr = *g.index_of("OCR");
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (i != ocr) CHECK(g.task(i).compute_cost < g.task(ocr).compute_cost);
    }
}

TEST_CASE("catalog lookups") {
    const AppCatalog c = AppCatalog::builtin();
    CHECK(c.contains("GameOfLife"));
    CHECK(c.contains("VOCR"));
    CHECK_THROWS_AS(c.get("nope"), InvalidArgument);
    CHECK(default_frame_bytes("GameOfLife") > 0);
}

TEST_CASE("property: random DAGs give valid orders and levels") {
    Rng rng(13);
    for (int trial = 0; trial < 300; ++trial) {
        AppSpec a;
        a.app_name = "r";
        const std::size_t n = 1 + rng.index(10);
        for (std::size_t i = 0; i < n; ++i) a.tasks.push_back({"t" + std::to_string(i), 1.0, 0});
        // Edges only go from lower to higher index before shuffling names.
        for (std::size_t c = 1; c < n; ++c) {
            for (std::size_t p = 0; p < c; ++p) {
                if (rng.chance(0.3)) a.edges.emplace_back(a.tasks[p].name, a.tasks[c].name);
            }
        }
        std::set<std::string> has_parent;
        for (const auto& e : a.edges) has_parent.insert(e.second);
        for (const auto& t : a.tasks) {
            if (!has_parent.count(t.name)) a.entry_tasks.push_back(t.name);
        }
        a.exit_tasks = {a.tasks.back().name};
        for (std::size_t i = n; i > 1; --i) std::swap(a.tasks[i - 1], a.tasks[rng.index(i)]);

        const AppGraph g(a);
        const auto pos = positions(g.topo_order());
        for (std::size_t i = 0; i < g.size(); ++i) {
            for (std::size_t p : g.parents(i)) REQUIRE(pos[p] < pos[i]);
        }
        std::map<std::string, std::size_t> level_of;
        const auto levels = topo_levels(a);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            for (const auto& t : levels[l]) level_of[t] = l;
        }
        REQUIRE(level_of.size() == n);
        for (const auto& [p, c] : a.edges) REQUIRE(level_of[p] < level_of[c]);
    }
}

}
