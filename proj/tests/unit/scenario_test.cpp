#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "fogbus/experiments.hpp"
#include "fogbus/report.hpp"
#include "fogbus/scenario.hpp"
#include "json.hpp"

using namespace fogbus;
using nlohmann::json;

namespace {

json preset_json() { return json::parse(scenario_to_json(reuse_preset("VOCR"))); }

std::string config_error_path(const json& j) {
    try {
        parse_scenario(j.dump());
    } catch (const ConfigError& e) {
        return e.path();
    }
    return "<none>";
}

std::size_t lines(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("presets parse and validate") {
    for (const auto& c : {convergence_preset("ohnsga", 1), scalability_preset(4, true), reuse_preset("GameOfLife")}) {
        CHECK_NOTHROW(c.validate());
        CHECK_NOTHROW(parse_scenario(scenario_to_json(c)));
    }
}

TEST_CASE("scenario JSON round-trips") {
    for (const auto& c : {convergence_preset("nsga2", 3), scalability_preset(8, false), reuse_preset("VOCR")}) {
        const std::string text = scenario_to_json(c);
        CHECK(scenario_to_json(parse_scenario(text)) == text);
    }
    ScenarioConfig c = reuse_preset("GameOfLife");
    AppSpec a;
    a.app_name = "pair";
    a.tasks = {TaskSpec{"A", 10.0, 100}, TaskSpec{"B", 20.0, 200}};
    a.edges = {{"A", "B"}};
    a.entry_tasks = {"A"};
    a.exit_tasks = {"B"};
    c.apps = {a};
    c.users[0].config.app = "pair";
    c.links = {LinkEntry{"10.0.0.2", "10.0.1.2", LinkSpec{7.5, 3e7}}};
    const ScenarioConfig back = parse_scenario(scenario_to_json(c));
    REQUIRE(back.apps.size() == 1);
    CHECK(back.apps[0] == a);
    REQUIRE(back.links.size() == 1);
    CHECK(back.links[0].spec == LinkSpec{7.5, 3e7});
}

TEST_CASE("config errors name the offending field") {
    json j = preset_json();
    j["users"][0]["app"] = "Nope";
    CHECK(config_error_path(j) == "users[0].app");

    j = preset_json();
    j["topology"]["hosts"][0]["cpu_cores"] = 0;
    CHECK(config_error_path(j) == "topology.hosts[0].cpu_cores");

    j = preset_json();
    j["topology"]["hosts"][0]["background_util"] = 1.0;
    CHECK(config_error_path(j) == "topology.hosts[0].background_util");

    j = preset_json();
    j["components"]["masters"] = json::array();
    CHECK(config_error_path(j) == "components.masters");

    j = preset_json();
    j["components"]["actors"][0]["host"] = "10.0.0.99";
    CHECK(config_error_path(j) == "components.actors[0].host");

    j = preset_json();
    j["policy"] = "simulated-annealing";
    CHECK(config_error_path(j) == "policy");

    j = preset_json();
    j["users"][0]["frame_count"] = 0;
    CHECK(config_error_path(j) == "users[0].frame_count");

    j = preset_json();
    j["topology"]["links"] = json::array({{{"a", "10.0.0.2"}, {"b", "10.9.9.9"}, {"latency_ms", 1.0},
                                           {"data_rate_bps", 1e8}}});
    CHECK(config_error_path(j) == "topology.links[0].b");

    j = preset_json();
    j["surprise"] = 1;
    CHECK(config_error_path(j) == "surprise");

    j = preset_json();
    j["time_limit_ms"] = "soon";
    CHECK(config_error_path(j) == "time_limit_ms");

    CHECK(config_error_path(json::array()) == "$");
    CHECK_THROWS_AS(parse_scenario("{ not json"), ConfigError);
}

TEST_CASE("missing scenario file is an IoError") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/dir/scenario.json"), IoError);
}

TEST_CASE("summarize uses nearest-rank percentiles") {
    const Stats empty = summarize({});
    CHECK(empty.count == 0);
    CHECK(empty.mean == 0.0);

    const Stats one = summarize({4.0});
    CHECK(one.median == 4.0);
    CHECK(one.p95 == 4.0);

    std::vector<double> v;
    for (int i = 20; i >= 1; --i) v.push_back(i);
    const Stats s = summarize(v);
    CHECK(s.count == 20);
    CHECK(s.mean == doctest::Approx(10.5));
    CHECK(s.median == doctest::Approx(10.5));
    CHECK(s.p95 == 19.0);

    const Stats odd = summarize({3.0, 1.0, 2.0});
    CHECK(odd.median == 2.0);
    CHECK(odd.p95 == 3.0);
}

TEST_CASE("equal seeds give byte-identical reports") {
    const ScenarioConfig c = convergence_preset("ohnsga", 4);
    const std::string a = report_to_json(run_scenario(c));
    const std::string b = report_to_json(run_scenario(c));
    CHECK(a == b);
    const std::string other = report_to_json(run_scenario(convergence_preset("ohnsga", 5)));
    CHECK(other != a);
}

TEST_CASE("emit_report writes every file with one row per item") {
    const MetricsReport r = run_scenario(reuse_preset("VOCR"));
    TempDir dir("fogbus_emit_report_test");
    const auto written = emit_report(r, dir.path / "nested");
    REQUIRE(written.size() == 5);
    for (const auto& p : written) CHECK(std::filesystem::exists(p));

    std::size_t responses = 0;
    for (const auto& m : r.requests) responses += m.response_ms.size();
    std::size_t points = 0;
    for (const auto& s : r.convergence) points += s.best.size();
    CHECK(lines(dir.path / "nested" / "sft.csv") == 1 + r.requests.size());
    CHECK(lines(dir.path / "nested" / "rrt.csv") == 1 + r.requests.size());
    CHECK(lines(dir.path / "nested" / "response.csv") == 1 + responses);
    CHECK(lines(dir.path / "nested" / "convergence.csv") == 1 + points);

    std::ifstream in(dir.path / "nested" / "report.json");
    std::stringstream body;
    body << in.rdbuf();
    CHECK(body.str() == report_to_json(r));
    const json j = json::parse(body.str());
    CHECK(j.is_object());
}

TEST_CASE("one convergence point per iteration and decision") {
    ScenarioConfig c = convergence_preset("nsga2", 2);
    const MetricsReport r = run_scenario(c);
    REQUIRE_FALSE(r.convergence.empty());
    for (const auto& s : r.convergence) {
        CHECK(s.best.size() == c.ga.max_iteration_num);
        CHECK(s.policy == "nsga2");
    }
    CHECK(r.convergence.size() == r.decisions.size());
}

TEST_CASE("emit_report into a file path is an IoError") {
    TempDir dir("fogbus_emit_report_blocked");
    std::filesystem::create_directories(dir.path);
    write_text_file(dir.path / "blocker", "x");
    const MetricsReport r;
    CHECK_THROWS_AS(emit_report(r, dir.path / "blocker"), IoError);
    CHECK_THROWS_AS(write_text_file(dir.path / "missing" / "f.txt", "x"), IoError);
}

TEST_CASE("a scenario without users finishes empty") {
    ScenarioConfig c = reuse_preset("GameOfLife");
    c.users.clear();
    const MetricsReport r = run_scenario(c);
    CHECK(r.requests.empty());
    CHECK(r.decisions.empty());
    CHECK(r.sft.count == 0);
    CHECK(r.masters == 1);
}

}  // TEST_SUITE
