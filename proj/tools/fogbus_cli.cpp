#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fogbus/experiments.hpp"
#include "fogbus/report.hpp"
#include "fogbus/scenario.hpp"

namespace fs = std::filesystem;
using namespace fogbus;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitDeadlock = 3;
constexpr int kExitIo = 4;

int run_command(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out,
                const std::string& policy, bool no_scaling, const std::string& transport) {
    ScenarioConfig cfg = load_scenario(path);
    if (seed) cfg.seed = *seed;
    if (!policy.empty()) cfg.policy = policy;
    if (no_scaling) cfg.scaling_enabled = false;
    cfg.validate();
    RunOptions opts;
    opts.transport = transport == "tcp" ? TransportKind::Tcp : TransportKind::Sim;
    const MetricsReport r = run_scenario(cfg, opts);
    emit_report(r, out);
    fmt::print("{}: {} requests, sft mean {:.1f} ms, rrt mean {:.1f} ms, response mean {:.1f} ms -> {}\n",
               r.scenario, r.requests.size(), r.sft.mean, r.rrt.mean, r.response.mean, out);
    return 0;
}

int experiment_command(const std::string& name, const fs::path& out, std::size_t seeds) {
    fs::create_directories(out);
    if (name == "convergence") {
        const auto runs = run_convergence_experiment(seeds, policy_names());
        write_text_file(out / "convergence.csv", convergence_experiment_csv(runs));
        write_text_file(out / "response.csv", placement_experiment_csv(runs));
        for (const auto& r : runs) {
            fmt::print("{:7} seed {:2}: best@10 {:9.2f}  final {:9.2f}  measured {:9.2f}\n", r.policy, r.seed,
                       r.series.size() > 10 ? r.series[10] : r.series.back(), r.series.back(), r.measured_ms);
        }
    } else if (name == "scalability") {
        const auto rows = run_scalability_experiment({1, 2, 4, 8, 16});
        write_text_file(out / "sft.csv", scalability_experiment_csv(rows));
        for (const auto& r : rows) {
            fmt::print("users {:2} scaling {:3}: mean SFT {:9.1f} ms, masters {}\n", r.users,
                       r.scaling_enabled ? "on" : "off", r.sft.mean, r.masters);
        }
    } else if (name == "reuse") {
        std::vector<ReuseOutcome> rows{run_reuse_case("GameOfLife"), run_reuse_case("VOCR")};
        write_text_file(out / "rrt.csv", reuse_experiment_csv(rows));
        for (const auto& r : rows) {
            fmt::print("{:10}: cold RRT {:9.1f} ms, warm RRT {:9.1f} ms, warm/cold {:.3f}\n", r.app, r.cold_rrt_ms,
                       r.warm_rrt_ms, r.ratio());
        }
    } else if (name == "discovery") {
        std::vector<DiscoveryOutcome> rows;
        for (std::uint64_t s = 1; s <= seeds; ++s) rows.push_back(run_discovery_trial(s));
        write_text_file(out / "discovery.csv", discovery_experiment_csv(rows));
        for (const auto& r : rows) {
            fmt::print("seed {:2}: {:2} hosts, diameter {}, converged after {} rounds\n", r.seed, r.hosts, r.diameter,
                       r.rounds);
        }
    } else {
        throw ConfigError("experiment", "unknown experiment " + name);
    }
    return 0;
}

int preset_command(const std::string& name, const std::string& policy, std::uint64_t seed, std::size_t users,
                   bool no_scaling, const std::string& app) {
    ScenarioConfig cfg;
    if (name == "convergence") {
        cfg = convergence_preset(policy.empty() ? "ohnsga" : policy, seed);
    } else if (name == "scalability") {
        cfg = scalability_preset(users, !no_scaling, seed);
    } else if (name == "reuse") {
        cfg = reuse_preset(app, seed);
    } else {
        throw ConfigError("preset", "unknown preset " + name);
    }
    std::cout << scenario_to_json(cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fog orchestration simulator: scenarios, experiments and presets"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario file and write its report");
    std::string scenario_path, out_dir = "out", policy, transport = "sim";
    std::optional<std::uint64_t> seed;
    bool no_scaling = false;
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--out", out_dir, "Report directory");
    run->add_option("--policy", policy, "Override the scheduling policy")->check(CLI::IsMember(policy_names()));
    run->add_flag("--no-scaling", no_scaling, "Disable Master scaling");
    run->add_option("--transport", transport, "sim (virtual time) or tcp (loopback, wall clock)")
        ->check(CLI::IsMember({"sim", "tcp"}));

    auto* exp = app.add_subcommand("experiment", "Run a built-in experiment and write its CSV tables");
    std::string exp_name;
    std::string exp_out = "out";
    std::size_t seeds = 20;
    exp->add_option("name", exp_name, "convergence | scalability | reuse | discovery")
        ->required()
        ->check(CLI::IsMember({"convergence", "scalability", "reuse", "discovery"}));
    exp->add_option("--out", exp_out, "Output directory");
    exp->add_option("--seeds", seeds, "Seeds per policy (convergence) or trials (discovery)")->check(CLI::PositiveNumber);

    auto* preset = app.add_subcommand("preset", "Print a built-in scenario as JSON");
    std::string preset_name, preset_policy, preset_app = "GameOfLife";
    std::uint64_t preset_seed = 1;
    std::size_t preset_users = 16;
    bool preset_no_scaling = false;
    preset->add_option("name", preset_name, "convergence | scalability | reuse")
        ->required()
        ->check(CLI::IsMember({"convergence", "scalability", "reuse"}));
    preset->add_option("--policy", preset_policy, "Policy (convergence)")->check(CLI::IsMember(policy_names()));
    preset->add_option("--seed", preset_seed, "Scenario seed");
    preset->add_option("--users", preset_users, "Simultaneous users (scalability)");
    preset->add_flag("--no-scaling", preset_no_scaling, "Disable scaling (scalability)");
    preset->add_option("--app", preset_app, "Application (reuse)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(scenario_path, seed, out_dir, policy, no_scaling, transport);
        if (exp->parsed()) return experiment_command(exp_name, exp_out, seeds);
        if (preset->parsed()) {
            return preset_command(preset_name, preset_policy, preset_seed, preset_users, preset_no_scaling, preset_app);
        }
    } catch (const ConfigError& e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return kExitConfig;
    } catch (const DeadlockDetected& e) {
        fmt::print(stderr, "deadlock: {}\n", e.what());
        return kExitDeadlock;
    } catch (const IoError& e) {
        fmt::print(stderr, "io error: {}\n", e.what());
        return kExitIo;
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 0;
}
