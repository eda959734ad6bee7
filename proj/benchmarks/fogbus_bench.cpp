#include <benchmark/benchmark.h>

#include "fogbus/ga_policies.hpp"
#include "fogbus/protocol.hpp"
#include "fogbus/scheduler.hpp"
#include "fogbus/taskgraph.hpp"
#include "generators.hpp"

using namespace fogbus;

namespace {

// GameOfLife on five heterogeneous hosts, user at 10.0.1.2.
struct GolModel {
    AppGraph app{gol_app()};
    std::vector<std::string> hosts{"10.0.0.2", "10.0.0.3", "10.0.0.4", "10.0.0.5", "10.0.0.6"};
    CostModel model;
    EstimateInputs est{"10.0.1.2", 256 * 1024};

    GolModel() {
        const double freqs[] = {3.6, 1.5, 1.5, 2.6, 2.6};
        const std::int64_t cores[] = {8, 4, 4, 2, 4};
        for (std::size_t i = 0; i < hosts.size(); ++i) {
            HostProfile p;
            p.host = hosts[i];
            p.cpu_cores = cores[i];
            p.cpu_freq_ghz = freqs[i];
            p.cpu_util = 0.2;
            model.profiles.hosts[hosts[i]] = p;
        }
        model.default_link = LinkSpec{2.0, 1e8};
    }
};

void BM_EstimateResponse(benchmark::State& state) {
    const GolModel g;
    Rng rng(1);
    std::vector<std::string> place(g.app.size());
    for (auto& h : place) h = g.hosts[rng.index(g.hosts.size())];
    for (auto _ : state) benchmark::DoNotOptimize(estimate_response(g.app, place, g.model, g.est));
}
BENCHMARK(BM_EstimateResponse);

void BM_CodecRoundTrip(benchmark::State& state) {
    Rng rng(2);
    std::vector<MessageEnvelope> envs;
    for (int i = 0; i < 256; ++i) envs.push_back(testgen::envelope(rng));
    std::size_t i = 0;
    std::int64_t bytes = 0;
    for (auto _ : state) {
        const Bytes frame = encode(envs[i++ % envs.size()]);
        bytes += static_cast<std::int64_t>(frame.size());
        benchmark::DoNotOptimize(decode(frame));
    }
    state.SetBytesProcessed(bytes);
}
BENCHMARK(BM_CodecRoundTrip);

void BM_Policy(benchmark::State& state, const char* name) {
    const GolModel g;
    GaProblem problem;
    problem.sizes.assign(g.app.size(), g.hosts.size());
    problem.fitness = [&](std::span<const std::size_t> pick) {
        std::vector<std::string> place;
        for (std::size_t a : pick) place.push_back(g.hosts[a]);
        return estimate_response(g.app, place, g.model, g.est);
    };
    GaParams params;
    params.max_iteration_num = static_cast<std::size_t>(state.range(0));
    const std::vector<std::vector<std::string>> keys(g.app.size(), g.hosts);
    auto policy = make_policy(name, params);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        HistoryStore history;
        benchmark::DoNotOptimize(policy->solve(g.app.name(), problem, keys, history, ++seed));
    }
}
BENCHMARK_CAPTURE(BM_Policy, ohnsga, "ohnsga")->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Policy, nsga2, "nsga2")->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Policy, random, "random")->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
