// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "fogbus/experiments.hpp"
#include "fogbus/report.hpp"
#include "fogbus/scaler.hpp"
#include "fogbus/scheduler.hpp"
#include "generators.hpp"

using namespace fogbus;

namespace {

// Pinned thresholds.
constexpr double kC1HitRate = 0.95;
constexpr double kC1Seconds = 10.0;
constexpr std::size_t kC1Seeds = 100;
constexpr std::size_t kC2Seeds = 20;
constexpr std::size_t kC2Iteration = 10;
constexpr double kC3Tolerance = 0.01;
constexpr double kC3WinRate = 0.80;
constexpr double kC4HighGain = 0.30;
constexpr double kC4LowGap = 0.05;
constexpr double kC5GolMax = 0.55;
constexpr double kC5VocrLo = 0.55;
constexpr double kC5VocrHi = 1.0;
constexpr std::size_t kC6Trials = 10;
constexpr std::size_t kC6MaxHosts = 16;
constexpr std::size_t kC7Sets = 1000;
constexpr std::size_t kC8Envelopes = 10000;

struct Verdict {
    bool pass = false;
    std::string detail;
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

// ---------------------------------------------------------------------------
// C1: random instances with <= 4 tasks and <= 3 actors.
// ---------------------------------------------------------------------------

const std::string kUserHost = "10.0.1.2";

AppSpec random_app(Rng& rng) {
    const std::size_t n = 1 + rng.index(4);
    AppSpec a;
    a.app_name = "instance";
    for (std::size_t i = 0; i < n; ++i) {
        a.tasks.push_back({"v" + std::to_string(i), rng.uniform(1.0, 200.0), rng.index(500000)});
    }
    std::vector<bool> has_parent(n, false), has_child(n, false);
    for (std::size_t c = 1; c < n; ++c) {
        for (std::size_t p = 0; p < c; ++p) {
            if (rng.chance(0.4)) {
                a.edges.emplace_back(a.tasks[p].name, a.tasks[c].name);
                has_parent[c] = has_child[p] = true;
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!has_parent[i]) a.entry_tasks.push_back(a.tasks[i].name);
        if (!has_child[i]) a.exit_tasks.push_back(a.tasks[i].name);
    }
    return a;
}

struct Instance {
    AppGraph app;
    std::vector<RegisteredActor> actors;
    CostModel model;
};

Instance random_instance(Rng& rng) {
    Instance in{AppGraph(random_app(rng)), {}, {}};
    const std::size_t k = 1 + rng.index(3);
    std::vector<std::string> hosts;
    for (std::size_t i = 0; i < k; ++i) hosts.push_back("10.0.0." + std::to_string(2 + i));
    in.model.default_link = LinkSpec{rng.uniform(0.5, 10.0), rng.uniform(1e6, 1e9)};
    for (std::size_t i = 0; i < k; ++i) {
        RegisteredActor a;
        a.id = ComponentId{ComponentKind::Actor, i, Address{"10.0.0.1", kMasterPort}};
        a.addr = Address{hosts[i], kActorPort};
        a.profile.host = hosts[i];
        a.profile.cpu_cores = 1 + static_cast<std::int64_t>(rng.index(8));
        a.profile.cpu_freq_ghz = rng.uniform(0.5, 4.0);
        a.profile.cpu_util = rng.uniform(0.0, 0.8);
        // Some actors lack some images; actor 0 can run everything.
        if (i == 0 || rng.chance(0.5)) {
            a.images = {kAnyImage};
        } else {
            for (const auto& t : in.app.spec().tasks) {
                if (rng.chance(0.6)) a.images.insert(t.name);
            }
        }
        in.model.profiles.hosts[hosts[i]] = a.profile;
        in.actors.push_back(a);
    }
    std::vector<std::string> all = hosts;
    all.push_back(kUserHost);
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) {
            in.model.profiles.links[host_pair(all[i], all[j])] =
                LinkSample{all[i], all[j], rng.uniform(0.5, 30.0), rng.uniform(1e6, 1e9), 1500, 0.0};
        }
    }
    return in;
}

double exhaustive_min(const Instance& in, const EstimateInputs& est) {
    const std::size_t n = in.app.size();
    std::vector<std::vector<std::size_t>> cands(n);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t a = 0; a < in.actors.size(); ++a) {
            if (in.actors[a].has_image(in.app.task(t).name)) cands[t].push_back(a);
        }
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> pick(n, 0);
    std::function<void(std::size_t)> rec = [&](std::size_t t) {
        if (t == n) {
            std::vector<std::string> place;
            for (std::size_t i = 0; i < n; ++i) place.push_back(in.actors[cands[i][pick[i]]].profile.host);
            best = std::min(best, estimate_response(in.app, place, in.model, est));
            return;
        }
        for (pick[t] = 0; pick[t] < cands[t].size(); ++pick[t]) rec(t + 1);
    };
    rec(0);
    return best;
}

Verdict criterion1() {
    GaParams params;
    params.pop_size = 16;
    params.max_iteration_num = 50;
    params.n_parents = 8;
    params.n_offsprings = 16;
    const auto start = std::chrono::steady_clock::now();
    std::size_t hits = 0;
    for (std::uint64_t seed = 1; seed <= kC1Seeds; ++seed) {
        Rng rng(seed);
        const Instance inst = random_instance(rng);
        ScheduleInputs in;
        in.app = &inst.app;
        in.request = QueuedRequest{RequestId{Address{"10.0.0.1", kMasterPort}, seed}, Address{kUserHost, kUserPortBase},
                                   inst.app.name(), 0.0, 0.0};
        for (const auto& a : inst.actors) in.actors.push_back(&a);
        in.model = inst.model;
        in.input_size_bytes = 64 * 1024;
        in.seed = seed;
        auto policy = make_policy("ohnsga", params);
        HistoryStore history;
        const auto out = schedule_request(in, *policy, history);
        const auto* d = std::get_if<SchedulingDecision>(&out);
        if (!d) continue;
        const double opt = exhaustive_min(inst, EstimateInputs{kUserHost, in.input_size_bytes});
        if (d->estimated_response_ms <= opt * (1.0 + 1e-12)) ++hits;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double rate = static_cast<double>(hits) / static_cast<double>(kC1Seeds);
    return {rate >= kC1HitRate && secs < kC1Seconds,
            fmt::format("optimum found in {}/{} seeds (need >= {:.0f}%), {:.2f} s (limit {:.0f} s)", hits, kC1Seeds,
                        kC1HitRate * 100, secs, kC1Seconds)};
}

// ---------------------------------------------------------------------------
// C2 / C3: GoL convergence preset.
// ---------------------------------------------------------------------------

const std::vector<ConvergenceOutcome>& convergence_runs() {
    static const std::vector<ConvergenceOutcome> runs =
        run_convergence_experiment(kC2Seeds, {"ohnsga", "nsga2", "random"});
    return runs;
}

Verdict criterion2() {
    std::vector<double> oh, ns;
    std::size_t violations = 0;
    for (const auto& r : convergence_runs()) {
        if (r.series.size() < kC2Iteration) return {false, "series shorter than the checked iteration"};
        const double at = r.series[kC2Iteration - 1];
        if (r.policy == "ohnsga") {
            oh.push_back(at);
            for (std::size_t i = 1; i < r.series.size(); ++i) violations += r.series[i] > r.series[i - 1];
        } else if (r.policy == "nsga2") {
            ns.push_back(at);
        }
    }
    const double mo = median(oh), mn = median(ns);
    return {mo <= mn && violations == 0,
            fmt::format("median best@{}: ohnsga {:.2f} ms vs nsga2 {:.2f} ms; elitism violations {}", kC2Iteration, mo,
                        mn, violations)};
}

Verdict criterion3() {
    std::map<std::string, std::map<std::uint64_t, double>> measured;
    std::size_t within = 0, total = 0;
    double worst = 0.0;
    std::string worst_run;
    for (const auto& r : convergence_runs()) {
        measured[r.policy][r.seed] = r.measured_ms;
        const double dev = std::abs(r.measured_ms - r.model_estimate_ms) / r.model_estimate_ms;
        ++total;
        within += dev <= kC3Tolerance;
        if (dev > worst) {
            worst = dev;
            worst_run = fmt::format("{} seed {}", r.policy, r.seed);
        }
    }
    std::string wins;
    bool win_ok = true;
    for (const char* base : {"nsga2", "random"}) {
        std::size_t w = 0;
        for (const auto& [seed, m] : measured["ohnsga"]) w += m <= measured[base][seed];
        const double rate = static_cast<double>(w) / static_cast<double>(kC2Seeds);
        win_ok = win_ok && rate >= kC3WinRate;
        wins += fmt::format("; ohnsga <= {} in {}/{}", base, w, kC2Seeds);
    }
    return {within == total && win_ok,
            fmt::format("{}/{} runs within {:.0f}% of estimate (worst {:.2f}% on {}){} (need >= {:.0f}%)", within,
                        total, kC3Tolerance * 100, worst * 100, worst_run, wins, kC3WinRate * 100)};
}

// ---------------------------------------------------------------------------
// C4 - C8
// ---------------------------------------------------------------------------

Verdict criterion4() {
    const double off16 = run_scalability_case(16, false).sft.mean;
    const double on16 = run_scalability_case(16, true).sft.mean;
    const double off1 = run_scalability_case(1, false).sft.mean;
    const double on1 = run_scalability_case(1, true).sft.mean;
    const double gain = off16 / on16 - 1.0;
    const double gap = std::abs(off1 - on1) / std::max(off1, on1);
    return {gain >= kC4HighGain && gap < kC4LowGap,
            fmt::format("16 users: off {:.1f} vs on {:.1f} ms (+{:.1f}%, need >= {:.0f}%); 1 user: gap {:.2f}% "
                        "(need < {:.0f}%)",
                        off16, on16, gain * 100, kC4HighGain * 100, gap * 100, kC4LowGap * 100)};
}

Verdict criterion5() {
    const ReuseOutcome gol = run_reuse_case("GameOfLife");
    const ReuseOutcome vocr = run_reuse_case("VOCR");
    const bool ok = gol.ratio() < kC5GolMax && vocr.ratio() > kC5VocrLo && vocr.ratio() < kC5VocrHi;
    return {ok, fmt::format("warm/cold RRT: GameOfLife {:.3f} (need < {:.2f}), VOCR {:.3f} (need in ({:.2f}, {:.2f}))",
                            gol.ratio(), kC5GolMax, vocr.ratio(), kC5VocrLo, kC5VocrHi)};
}

Verdict criterion6() {
    std::size_t failures = 0, max_hosts = 0, max_diameter = 0;
    for (std::uint64_t seed = 1; seed <= kC6Trials; ++seed) {
        const DiscoveryOutcome r = run_discovery_trial(seed, kC6MaxHosts);
        failures += !r.converged();
        max_hosts = std::max(max_hosts, r.hosts);
        max_diameter = std::max(max_diameter, r.diameter);
    }
    return {failures == 0, fmt::format("{} failures over {} subnets (up to {} hosts, diameter up to {})", failures,
                                       kC6Trials, max_hosts, max_diameter)};
}

Verdict criterion7() {
    Rng rng(7);
    std::size_t mismatches = 0;
    for (std::size_t i = 0; i < kC7Sets; ++i) {
        const auto c = testgen::scale_candidates(rng, 1 + rng.index(12));
        mismatches += select_scale_target(c) != testgen::scale_oracle(c);
    }
    return {mismatches == 0, fmt::format("{} mismatches over {} candidate sets", mismatches, kC7Sets)};
}

Verdict criterion8() {
    Rng rng(8);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < kC8Envelopes; ++i) {
        const MessageEnvelope env = testgen::envelope(rng);
        try {
            failures += decode(encode(env)) != env;
        } catch (const Error&) {
            ++failures;
        }
    }
    const std::vector<ScenarioConfig> presets{convergence_preset("ohnsga", 1), convergence_preset("nsga2", 2),
                                              convergence_preset("random", 3), scalability_preset(16, true),
                                              scalability_preset(16, false),  reuse_preset("GameOfLife"),
                                              reuse_preset("VOCR")};
    std::size_t differing = 0;
    for (const auto& p : presets) differing += report_to_json(run_scenario(p)) != report_to_json(run_scenario(p));
    return {failures == 0 && differing == 0,
            fmt::format("{} codec failures over {} envelopes; {}/{} presets with differing repeat reports", failures,
                        kC8Envelopes, differing, presets.size())};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only;
    app.add_option("--only", only, "Criteria to run (default: all)")->check(CLI::Range(1, 8));
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::function<Verdict()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8};
    const std::set<int> selected(only.begin(), only.end());
    int failed = 0;
    for (int i = 1; i <= 8; ++i) {
        if (!selected.empty() && !selected.count(i)) continue;
        Verdict v;
        try {
            v = criteria[static_cast<std::size_t>(i - 1)]();
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("C%d %s  %s\n", i, v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
