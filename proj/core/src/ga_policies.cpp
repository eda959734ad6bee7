#include "fogbus/ga_policies.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace fogbus {

namespace {

constexpr std::size_t kMaxStalledRefills = 10;

// Wraps the objective so every call is counted.
/// Memoizes fitness by decoded assignment; the objective is deterministic.
struct Evaluator {
    const GaProblem& problem;
    std::size_t calls = 0;
    std::map<std::vector<std::size_t>, double> cache;

    Individual operator()(std::vector<double> genes) {
        ++calls;
        Individual ind;
        ind.genes = std::move(genes);
        ind.genes.resize(problem.dims(), 0.0);
        clamp_genes(ind.genes, problem.sizes);
        ind.decoded = decode_genes(ind.genes, problem.sizes);
        auto it = cache.find(ind.decoded);
        if (it == cache.end()) it = cache.emplace(ind.decoded, problem.fitness(ind.decoded)).first;
        ind.fitness = it->second;
        return ind;
    }
    Individual random(Rng& rng) {
        std::vector<double> genes(problem.dims());
        for (std::size_t i = 0; i < genes.size(); ++i) genes[i] = rng.uniform(0.0, static_cast<double>(problem.sizes[i]));
        return (*this)(std::move(genes));
    }
};

void sort_and_truncate(std::vector<Individual>& pop, std::size_t n) {
    std::stable_sort(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
        return a.fitness < b.fitness;
    });
    if (pop.size() > n) pop.resize(n);
}

std::vector<Individual> offspring(const std::vector<Individual>& pop, const GaParams& params, const GaProblem& problem,
                                  Evaluator& eval, Rng& rng) {
    const auto parents = tournament_select(pop, params.n_parents, rng);
    auto children = sbx_crossover(parents, params.n_offsprings, params.crossover_eta, problem.sizes, rng);
    const double prob = params.mutation_prob_for(problem.dims());
    std::vector<Individual> out;
    out.reserve(children.size());
    for (auto& genes : children) {
        polynomial_mutation(genes, params.mutation_eta, prob, problem.sizes, rng);
        out.push_back(eval(std::move(genes)));
    }
    return out;
}

const Individual& fittest(const std::vector<Individual>& pop) {
    return *std::min_element(pop.begin(), pop.end(), [](const Individual& a, const Individual& b) {
        return a.fitness < b.fitness;
    });
}

}  // namespace

void GaParams::validate() const {
    if (pop_size == 0) throw InvalidArgument("pop_size must be positive");
    if (hist_ratio == 0) throw InvalidArgument("hist_ratio must be positive");
    if (max_iteration_num == 0) throw InvalidArgument("max_iteration_num must be positive");
    if (n_parents == 0 || n_parents % 2 != 0) throw InvalidArgument("n_parents must be positive and even");
    if (n_parents > pop_size) throw InvalidArgument("n_parents must not exceed pop_size");
    if (n_offsprings == 0) throw InvalidArgument("n_offsprings must be positive");
    if (!(crossover_eta > 0.0) || !(mutation_eta > 0.0)) throw InvalidArgument("eta values must be positive");
    if (mutation_prob > 1.0) throw InvalidArgument("mutation_prob must be at most 1");
}

double GaParams::mutation_prob_for(std::size_t n_tasks) const {
    if (mutation_prob >= 0.0) return mutation_prob;
    return n_tasks == 0 ? 0.0 : 1.0 / static_cast<double>(n_tasks);
}

void GaProblem::validate() const {
    if (sizes.empty()) throw InvalidArgument("problem has no tasks");
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        if (sizes[i] == 0) throw InvalidArgument("task " + std::to_string(i) + " has no candidate");
    }
    if (!fitness) throw InvalidArgument("problem has no fitness function");
}

void clamp_genes(std::vector<double>& genes, std::span<const std::size_t> sizes) {
    for (std::size_t i = 0; i < genes.size(); ++i) {
        const double hi = static_cast<double>(sizes[i]) - kGeneEpsilon;
        double g = genes[i];
        if (!std::isfinite(g)) g = 0.0;
        genes[i] = std::clamp(g, 0.0, hi);
    }
}

std::vector<std::size_t> decode_genes(std::span<const double> genes, std::span<const std::size_t> sizes) {
    std::vector<std::size_t> out(genes.size());
    for (std::size_t i = 0; i < genes.size(); ++i) {
        const auto idx = static_cast<std::size_t>(std::floor(std::max(0.0, genes[i])));
        out[i] = std::min(idx, sizes[i] - 1);
    }
    return out;
}

Individual make_individual(std::vector<double> genes, const GaProblem& problem) {
    Individual ind;
    ind.genes = std::move(genes);
    ind.genes.resize(problem.dims(), 0.0);
    clamp_genes(ind.genes, problem.sizes);
    ind.decoded = decode_genes(ind.genes, problem.sizes);
    ind.fitness = problem.fitness(ind.decoded);
    return ind;
}

Individual random_individual(const GaProblem& problem, Rng& rng) {
    std::vector<double> genes(problem.dims());
    for (std::size_t i = 0; i < genes.size(); ++i) genes[i] = rng.uniform(0.0, static_cast<double>(problem.sizes[i]));
    return make_individual(std::move(genes), problem);
}

std::vector<Individual> tournament_select(std::span<const Individual> pop, std::size_t n_parents, Rng& rng) {
    std::vector<Individual> out;
    if (pop.empty()) return out;
    out.reserve(n_parents);
    while (out.size() < n_parents) {
        if (pop.size() == 1) {
            out.push_back(pop[0]);
            continue;
        }
        const std::size_t a = rng.index(pop.size());
        std::size_t b = rng.index(pop.size() - 1);
        if (b >= a) ++b;
        out.push_back(pop[b].fitness < pop[a].fitness ? pop[b] : pop[a]);
    }
    return out;
}

double sbx_beta(double u, double eta) {
    const double e = 1.0 / (eta + 1.0);
    return u <= 0.5 ? std::pow(2.0 * u, e) : std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

double polynomial_delta(double u, double eta) {
    const double e = 1.0 / (eta + 1.0);
    return u < 0.5 ? std::pow(2.0 * u, e) - 1.0 : 1.0 - std::pow(2.0 * (1.0 - u), e);
}

std::vector<std::vector<double>> sbx_crossover(std::span<const Individual> parents, std::size_t n_offsprings,
                                               double eta, std::span<const std::size_t> sizes, Rng& rng) {
    std::vector<std::vector<double>> children;
    if (parents.empty()) return children;
    children.reserve(n_offsprings + 1);
    std::size_t pair = 0;
    while (children.size() < n_offsprings) {
        const auto& p1 = parents[(2 * pair) % parents.size()].genes;
        const auto& p2 = parents[(2 * pair + 1) % parents.size()].genes;
        ++pair;
        std::vector<double> c1(p1.size());
        std::vector<double> c2(p1.size());
        for (std::size_t i = 0; i < p1.size(); ++i) {
            const double beta = sbx_beta(rng.uniform_open01(), eta);
            c1[i] = 0.5 * ((1.0 + beta) * p1[i] + (1.0 - beta) * p2[i]);
            c2[i] = 0.5 * ((1.0 - beta) * p1[i] + (1.0 + beta) * p2[i]);
        }
        clamp_genes(c1, sizes);
        clamp_genes(c2, sizes);
        children.push_back(std::move(c1));
        if (children.size() < n_offsprings) children.push_back(std::move(c2));
    }
    return children;
}

void polynomial_mutation(std::vector<double>& genes, double eta, double prob, std::span<const std::size_t> sizes,
                         Rng& rng) {
    for (std::size_t i = 0; i < genes.size(); ++i) {
        if (!rng.chance(prob)) continue;
        const double range = static_cast<double>(sizes[i]);
        genes[i] += polynomial_delta(rng.uniform_open01(), eta) * range;
    }
    clamp_genes(genes, sizes);
}

void remove_duplicates(std::vector<Individual>& pop) {
    std::set<std::vector<std::size_t>> seen;
    std::vector<Individual> kept;
    kept.reserve(pop.size());
    for (auto& ind : pop) {
        if (seen.insert(ind.decoded).second) kept.push_back(std::move(ind));
    }
    pop = std::move(kept);
}

GaResult ohnsga(std::span<const std::vector<double>> prev_dec, const GaParams& params, const GaProblem& problem) {
    params.validate();
    problem.validate();
    Rng rng(params.seed);
    Evaluator eval{problem, 0, {}};
    GaResult result;

    const std::size_t max_hist = (params.pop_size + params.hist_ratio - 1) / params.hist_ratio;
    std::vector<Individual> pop;
    pop.reserve(params.pop_size + params.n_offsprings);
    for (std::size_t i = 0; i < prev_dec.size() && i < max_hist; ++i) pop.push_back(eval(prev_dec[i]));
    while (pop.size() < params.pop_size) pop.push_back(eval.random(rng));
    remove_duplicates(pop);
    result.initial_population = pop;

    for (std::size_t it = 0; it < params.max_iteration_num; ++it) {
        std::size_t stalls = 0;
        for (;;) {
            const std::size_t before = pop.size();
            auto kids = offspring(pop, params, problem, eval, rng);
            for (auto& k : kids) pop.push_back(std::move(k));
            remove_duplicates(pop);
            if (pop.size() >= params.pop_size) break;
            if (pop.size() == before && ++stalls >= kMaxStalledRefills) {
                while (pop.size() < params.pop_size) pop.push_back(eval.random(rng));
                ++result.padded_rounds;
                break;
            }
        }
        sort_and_truncate(pop, params.pop_size);
        result.best_per_iteration.push_back(pop.front().fitness);
    }
    result.best = pop.front();
    result.evaluations = eval.calls;
    result.distinct_evaluations = eval.cache.size();
    return result;
}

GaResult nsga2_baseline(const GaParams& params, const GaProblem& problem) {
    params.validate();
    problem.validate();
    Rng rng(params.seed);
    Evaluator eval{problem, 0, {}};
    GaResult result;

    std::vector<Individual> pop;
    pop.reserve(params.pop_size + params.n_offsprings);
    while (pop.size() < params.pop_size) pop.push_back(eval.random(rng));
    result.initial_population = pop;

    for (std::size_t it = 0; it < params.max_iteration_num; ++it) {
        auto kids = offspring(pop, params, problem, eval, rng);
        for (auto& k : kids) pop.push_back(std::move(k));
        sort_and_truncate(pop, params.pop_size);
        result.best_per_iteration.push_back(pop.front().fitness);
    }
    result.best = pop.front();
    result.evaluations = eval.calls;
    result.distinct_evaluations = eval.cache.size();
    return result;
}

GaResult random_policy(const GaParams& params, const GaProblem& problem) {
    params.validate();
    problem.validate();
    Rng rng(params.seed);
    Evaluator eval{problem, 0, {}};
    GaResult result;

    std::vector<Individual> batch;
    while (batch.size() < params.pop_size) batch.push_back(eval.random(rng));
    result.initial_population = batch;
    Individual best = fittest(batch);
    for (std::size_t it = 0; it < params.max_iteration_num; ++it) {
        batch.clear();
        while (batch.size() < params.n_offsprings) batch.push_back(eval.random(rng));
        const Individual& b = fittest(batch);
        if (b.fitness < best.fitness) best = b;
        result.best_per_iteration.push_back(best.fitness);
    }
    result.best = std::move(best);
    result.evaluations = eval.calls;
    result.distinct_evaluations = eval.cache.size();
    return result;
}

void HistoryStore::record(const std::string& app, Entry entry) {
    auto& list = entries_[app];
    auto pos = std::upper_bound(list.begin(), list.end(), entry.fitness,
                                [](double f, const Entry& e) { return f < e.fitness; });
    list.insert(pos, std::move(entry));
    if (list.size() > capacity_) list.resize(capacity_);
}

const std::vector<HistoryStore::Entry>& HistoryStore::load(const std::string& app) const {
    static const std::vector<Entry> kEmpty;
    ++reads_;
    auto it = entries_.find(app);
    return it == entries_.end() ? kEmpty : it->second;
}

std::size_t HistoryStore::size(const std::string& app) const {
    auto it = entries_.find(app);
    return it == entries_.end() ? 0 : it->second.size();
}

std::vector<std::vector<double>> map_history(std::span<const HistoryStore::Entry> entries,
                                             const std::vector<std::vector<std::string>>& candidate_keys) {
    std::vector<std::vector<double>> out;
    std::vector<std::size_t> sizes(candidate_keys.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) sizes[i] = candidate_keys[i].size();
    for (const auto& e : entries) {
        if (e.genes.size() != candidate_keys.size() || e.choice_keys.size() != candidate_keys.size()) continue;
        std::vector<double> genes(e.genes.size());
        for (std::size_t i = 0; i < genes.size(); ++i) {
            const auto& keys = candidate_keys[i];
            auto it = std::find(keys.begin(), keys.end(), e.choice_keys[i]);
            if (it != keys.end()) {
                const double frac = e.genes[i] - std::floor(e.genes[i]);
                genes[i] = static_cast<double>(it - keys.begin()) + frac;
            } else {
                genes[i] = e.genes[i];
            }
        }
        clamp_genes(genes, sizes);
        out.push_back(std::move(genes));
    }
    return out;
}

namespace {

class OhnsgaPolicy final : public SchedulingPolicy {
public:
    explicit OhnsgaPolicy(GaParams p) : params_(p) {}
    std::string name() const override { return "ohnsga"; }
    GaResult solve(const std::string& app, const GaProblem& problem,
                   const std::vector<std::vector<std::string>>& candidate_keys, HistoryStore& history,
                   std::uint64_t seed) override {
        const auto prev = map_history(history.load(app), candidate_keys);
        GaParams p = params_;
        p.seed = seed;
        GaResult r = ohnsga(prev, p, problem);
        HistoryStore::Entry e;
        e.genes = r.best.genes;
        e.fitness = r.best.fitness;
        for (std::size_t i = 0; i < r.best.decoded.size(); ++i) {
            e.choice_keys.push_back(candidate_keys[i][r.best.decoded[i]]);
        }
        history.record(app, std::move(e));
        return r;
    }

private:
    GaParams params_;
};

class Nsga2Policy final : public SchedulingPolicy {
public:
    explicit Nsga2Policy(GaParams p) : params_(p) {}
    std::string name() const override { return "nsga2"; }
    GaResult solve(const std::string&, const GaProblem& problem, const std::vector<std::vector<std::string>>&,
                   HistoryStore&, std::uint64_t seed) override {
        GaParams p = params_;
        p.seed = seed;
        return nsga2_baseline(p, problem);
    }

private:
    GaParams params_;
};

class RandomPolicy final : public SchedulingPolicy {
public:
    explicit RandomPolicy(GaParams p) : params_(p) {}
    std::string name() const override { return "random"; }
    GaResult solve(const std::string&, const GaProblem& problem, const std::vector<std::vector<std::string>>&,
                   HistoryStore&, std::uint64_t seed) override {
        GaParams p = params_;
        p.seed = seed;
        return random_policy(p, problem);
    }

private:
    GaParams params_;
};

}  // namespace

std::unique_ptr<SchedulingPolicy> make_policy(const std::string& name, GaParams params) {
    params.validate();
    if (name == "ohnsga") return std::make_unique<OhnsgaPolicy>(params);
    if (name == "nsga2") return std::make_unique<Nsga2Policy>(params);
    if (name == "random") return std::make_unique<RandomPolicy>(params);
    throw InvalidArgument("unknown policy " + name);
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> kNames{"ohnsga", "nsga2", "random"};
    return kNames;
}

}  // namespace fogbus
