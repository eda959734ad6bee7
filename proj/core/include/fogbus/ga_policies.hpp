#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fogbus/common.hpp"
#include "fogbus/rng.hpp"

namespace fogbus {

struct GaParams {
    std::size_t pop_size = 100;
    std::size_t hist_ratio = 4;
    std::size_t max_iteration_num = 100;
    std::size_t n_parents = 20;
    std::size_t n_offsprings = 40;
    double crossover_eta = 15.0;
    double mutation_eta = 20.0;
    /// Negative means 1 / task count.
    double mutation_prob = -1.0;
    std::uint64_t seed = 0;

    /// Throws InvalidArgument.
    void validate() const;
    double mutation_prob_for(std::size_t n_tasks) const;
};

/// Upper gene bound is size - kGeneEpsilon so that floor() stays in range.
inline constexpr double kGeneEpsilon = 1e-9;

/// Search space and objective: task i picks one of sizes[i] candidates;
/// fitness maps the chosen candidate indices to a cost to minimise.
struct GaProblem {
    std::vector<std::size_t> sizes;
    std::function<double(std::span<const std::size_t>)> fitness;

    std::size_t dims() const { return sizes.size(); }
    /// Throws InvalidArgument when a task has no candidate.
    void validate() const;
};

struct Individual {
    std::vector<double> genes;
    std::vector<std::size_t> decoded;
    double fitness = 0.0;
};

void clamp_genes(std::vector<double>& genes, std::span<const std::size_t> sizes);
std::vector<std::size_t> decode_genes(std::span<const double> genes, std::span<const std::size_t> sizes);

/// Clamps, decodes and evaluates `genes`.
Individual make_individual(std::vector<double> genes, const GaProblem& problem);
Individual random_individual(const GaProblem& problem, Rng& rng);

/// Binary tournaments between two distinct members; the fitter one is kept.
std::vector<Individual> tournament_select(std::span<const Individual> pop, std::size_t n_parents, Rng& rng);

/// Simulated binary crossover of parents paired in order (0,1), (2,3), ...,
/// cycling until `n_offsprings` children exist. Children are clamped.
std::vector<std::vector<double>> sbx_crossover(std::span<const Individual> parents, std::size_t n_offsprings,
                                               double eta, std::span<const std::size_t> sizes, Rng& rng);

/// SBX spread factor for a uniform draw u in (0,1).
double sbx_beta(double u, double eta);
/// Polynomial mutation step for a uniform draw u in (0,1), in units of the
/// gene range.
double polynomial_delta(double u, double eta);

/// Mutates each gene with probability `prob`, then clamps.
void polynomial_mutation(std::vector<double>& genes, double eta, double prob, std::span<const std::size_t> sizes,
                         Rng& rng);

/// Drops later individuals whose decoded assignment was already seen.
void remove_duplicates(std::vector<Individual>& pop);

struct GaResult {
    Individual best;
    /// Best fitness after each iteration, max_iteration_num entries.
    std::vector<double> best_per_iteration;
    /// Fitness requests, and the distinct assignments actually scored.
    std::size_t evaluations = 0;
    std::size_t distinct_evaluations = 0;
    /// Rounds in which refilling stalled and random padding was used.
    std::size_t padded_rounds = 0;
    /// Population entering the first iteration (after dedup where applied).
    std::vector<Individual> initial_population;
};

/// History-seeded GA: up to ceil(pop_size / hist_ratio) previous decisions
/// seed the first population, the rest is random, duplicates are removed;
/// every iteration selects, crosses, mutates, merges and dedups until the
/// population is full again, then keeps the pop_size fittest.
GaResult ohnsga(std::span<const std::vector<double>> prev_dec, const GaParams& params, const GaProblem& problem);

/// Same loop with random initialisation and without deduplication.
GaResult nsga2_baseline(const GaParams& params, const GaProblem& problem);

/// Random search: pop_size samples, then n_offsprings per iteration.
GaResult random_policy(const GaParams& params, const GaProblem& problem);

/// Past winners per app, best (lowest recorded fitness) first. Entries keep
/// the chosen candidate keys so they can be re-mapped onto a later
/// candidate list.
class HistoryStore {
public:
    struct Entry {
        std::vector<std::string> choice_keys;
        std::vector<double> genes;
        double fitness = 0.0;
    };

    explicit HistoryStore(std::size_t capacity = 64) : capacity_(capacity) {}

    void record(const std::string& app, Entry entry);
    /// Counted read.
    const std::vector<Entry>& load(const std::string& app) const;
    std::size_t reads() const { return reads_; }
    std::size_t size(const std::string& app) const;

private:
    std::size_t capacity_;
    std::map<std::string, std::vector<Entry>> entries_;
    mutable std::size_t reads_ = 0;
};

/// Re-expresses stored entries against `candidate_keys` (per task, the key
/// of each candidate). A stored key still present maps to its new index,
/// otherwise the old gene is re-clamped to the new range.
std::vector<std::vector<double>> map_history(std::span<const HistoryStore::Entry> entries,
                                             const std::vector<std::vector<std::string>>& candidate_keys);

/// Policy selected by name: "ohnsga", "nsga2" or "random".
class SchedulingPolicy {
public:
    virtual ~SchedulingPolicy() = default;
    virtual std::string name() const = 0;
    /// `candidate_keys[i][j]` names candidate j of task i (history mapping).
    virtual GaResult solve(const std::string& app, const GaProblem& problem,
                           const std::vector<std::vector<std::string>>& candidate_keys, HistoryStore& history,
                           std::uint64_t seed) = 0;
};

std::unique_ptr<SchedulingPolicy> make_policy(const std::string& name, GaParams params);
const std::vector<std::string>& policy_names();

}  // namespace fogbus
