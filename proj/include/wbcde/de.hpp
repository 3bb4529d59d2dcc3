#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "wbcde/fitness.hpp"
#include "wbcde/rng.hpp"

namespace wbcde {

/// Replacement rule for greedy selection.
enum class SelectionRule {
    LessOrEqual,  // trial replaces parent when J(trial) <= J(parent)
    Strict,       // trial replaces parent when J(trial) <  J(parent)
};

struct DEConfig {
    std::size_t population_size = 20;
    double mutation_factor = 0.25;
    double crossover_rate = 0.80;
    std::size_t iterations = 200;
    SelectionRule selection = SelectionRule::LessOrEqual;
    std::uint64_t rng_seed = 1;

    /// Throws ConfigError when an invariant is violated.
    void validate() const;
};

struct Population {
    std::vector<Candidate> members;
    std::vector<FitnessValue> fitnesses;
    std::size_t best_index = 0;
    std::size_t generation = 0;

    const Candidate& best() const { return members[best_index]; }
    const FitnessValue& best_fitness() const { return fitnesses[best_index]; }
};

using Objective = std::function<FitnessValue(const Candidate&)>;
using Mutant = std::array<double, Candidate::kGenes>;

/// Random draws used to build one trial vector.
struct TrialDraws {
    std::size_t r1 = 0;
    std::size_t r2 = 0;
    std::size_t j_rand = 0;  // 0-based gene position
    std::array<double, Candidate::kGenes> u{};
};

/// Each gene is 1 + floor(u * n_edges), u uniform in [0, 1).
/// Throws InsufficientEdges when n_edges < 5.
Population initialize(const DEConfig& cfg, std::size_t n_edges, Rng& rng, const Objective& objective);

/// Initial gene for one uniform draw u in [0, 1).
std::int64_t initial_gene(double u, std::size_t n_edges) noexcept;

/// v = best + F (r1 - r2), componentwise.
Mutant mutate_rand_to_best(const Candidate& best, const Candidate& r1, const Candidate& r2, double f) noexcept;

/// Binomial crossover with a fixed draw transcript. Gene j comes from the
/// mutant (rounded half away from zero) when u[j] <= CR or j == j_rand.
Candidate crossover_bin(const Candidate& target, const Mutant& mutant, double cr,
                        const TrialDraws& draws) noexcept;

/// Draws j_rand first, then u for each gene in order, then crosses over.
Candidate crossover_bin(const Candidate& target, const Mutant& mutant, double cr, Rng& rng);

struct Scored {
    Candidate candidate;
    FitnessValue fitness;
};

Scored select_greedy(const Scored& parent, const Scored& trial,
                     SelectionRule rule = SelectionRule::LessOrEqual) noexcept;

/// Draws r1, r2 (distinct from each other and from `target`), j_rand, and
/// the per-gene uniforms for one member, in that order.
TrialDraws draw_trial(std::size_t target, std::size_t population_size, Rng& rng);

struct DEResult {
    Candidate best;
    FitnessValue fitness;
    /// Best J after each generation; length == iterations.
    std::vector<double> history;
    Population final_population;
};

/// rand-to-best/1/bin for cfg.iterations generations. The random
/// transcript of a generation is drawn before any trial is evaluated.
DEResult run(const DEConfig& cfg, const Objective& objective, std::size_t n_edges);

}  // namespace wbcde
