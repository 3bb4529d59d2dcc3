#include "wbcde/de.hpp"

#include <cmath>

#include "wbcde/error.hpp"

namespace wbcde {

void DEConfig::validate() const {
    if (population_size < 4) throw ConfigError("population size must be at least 4");
    if (!(mutation_factor > 0.0 && mutation_factor < 2.0)) throw ConfigError("mutation factor must lie in (0, 2)");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ConfigError("crossover rate must lie in [0, 1]");
    if (iterations < 1) throw ConfigError("iteration count must be at least 1");
}

std::int64_t initial_gene(double u, std::size_t n_edges) noexcept {
    auto g = static_cast<std::int64_t>(std::floor(u * static_cast<double>(n_edges)));
    g = std::min<std::int64_t>(g, static_cast<std::int64_t>(n_edges) - 1);
    return 1 + g;
}

namespace {

std::size_t argmin(const std::vector<FitnessValue>& f) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
        if (f[i].j < f[best].j) best = i;
    return best;
}

}  // namespace

Population initialize(const DEConfig& cfg, std::size_t n_edges, Rng& rng, const Objective& objective) {
    cfg.validate();
    if (n_edges < Candidate::kGenes) {
        throw InsufficientEdges("need at least 5 edge pixels, have " + std::to_string(n_edges));
    }
    Population pop;
    pop.members.resize(cfg.population_size);
    for (auto& m : pop.members)
        for (auto& g : m.genes) g = initial_gene(rng.uniform(), n_edges);
    pop.fitnesses.reserve(pop.members.size());
    for (const auto& m : pop.members) pop.fitnesses.push_back(objective(m));
    pop.best_index = argmin(pop.fitnesses);
    return pop;
}

Mutant mutate_rand_to_best(const Candidate& best, const Candidate& r1, const Candidate& r2, double f) noexcept {
    Mutant v{};
    for (std::size_t j = 0; j < Candidate::kGenes; ++j) {
        v[j] = static_cast<double>(best.genes[j]) +
               f * static_cast<double>(r1.genes[j] - r2.genes[j]);
    }
    return v;
}

Candidate crossover_bin(const Candidate& target, const Mutant& mutant, double cr, const TrialDraws& draws) noexcept {
    Candidate trial = target;
    for (std::size_t j = 0; j < Candidate::kGenes; ++j) {
        if (draws.u[j] <= cr || j == draws.j_rand) {
            // std::llround rounds halfway cases away from zero
            trial.genes[j] = static_cast<std::int64_t>(std::llround(mutant[j]));
        }
    }
    return trial;
}

Candidate crossover_bin(const Candidate& target, const Mutant& mutant, double cr, Rng& rng) {
    TrialDraws d;
    d.j_rand = rng.below(Candidate::kGenes);
    for (auto& u : d.u) u = rng.uniform();
    return crossover_bin(target, mutant, cr, d);
}

Scored select_greedy(const Scored& parent, const Scored& trial, SelectionRule rule) noexcept {
    const bool take = rule == SelectionRule::LessOrEqual ? trial.fitness.j <= parent.fitness.j
                                                         : trial.fitness.j < parent.fitness.j;
    return take ? trial : parent;
}

TrialDraws draw_trial(std::size_t target, std::size_t population_size, Rng& rng) {
    TrialDraws d;
    do {
        d.r1 = rng.below(population_size);
    } while (d.r1 == target);
    do {
        d.r2 = rng.below(population_size);
    } while (d.r2 == target || d.r2 == d.r1);
    d.j_rand = rng.below(Candidate::kGenes);
    for (auto& u : d.u) u = rng.uniform();
    return d;
}

DEResult run(const DEConfig& cfg, const Objective& objective, std::size_t n_edges) {
    Rng rng(cfg.rng_seed);
    Population pop = initialize(cfg, n_edges, rng, objective);
    const std::size_t m = pop.members.size();

    DEResult out;
    out.history.reserve(cfg.iterations);
    std::vector<TrialDraws> transcript(m);
    std::vector<Candidate> trials(m);
    std::vector<FitnessValue> trial_fitness(m);

    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        for (std::size_t i = 0; i < m; ++i) transcript[i] = draw_trial(i, m, rng);

        const Candidate best = pop.best();
        for (std::size_t i = 0; i < m; ++i) {
            const auto& d = transcript[i];
            const Mutant v = mutate_rand_to_best(best, pop.members[d.r1], pop.members[d.r2], cfg.mutation_factor);
            trials[i] = crossover_bin(pop.members[i], v, cfg.crossover_rate, d);
        }
        for (std::size_t i = 0; i < m; ++i) trial_fitness[i] = objective(trials[i]);

        for (std::size_t i = 0; i < m; ++i) {
            const auto next = select_greedy({pop.members[i], pop.fitnesses[i]}, {trials[i], trial_fitness[i]},
                                            cfg.selection);
            pop.members[i] = next.candidate;
            pop.fitnesses[i] = next.fitness;
        }
        pop.best_index = argmin(pop.fitnesses);
        pop.generation = t + 1;
        out.history.push_back(pop.best_fitness().j);
    }

    out.best = pop.best();
    out.fitness = pop.best_fitness();
    out.final_population = std::move(pop);
    return out;
}

}  // namespace wbcde
