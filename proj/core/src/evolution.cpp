#include "pathnet/evolution.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <numeric>
#include <stdexcept>

namespace pathnet {

void EvolutionParams::validate() const {
    if (population_size < 1) throw std::invalid_argument("evolution: population_size must be >= 1");
    if (epochs_per_eval < 1) throw std::invalid_argument("evolution: epochs_per_eval must be >= 1");
    if (minibatches_per_epoch < 1) {
        throw std::invalid_argument("evolution: minibatches_per_epoch must be >= 1");
    }
    if (batch_size < 1) throw std::invalid_argument("evolution: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("evolution: learning_rate must be > 0");
    if (infection_rate < 0.0 || infection_rate > 1.0) {
        throw std::invalid_argument("evolution: infection_rate must be in [0, 1]");
    }
    if (mutation_rate && (*mutation_rate < 0.0 || *mutation_rate > 1.0)) {
        throw std::invalid_argument("evolution: mutation_rate must be in [0, 1]");
    }
}

double EvolutionParams::resolved_mutation_rate(const Architecture& arch) const {
    if (mutation_rate) return *mutation_rate;
    return 1.0 / static_cast<double>(arch.num_layers * arch.max_path_width);
}

Genotype random_genotype(const Architecture& arch, Rng& rng) {
    arch.validate();
    std::vector<std::vector<int>> genes(arch.num_layers);
    std::vector<int> pool(arch.modules_per_layer);
    for (std::size_t l = 0; l < arch.num_layers; ++l) {
        const std::size_t width = 1 + rng.next_below(arch.max_path_width);
        std::iota(pool.begin(), pool.end(), 0);
        // Partial Fisher-Yates: first `width` entries end up a uniform
        // without-replacement sample.
        for (std::size_t i = 0; i < width; ++i) {
            const std::size_t j = i + rng.next_below(pool.size() - i);
            std::swap(pool[i], pool[j]);
        }
        genes[l].assign(pool.begin(), pool.begin() + static_cast<long>(width));
    }
    return Genotype(std::move(genes));
}

EvolutionState make_initial_state(const Architecture& arch, const EvolutionParams& params,
                                  Rng rng) {
    params.validate();
    EvolutionState state;
    state.rng = rng;
    state.population.reserve(params.population_size);
    for (std::size_t i = 0; i < params.population_size; ++i) {
        state.population.push_back(random_genotype(arch, state.rng));
    }
    return state;
}

Genotype recombine(const Genotype& winner, const Genotype& loser, double infection_rate,
                   Rng& rng) {
    if (winner.num_layers() != loser.num_layers()) {
        throw std::invalid_argument("recombine: genotypes have different layer counts");
    }
    Genotype child = loser;
    for (std::size_t l = 0; l < child.num_layers(); ++l) {
        // Gate drawn for every layer so the stream stays aligned at rate 0/1.
        const double u = rng.next_double();
        if (u < infection_rate) child.set_layer(l, winner.layer(l));
    }
    return child;
}

Genotype mutate(const Genotype& g, double mutation_rate, const Architecture& arch, Rng& rng) {
    g.validate_for(arch);
    const std::size_t modules = arch.modules_per_layer;
    std::vector<std::vector<int>> genes = g.genes();
    for (auto& layer : genes) {
        for (std::size_t i = 0; i < layer.size(); ++i) {
            const double u = rng.next_double();
            if (u >= mutation_rate) continue;
            for (std::size_t attempt = 0; attempt < modules; ++attempt) {
                const int candidate = static_cast<int>(rng.next_below(modules));
                if (std::find(layer.begin(), layer.end(), candidate) == layer.end()) {
                    layer[i] = candidate;
                    break;
                }
            }
        }
    }
    return Genotype(std::move(genes));
}

TournamentResult microbial_tournament(EvolutionState& state, const EvolutionParams& params,
                                      const Architecture& arch, const PathEvaluator& evaluate) {
    if (state.population.size() < 2) {
        throw std::invalid_argument("microbial_tournament: population must have >= 2 genotypes");
    }

    const std::size_t first = state.rng.next_below(state.population.size());
    std::size_t second = state.rng.next_below(state.population.size() - 1);
    if (second >= first) ++second;

    // Both evaluations mutate the shared parameter pool; serialized,
    // first-drawn first.
    const EvalOutcome first_out = evaluate(state.population[first]);
    const EvalOutcome second_out = evaluate(state.population[second]);
    state.paths_evaluated += 2;

    auto consider_best = [&state](const Genotype& g, double fitness) {
        if (!state.best_seen || fitness > state.best_seen->fitness) {
            state.best_seen = BestSeen{g, fitness};
        }
    };
    consider_best(state.population[first], first_out.fitness);
    consider_best(state.population[second], second_out.fitness);

    TournamentResult result;
    result.first_index = first;
    result.second_index = second;
    result.first_fitness = first_out.fitness;
    result.second_fitness = second_out.fitness;

    // Ties designate the second-drawn genotype the loser.
    const bool first_wins = first_out.fitness >= second_out.fitness;
    result.winner_index = first_wins ? first : second;
    result.loser_index = first_wins ? second : first;
    result.winner_fitness = first_wins ? first_out.fitness : second_out.fitness;
    result.loser_fitness = first_wins ? second_out.fitness : first_out.fitness;
    result.winner_trace = first_wins ? first_out.trace : second_out.trace;
    result.loser_trace = first_wins ? second_out.trace : first_out.trace;

    const Genotype& winner_g = state.population[result.winner_index];
    const Genotype& loser_g = state.population[result.loser_index];
    Genotype infected = recombine(winner_g, loser_g, params.infection_rate, state.rng);
    result.new_loser =
        mutate(infected, params.resolved_mutation_rate(arch), arch, state.rng);
    state.population[result.loser_index] = result.new_loser;

    ++state.tournaments_completed;
    return result;
}

EvalOutcome evaluate_fitness(SuperNetwork& net, const Genotype& path, const TaskSpec& task,
                             const EvolutionParams& params, Rng& rng) {
    params.validate();
    if (task.train.size() < params.batch_size) {
        throw std::invalid_argument("evaluate_fitness: training set of " +
                                    std::to_string(task.train.size()) +
                                    " samples is smaller than batch_size " +
                                    std::to_string(params.batch_size));
    }

    EpochSampler sampler(task.train, params.batch_size, rng);

    EvalOutcome out;
    std::size_t total_correct = 0;
    std::size_t total_seen = 0;
    double total_loss = 0.0;

    Matrix x;
    std::vector<int> labels;
    for (std::size_t epoch = 0; epoch < params.epochs_per_eval; ++epoch) {
        sampler.start_epoch();
        std::size_t epoch_correct = 0;
        std::size_t epoch_seen = 0;
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        while (batches < params.minibatches_per_epoch && sampler.next(x, labels)) {
            const StepStats stats =
                net.backward_and_update(path, task.task_id, x, labels, params.learning_rate);
            epoch_correct += stats.correct;
            epoch_seen += stats.batch;
            epoch_loss += stats.loss;
            ++batches;
        }
        total_correct += epoch_correct;
        total_seen += epoch_seen;
        total_loss += epoch_loss;
        out.trace.batches += batches;
        out.trace.epochs.push_back(
            EpochStats{batches ? epoch_loss / static_cast<double>(batches) : 0.0,
                       epoch_seen ? static_cast<double>(epoch_correct) /
                                        static_cast<double>(epoch_seen)
                                  : 0.0});
    }

    out.fitness =
        total_seen ? static_cast<double>(total_correct) / static_cast<double>(total_seen) : 0.0;
    out.trace.mean_loss =
        out.trace.batches ? total_loss / static_cast<double>(out.trace.batches) : 0.0;
    return out;
}

EvolutionState evolve(SuperNetwork& net, const TaskSpec& task, const EvolutionParams& params,
                      EvolutionState state, std::size_t budget, const MetricsHook& hook,
                      const RunContext& ctx) {
    using clock = std::chrono::steady_clock;

    for (std::size_t gen = 0; gen < budget; ++gen) {
        const std::size_t generation = state.tournaments_completed + 1;

        std::array<double, 2> wallclock{};
        std::array<EvalOutcome, 2> outcomes;
        std::array<std::string, 2> texts;
        int eval_slot = 0;
        auto evaluator = [&](const Genotype& g) {
            const auto t0 = clock::now();
            EvalOutcome out = evaluate_fitness(net, g, task, params, state.rng);
            const auto t1 = clock::now();
            wallclock[eval_slot] = std::chrono::duration<double, std::milli>(t1 - t0).count();
            outcomes[eval_slot] = out;
            texts[eval_slot] = g.to_text();
            ++eval_slot;
            return out;
        };

        microbial_tournament(state, params, net.arch(), evaluator);

        if (hook) {
            for (int slot = 0; slot < 2; ++slot) {
                MetricsRecord rec;
                rec.phase = ctx.phase;
                rec.iteration = ctx.iteration;
                rec.generation = generation;
                rec.path_index = slot;
                rec.genotype = texts[slot];
                rec.fitness = outcomes[slot].fitness;
                rec.mean_train_loss = outcomes[slot].trace.mean_loss;
                rec.wallclock_ms = wallclock[slot];
                rec.seed = ctx.seed;
                hook(rec);
            }
        }
    }
    return state;
}

}  // namespace pathnet
