#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "pathnet/genotype.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"

namespace pathnet {

struct EvolutionParams {
    std::size_t population_size = 20;
    std::size_t generations = 1000;
    std::size_t epochs_per_eval = 50;
    std::size_t minibatches_per_epoch = 50;
    std::size_t batch_size = 16;
    double learning_rate = 0.02;
    double infection_rate = 0.5;
    /// Per-gene replacement probability; unset picks 1 / (L * max_path_width).
    std::optional<double> mutation_rate;

    void validate() const;
    double resolved_mutation_rate(const Architecture& arch) const;
};

struct EpochStats {
    double mean_loss = 0.0;
    double accuracy = 0.0;
};

/// Per-evaluation training trace: one entry per epoch plus aggregates over
/// every batch of the evaluation window.
struct EvalTrace {
    std::vector<EpochStats> epochs;
    double mean_loss = 0.0;
    std::size_t batches = 0;
};

struct EvalOutcome {
    double fitness = 0.0;  // fraction of correct training samples over the window
    EvalTrace trace;
};

struct BestSeen {
    Genotype genotype;
    double fitness = -1.0;
};

struct EvolutionState {
    std::vector<Genotype> population;
    Rng rng{0};
    std::size_t tournaments_completed = 0;
    std::size_t paths_evaluated = 0;
    std::optional<BestSeen> best_seen;
};

/// Per layer: width uniform in [1, max_path_width], then that many distinct
/// module indices sampled without replacement.
Genotype random_genotype(const Architecture& arch, Rng& rng);

EvolutionState make_initial_state(const Architecture& arch, const EvolutionParams& params,
                                  Rng rng);

/// Winner-infects-loser: per layer, with probability infection_rate the
/// loser's gene set is replaced by the winner's.
Genotype recombine(const Genotype& winner, const Genotype& loser, double infection_rate,
                   Rng& rng);

/// Each gene independently, with probability mutation_rate, is replaced by
/// a uniform draw from [0, M); draws colliding with the layer's current set
/// are rejected up to M times, after which the gene is left unchanged.
/// Width is preserved.
Genotype mutate(const Genotype& g, double mutation_rate, const Architecture& arch, Rng& rng);

struct TournamentResult {
    std::size_t winner_index = 0;
    std::size_t loser_index = 0;
    double winner_fitness = 0.0;
    double loser_fitness = 0.0;
    Genotype new_loser;
    EvalTrace winner_trace;
    EvalTrace loser_trace;
    // Draw order, for logging: first/second as evaluated.
    std::size_t first_index = 0;
    std::size_t second_index = 0;
    double first_fitness = 0.0;
    double second_fitness = 0.0;
};

using PathEvaluator = std::function<EvalOutcome(const Genotype&)>;

/// One microbial GA cycle: draw two distinct genotypes, evaluate both in
/// draw order, then overwrite the loser with a recombined-and-mutated copy.
/// Equal fitness designates the second-drawn genotype the loser.
TournamentResult microbial_tournament(EvolutionState& state, const EvolutionParams& params,
                                      const Architecture& arch, const PathEvaluator& evaluate);

/// Trains the path in place (freeze mask respected) for epochs_per_eval
/// epochs of up to minibatches_per_epoch mini-batches. Fitness is the
/// fraction of correctly classified samples accumulated over every
/// training batch of the window.
EvalOutcome evaluate_fitness(SuperNetwork& net, const Genotype& path, const TaskSpec& task,
                             const EvolutionParams& params, Rng& rng);

/// Labels emitted metrics rows with the owning stage.
struct RunContext {
    Phase phase = Phase::Source;
    int iteration = 1;
    std::uint64_t seed = 0;
};

/// Runs `budget` tournaments against the task, emitting one MetricsRecord
/// per path evaluation through the hook (if any).
EvolutionState evolve(SuperNetwork& net, const TaskSpec& task, const EvolutionParams& params,
                      EvolutionState state, std::size_t budget, const MetricsHook& hook = {},
                      const RunContext& ctx = {});

}  // namespace pathnet
