#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathnet/evolution.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"

namespace pathnet {

struct StagePlanEntry {
    std::string task_id;
    Phase role = Phase::Source;
    std::size_t budget = 1;  // generations
};

/// One iteration's stage sequence, repeated `iterations` times. Scratch
/// stages always run on a fresh, never-frozen network.
struct TransferPlan {
    std::vector<StagePlanEntry> stages;
    std::size_t iterations = 4;
    /// Freeze-and-reinit after destination stages too, not only source ones.
    bool consolidate_destination = true;

    void validate() const;
};

TransferPlan make_transfer_plan(const std::string& source_id, const std::string& dest_id,
                                std::size_t source_budget, std::size_t dest_budget,
                                std::size_t iterations, bool scratch_baseline = true,
                                bool consolidate_destination = true);

struct StageOutcome {
    std::string task_id;
    Phase role = Phase::Source;
    int iteration = 1;
    Genotype best_genotype;
    double best_fitness = 0.0;
    double final_eval_accuracy = 0.0;  // held-out split, best path
    double final_train_loss = 0.0;     // mean loss over the training split, best path
    std::vector<MetricsRecord> metrics;
};

struct StageResult {
    EvolutionState state;
    StageOutcome outcome;
};

/// End-of-stage bookkeeping: evaluates the best-seen path on the task's
/// train and eval splits and emits one summary row (eval_accuracy set,
/// path_index empty) through the hook. Requires at least one completed
/// evaluation.
StageOutcome finalize_stage(const SuperNetwork& net, const TaskSpec& task,
                            const EvolutionState& state, const RunContext& ctx,
                            const MetricsHook& hook = {});

/// Fresh random population, `budget` tournaments, then an end-of-stage
/// evaluation of the best-seen path. Emits the stage's evaluation rows plus
/// one summary row through the hook.
StageResult run_stage(SuperNetwork& net, const TaskSpec& task, const EvolutionParams& params,
                      std::size_t budget, Rng rng, const RunContext& ctx,
                      const MetricsHook& hook = {});

/// freeze_path(best) then reinit_unfrozen: knowledge on the best path is
/// fixed, everything else is redrawn for the next stage. Warns on stderr
/// when a layer becomes entirely frozen.
void consolidate(SuperNetwork& net, const StageOutcome& outcome, Rng& rng);

struct IterationRow {
    int iteration = 1;  // 1-based
    double transfer_acc = 0.0;
    double scratch_acc = 0.0;
    double transfer_loss = 0.0;
    double scratch_loss = 0.0;
    double delta_acc = 0.0;  // transfer_acc - scratch_acc
    bool has_scratch = false;
};

struct ExperimentReport {
    std::uint64_t seed = 0;
    std::string source_task;
    std::string destination_task;
    std::size_t iterations = 0;
    std::vector<IterationRow> rows;
    int best_iteration = 0;  // 1-based argmax of transfer_acc
    std::vector<StageOutcome> stage_outcomes;
    std::vector<MetricsRecord> metrics;
};

/// 1-based index of the row with the highest transfer accuracy (earliest on
/// ties); 0 when empty.
int best_iteration_of(const std::vector<IterationRow>& rows);

/// The full protocol: per iteration, evolve on the source task, consolidate,
/// evolve on the destination task, consolidate; scratch stages run the same
/// destination budget on a fresh network with a derived, non-overlapping
/// seed stream. Works unchanged when source and destination are the same
/// task (self-accumulation).
ExperimentReport run_transfer_experiment(const TransferPlan& plan, const TaskSpec& source,
                                         const TaskSpec& destination,
                                         const EvolutionParams& params, const Architecture& arch,
                                         std::uint64_t seed);

/// Seed streams, all derived from the experiment seed:
/// stream 0 reserved for network init, then one per (iteration, stage, use).
std::uint64_t experiment_net_seed(std::uint64_t seed);
std::uint64_t stage_seed(std::uint64_t seed, int iteration, Phase role);
std::uint64_t consolidate_seed(std::uint64_t seed, int iteration, Phase role);
std::uint64_t scratch_net_seed(std::uint64_t seed, int iteration);

}  // namespace pathnet
