#include "pathnet/transfer.hpp"

#include <iostream>
#include <stdexcept>

#include "pathnet/nn.hpp"

namespace pathnet {

void TransferPlan::validate() const {
    if (stages.empty()) throw std::invalid_argument("transfer plan: no stages");
    if (iterations < 1) throw std::invalid_argument("transfer plan: iterations must be >= 1");
    for (const auto& s : stages) {
        if (s.budget < 1) {
            throw std::invalid_argument("transfer plan: stage budget must be >= 1 (task \"" +
                                        s.task_id + "\")");
        }
        if (s.task_id.empty()) throw std::invalid_argument("transfer plan: empty task id");
    }
}

TransferPlan make_transfer_plan(const std::string& source_id, const std::string& dest_id,
                                std::size_t source_budget, std::size_t dest_budget,
                                std::size_t iterations, bool scratch_baseline,
                                bool consolidate_destination) {
    TransferPlan plan;
    plan.iterations = iterations;
    plan.consolidate_destination = consolidate_destination;
    plan.stages.push_back({source_id, Phase::Source, source_budget});
    plan.stages.push_back({dest_id, Phase::Destination, dest_budget});
    if (scratch_baseline) plan.stages.push_back({dest_id, Phase::Scratch, dest_budget});
    plan.validate();
    return plan;
}

namespace {

// Seed stream tags; the layout is part of the reproducibility contract.
constexpr std::uint64_t kStreamNet = 0;
constexpr std::uint64_t kStreamStageBase = 1000;
constexpr std::uint64_t kStreamConsolidateBase = 2000;
constexpr std::uint64_t kStreamScratchNetBase = 3000;

std::uint64_t role_offset(Phase role) {
    switch (role) {
        case Phase::Source: return 0;
        case Phase::Destination: return 1;
        case Phase::Scratch: return 2;
    }
    return 3;
}

/// Mean loss and accuracy of one full pass (no updates).
std::pair<double, double> evaluate_split(const SuperNetwork& net, const Genotype& path,
                                         const std::string& task_id, const Dataset& ds) {
    const ForwardTrace trace = net.forward(path, task_id, ds.features);
    const LossGrad lg = softmax_cross_entropy(trace.logits, ds.labels);
    return {lg.loss, static_cast<double>(lg.correct) / static_cast<double>(ds.size())};
}

}  // namespace

std::uint64_t experiment_net_seed(std::uint64_t seed) { return derive_seed(seed, kStreamNet); }

std::uint64_t stage_seed(std::uint64_t seed, int iteration, Phase role) {
    return derive_seed(seed, kStreamStageBase + 16 * static_cast<std::uint64_t>(iteration) +
                                 role_offset(role));
}

std::uint64_t consolidate_seed(std::uint64_t seed, int iteration, Phase role) {
    return derive_seed(seed, kStreamConsolidateBase +
                                 16 * static_cast<std::uint64_t>(iteration) + role_offset(role));
}

std::uint64_t scratch_net_seed(std::uint64_t seed, int iteration) {
    return derive_seed(seed, kStreamScratchNetBase + static_cast<std::uint64_t>(iteration));
}

StageOutcome finalize_stage(const SuperNetwork& net, const TaskSpec& task,
                            const EvolutionState& state, const RunContext& ctx,
                            const MetricsHook& hook) {
    if (!state.best_seen) {
        throw std::logic_error("finalize_stage: no path evaluated yet");
    }
    StageOutcome outcome;
    outcome.task_id = task.task_id;
    outcome.role = ctx.phase;
    outcome.iteration = ctx.iteration;
    outcome.best_genotype = state.best_seen->genotype;
    outcome.best_fitness = state.best_seen->fitness;

    const auto [train_loss, train_acc] =
        evaluate_split(net, outcome.best_genotype, task.task_id, task.train);
    (void)train_acc;
    const auto [eval_loss, eval_acc] =
        evaluate_split(net, outcome.best_genotype, task.task_id, task.eval);
    (void)eval_loss;
    outcome.final_train_loss = train_loss;
    outcome.final_eval_accuracy = eval_acc;

    MetricsRecord summary;
    summary.phase = ctx.phase;
    summary.iteration = ctx.iteration;
    summary.generation = state.tournaments_completed;
    summary.genotype = outcome.best_genotype.to_text();
    summary.fitness = outcome.best_fitness;
    summary.mean_train_loss = outcome.final_train_loss;
    summary.eval_accuracy = outcome.final_eval_accuracy;
    summary.seed = ctx.seed;
    if (hook) hook(summary);
    return outcome;
}

StageResult run_stage(SuperNetwork& net, const TaskSpec& task, const EvolutionParams& params,
                      std::size_t budget, Rng rng, const RunContext& ctx,
                      const MetricsHook& hook) {
    StageResult result;
    std::vector<MetricsRecord> rows;

    auto collect = [&](const MetricsRecord& rec) {
        rows.push_back(rec);
        if (hook) hook(rec);
    };

    EvolutionState state = make_initial_state(net.arch(), params, rng);
    state = evolve(net, task, params, std::move(state), budget, collect, ctx);

    result.outcome = finalize_stage(net, task, state, ctx, collect);
    result.outcome.metrics = std::move(rows);
    result.state = std::move(state);
    return result;
}

void consolidate(SuperNetwork& net, const StageOutcome& outcome, Rng& rng) {
    net.freeze_path(outcome.best_genotype);
    net.reinit_unfrozen(rng);
    const auto& mask = net.freeze_mask();
    for (std::size_t l = 0; l < mask.size(); ++l) {
        std::size_t count = 0;
        for (auto f : mask[l]) count += f;
        if (count == mask[l].size()) {
            std::cerr << "warning: layer " << l << " is entirely frozen; evolution will proceed "
                      << "over frozen modules only\n";
        }
    }
}

ExperimentReport run_transfer_experiment(const TransferPlan& plan, const TaskSpec& source,
                                         const TaskSpec& destination,
                                         const EvolutionParams& params, const Architecture& arch,
                                         std::uint64_t seed) {
    plan.validate();
    params.validate();

    ExperimentReport report;
    report.seed = seed;
    report.source_task = source.task_id;
    report.destination_task = destination.task_id;
    report.iterations = plan.iterations;

    Rng net_rng(experiment_net_seed(seed));
    SuperNetwork net(arch, net_rng);
    net.register_head(source.task_id, source.train.num_classes, net_rng);
    if (destination.task_id != source.task_id) {
        net.register_head(destination.task_id, destination.train.num_classes, net_rng);
    }

    auto hook = [&report](const MetricsRecord& rec) { report.metrics.push_back(rec); };

    for (int iter = 1; iter <= static_cast<int>(plan.iterations); ++iter) {
        IterationRow row;
        row.iteration = iter;

        for (const auto& stage : plan.stages) {
            const TaskSpec& task = stage.task_id == source.task_id ? source : destination;
            RunContext ctx{stage.role, iter, seed};
            Rng stage_rng(stage_seed(seed, iter, stage.role));

            if (stage.role == Phase::Scratch) {
                Rng scratch_rng(scratch_net_seed(seed, iter));
                SuperNetwork scratch_net(arch, scratch_rng);
                scratch_net.register_head(task.task_id, task.train.num_classes, scratch_rng);
                StageResult res =
                    run_stage(scratch_net, task, params, stage.budget, stage_rng, ctx, hook);
                row.scratch_acc = res.outcome.final_eval_accuracy;
                row.scratch_loss = res.outcome.final_train_loss;
                row.has_scratch = true;
                report.stage_outcomes.push_back(std::move(res.outcome));
                continue;
            }

            StageResult res = run_stage(net, task, params, stage.budget, stage_rng, ctx, hook);
            if (stage.role == Phase::Destination) {
                row.transfer_acc = res.outcome.final_eval_accuracy;
                row.transfer_loss = res.outcome.final_train_loss;
            }
            const bool do_consolidate =
                stage.role == Phase::Source ||
                (stage.role == Phase::Destination && plan.consolidate_destination);
            if (do_consolidate) {
                Rng reinit_rng(consolidate_seed(seed, iter, stage.role));
                consolidate(net, res.outcome, reinit_rng);
            }
            report.stage_outcomes.push_back(std::move(res.outcome));
        }

        row.delta_acc = row.has_scratch ? row.transfer_acc - row.scratch_acc : 0.0;
        report.rows.push_back(row);
    }

    report.best_iteration = best_iteration_of(report.rows);
    return report;
}

int best_iteration_of(const std::vector<IterationRow>& rows) {
    int best = 0;
    for (const auto& row : rows) {
        if (best == 0 || row.transfer_acc > rows[static_cast<std::size_t>(best - 1)].transfer_acc) {
            best = row.iteration;
        }
    }
    return best;
}

}  // namespace pathnet
