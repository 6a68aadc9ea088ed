#include <algorithm>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "pathnet/evolution.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"
#include "pathnet/transfer.hpp"

using namespace pathnet;

namespace {

Architecture small_arch() {
    Architecture a;
    a.num_layers = 2;
    a.modules_per_layer = 4;
    a.neurons_per_module = 6;
    a.max_path_width = 2;
    a.input_dim = 6;
    return a;
}

EvolutionParams small_params() {
    EvolutionParams p;
    p.population_size = 4;
    p.epochs_per_eval = 1;
    p.minibatches_per_epoch = 2;
    p.batch_size = 8;
    p.learning_rate = 0.05;
    return p;
}

TaskSpec small_source(std::uint64_t seed = 1001) {
    return make_task("src", make_blobs(3, 6, 30, 0.8, seed), 0.2, seed + 1);
}

TaskSpec small_destination(std::uint64_t seed = 1001) {
    auto base = make_blobs(3, 6, 30, 0.8, seed);
    auto rotated = derive_related_task(base, RelatedKind::FixedRotation, seed + 2);
    return make_task("dst", rotated, 0.2, seed + 3);
}

std::vector<MetricsRecord> filter_phase(const std::vector<MetricsRecord>& rows, Phase phase) {
    std::vector<MetricsRecord> out;
    for (const auto& r : rows)
        if (r.phase == phase) out.push_back(r);
    return out;
}

}  // namespace

TEST(Plan, BuilderAndValidation) {
    auto plan = make_transfer_plan("a", "b", 10, 20, 4);
    ASSERT_EQ(plan.stages.size(), 3u);
    EXPECT_EQ(plan.stages[0].role, Phase::Source);
    EXPECT_EQ(plan.stages[0].budget, 10u);
    EXPECT_EQ(plan.stages[1].role, Phase::Destination);
    EXPECT_EQ(plan.stages[2].role, Phase::Scratch);
    EXPECT_EQ(plan.stages[2].task_id, "b");
    EXPECT_EQ(plan.stages[2].budget, 20u);

    auto no_scratch = make_transfer_plan("a", "b", 10, 20, 4, /*scratch_baseline=*/false);
    EXPECT_EQ(no_scratch.stages.size(), 2u);

    EXPECT_THROW(make_transfer_plan("a", "b", 0, 20, 4).validate(), std::invalid_argument);
    EXPECT_THROW(make_transfer_plan("a", "b", 10, 20, 0).validate(), std::invalid_argument);
    TransferPlan empty;
    EXPECT_THROW(empty.validate(), std::invalid_argument);
}

TEST(Stage, SingleTournamentEmitsTwoEvalsAndASummary) {
    auto task = small_source();
    Rng rng(7);
    SuperNetwork net(small_arch(), rng);
    net.register_head("src", 3, rng);
    RunContext ctx{Phase::Source, 1, 99};

    auto result = run_stage(net, task, small_params(), 1, Rng(11), ctx);
    ASSERT_EQ(result.outcome.metrics.size(), 3u);

    const auto& first = result.outcome.metrics[0];
    const auto& second = result.outcome.metrics[1];
    const auto& summary = result.outcome.metrics[2];
    EXPECT_EQ(first.path_index, 0);
    EXPECT_EQ(second.path_index, 1);
    EXPECT_FALSE(first.eval_accuracy.has_value());
    EXPECT_FALSE(summary.path_index.has_value());
    ASSERT_TRUE(summary.eval_accuracy.has_value());
    EXPECT_EQ(summary.generation, 1u);
    EXPECT_EQ(summary.seed, 99u);
    EXPECT_EQ(summary.genotype, result.outcome.best_genotype.to_text());
    EXPECT_DOUBLE_EQ(summary.fitness, result.outcome.best_fitness);

    // Best-seen is whichever of the two drawn paths scored higher.
    EXPECT_DOUBLE_EQ(result.outcome.best_fitness, std::max(first.fitness, second.fitness));
    EXPECT_EQ(result.state.tournaments_completed, 1u);
}

TEST(Stage, IdenticalSeedsGiveIdenticalOutcomes) {
    auto task = small_source();
    auto run_once = [&]() {
        Rng rng(13);
        SuperNetwork net(small_arch(), rng);
        net.register_head("src", 3, rng);
        auto result = run_stage(net, task, small_params(), 4, Rng(17), RunContext{});
        return metrics_to_csv(result.outcome.metrics);
    };
    EXPECT_EQ(run_once(), run_once());
}

TEST(Stage, FinalizeRequiresAnEvaluation) {
    auto task = small_source();
    Rng rng(19);
    SuperNetwork net(small_arch(), rng);
    net.register_head("src", 3, rng);
    auto state = make_initial_state(small_arch(), small_params(), Rng(23));
    EXPECT_THROW(finalize_stage(net, task, state, RunContext{}), std::logic_error);
}

TEST(Consolidate, FreezesTheBestPathAndRedrawsTheRest) {
    auto task = small_source();
    Rng rng(29);
    SuperNetwork net(small_arch(), rng);
    net.register_head("src", 3, rng);
    auto result = run_stage(net, task, small_params(), 3, Rng(31), RunContext{});
    SuperNetwork before = net;

    Rng consolidate_rng(37);
    consolidate(net, result.outcome, consolidate_rng);

    const auto& g = result.outcome.best_genotype;
    for (std::size_t l = 0; l < net.arch().num_layers; ++l) {
        const auto& active = g.layer(l);
        for (std::size_t m = 0; m < net.arch().modules_per_layer; ++m) {
            bool on_path =
                std::find(active.begin(), active.end(), static_cast<int>(m)) != active.end();
            EXPECT_EQ(net.frozen(l, m), on_path);
            bool kept = bitwise_equal(net.module(l, m).w, before.module(l, m).w) &&
                        bitwise_equal(net.module(l, m).b, before.module(l, m).b);
            EXPECT_EQ(kept, on_path) << "layer " << l << " module " << m;
        }
    }
    // Heads survive consolidation.
    EXPECT_TRUE(bitwise_equal(net.head("src").params.w, before.head("src").params.w));
}

TEST(Consolidate, FrozenModulesSurviveTheNextStage) {
    auto source = small_source();
    auto destination = small_destination();
    Rng rng(41);
    SuperNetwork net(small_arch(), rng);
    net.register_head("src", 3, rng);
    net.register_head("dst", 3, rng);

    auto src_result = run_stage(net, source, small_params(), 3, Rng(43), RunContext{});
    Rng consolidate_rng(47);
    consolidate(net, src_result.outcome, consolidate_rng);
    SuperNetwork frozen_snapshot = net;

    run_stage(net, destination, small_params(), 5, Rng(53),
              RunContext{Phase::Destination, 1, 0});

    const auto& g = src_result.outcome.best_genotype;
    for (std::size_t l = 0; l < net.arch().num_layers; ++l)
        for (int m : g.layer(l)) {
            const auto mi = static_cast<std::size_t>(m);
            EXPECT_TRUE(bitwise_equal(net.module(l, mi).w, frozen_snapshot.module(l, mi).w));
            EXPECT_TRUE(bitwise_equal(net.module(l, mi).b, frozen_snapshot.module(l, mi).b));
        }
}

TEST(Consolidate, AccumulatesFreezesAcrossStages) {
    auto task = small_source();
    Rng rng(59);
    SuperNetwork net(small_arch(), rng);
    net.register_head("src", 3, rng);

    auto r1 = run_stage(net, task, small_params(), 2, Rng(61), RunContext{});
    Rng c1(67);
    consolidate(net, r1.outcome, c1);
    auto frozen_after_first = net.frozen_count();

    auto r2 = run_stage(net, task, small_params(), 2, Rng(71), RunContext{});
    Rng c2(73);
    consolidate(net, r2.outcome, c2);
    EXPECT_GE(net.frozen_count(), frozen_after_first);  // union, never shrinking

    for (std::size_t l = 0; l < net.arch().num_layers; ++l)
        for (int m : r1.outcome.best_genotype.layer(l))
            EXPECT_TRUE(net.frozen(l, static_cast<std::size_t>(m)));
}

TEST(BestIteration, EarliestArgmaxAndEmptyCases) {
    EXPECT_EQ(best_iteration_of({}), 0);
    std::vector<IterationRow> rows(3);
    rows[0].iteration = 1;
    rows[0].transfer_acc = 0.5;
    rows[1].iteration = 2;
    rows[1].transfer_acc = 0.8;
    rows[2].iteration = 3;
    rows[2].transfer_acc = 0.8;  // tie with iteration 2
    EXPECT_EQ(best_iteration_of(rows), 2);
}

TEST(Experiment, ReportShapeAndDelta) {
    auto source = small_source();
    auto destination = small_destination();
    auto plan = make_transfer_plan("src", "dst", 3, 3, 2);

    auto report = run_transfer_experiment(plan, source, destination, small_params(),
                                          small_arch(), 2024);
    EXPECT_EQ(report.seed, 2024u);
    EXPECT_EQ(report.source_task, "src");
    EXPECT_EQ(report.destination_task, "dst");
    EXPECT_EQ(report.iterations, 2u);
    ASSERT_EQ(report.rows.size(), 2u);
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& row = report.rows[i];
        EXPECT_EQ(row.iteration, static_cast<int>(i) + 1);
        EXPECT_TRUE(row.has_scratch);
        EXPECT_DOUBLE_EQ(row.delta_acc, row.transfer_acc - row.scratch_acc);
        EXPECT_GE(row.transfer_acc, 0.0);
        EXPECT_LE(row.transfer_acc, 1.0);
    }
    EXPECT_EQ(report.best_iteration, best_iteration_of(report.rows));
    // source, destination, scratch per iteration
    ASSERT_EQ(report.stage_outcomes.size(), 6u);
    EXPECT_EQ(report.stage_outcomes[0].role, Phase::Source);
    EXPECT_EQ(report.stage_outcomes[1].role, Phase::Destination);
    EXPECT_EQ(report.stage_outcomes[2].role, Phase::Scratch);
    EXPECT_EQ(report.stage_outcomes[3].iteration, 2);

    // 2 iterations x 3 stages x (3 tournaments x 2 evals + 1 summary)
    EXPECT_EQ(report.metrics.size(), 42u);
    for (Phase phase : {Phase::Source, Phase::Destination, Phase::Scratch})
        EXPECT_FALSE(filter_phase(report.metrics, phase).empty());
}

TEST(Experiment, ByteIdenticalAcrossRuns) {
    auto source = small_source();
    auto destination = small_destination();
    auto plan = make_transfer_plan("src", "dst", 2, 3, 2);
    auto a = run_transfer_experiment(plan, source, destination, small_params(), small_arch(), 7);
    auto b = run_transfer_experiment(plan, source, destination, small_params(), small_arch(), 7);
    EXPECT_EQ(metrics_to_csv(a.metrics), metrics_to_csv(b.metrics));
    EXPECT_EQ(a.best_iteration, b.best_iteration);
    ASSERT_EQ(a.rows.size(), b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        EXPECT_DOUBLE_EQ(a.rows[i].transfer_acc, b.rows[i].transfer_acc);
        EXPECT_DOUBLE_EQ(a.rows[i].scratch_acc, b.rows[i].scratch_acc);
    }

    auto c = run_transfer_experiment(plan, source, destination, small_params(), small_arch(), 8);
    EXPECT_NE(metrics_to_csv(a.metrics), metrics_to_csv(c.metrics));
}

TEST(Experiment, ScratchBaselineDoesNotPerturbTheTransferArm) {
    // The scratch stages draw from dedicated seed streams, so switching the
    // baseline off must leave every source/destination row byte-identical.
    auto source = small_source();
    auto destination = small_destination();
    auto with = run_transfer_experiment(make_transfer_plan("src", "dst", 2, 3, 2), source,
                                        destination, small_params(), small_arch(), 99);
    auto without = run_transfer_experiment(
        make_transfer_plan("src", "dst", 2, 3, 2, /*scratch_baseline=*/false), source,
        destination, small_params(), small_arch(), 99);

    for (Phase phase : {Phase::Source, Phase::Destination}) {
        EXPECT_EQ(metrics_to_csv(filter_phase(with.metrics, phase)),
                  metrics_to_csv(filter_phase(without.metrics, phase)));
    }
    EXPECT_TRUE(filter_phase(without.metrics, Phase::Scratch).empty());
    ASSERT_EQ(without.rows.size(), 2u);
    EXPECT_FALSE(without.rows[0].has_scratch);
    EXPECT_DOUBLE_EQ(without.rows[0].transfer_acc, with.rows[0].transfer_acc);
    EXPECT_DOUBLE_EQ(without.rows[0].delta_acc, 0.0);
}

TEST(Experiment, RunsUnchangedWhenDestinationIsTheSourceTask) {
    auto source = small_source();
    auto plan = make_transfer_plan("src", "src", 2, 2, 2, /*scratch_baseline=*/false);
    auto report =
        run_transfer_experiment(plan, source, source, small_params(), small_arch(), 55);
    EXPECT_EQ(report.source_task, "src");
    EXPECT_EQ(report.destination_task, "src");
    ASSERT_EQ(report.rows.size(), 2u);
    EXPECT_GT(report.best_iteration, 0);
    for (const auto& rec : report.metrics) EXPECT_NE(rec.seed, 0u);
}

TEST(Experiment, SeedStreamsAreDistinct) {
    std::set<std::uint64_t> seen;
    const std::uint64_t seed = 1234;
    seen.insert(experiment_net_seed(seed));
    for (int it = 1; it <= 4; ++it) {
        for (Phase role : {Phase::Source, Phase::Destination, Phase::Scratch}) {
            seen.insert(stage_seed(seed, it, role));
            seen.insert(consolidate_seed(seed, it, role));
        }
        seen.insert(scratch_net_seed(seed, it));
    }
    EXPECT_EQ(seen.size(), 1u + 4u * 7u);  // every stream distinct
    EXPECT_NE(stage_seed(seed, 1, Phase::Source), stage_seed(seed + 1, 1, Phase::Source));
}
