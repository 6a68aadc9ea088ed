#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "pathnet/evolution.hpp"
#include "pathnet/genotype.hpp"
#include "pathnet/matrix.hpp"
#include "pathnet/metrics.hpp"
#include "pathnet/nn.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"

using namespace pathnet;

namespace {

Architecture arch_of(std::size_t layers, std::size_t modules, std::size_t width,
                     std::size_t neurons = 4, std::size_t input_dim = 5) {
    Architecture a;
    a.num_layers = layers;
    a.modules_per_layer = modules;
    a.neurons_per_module = neurons;
    a.max_path_width = width;
    a.input_dim = input_dim;
    return a;
}

// Deterministic stand-in fitness: favors high module indices. Lets GA
// plumbing be tested without touching a network.
EvalOutcome stub_fitness(const Genotype& g) {
    double sum = 0.0, count = 0.0;
    for (const auto& layer : g.genes())
        for (int idx : layer) {
            sum += static_cast<double>(idx);
            count += 1.0;
        }
    EvalOutcome out;
    out.fitness = count == 0.0 ? 0.0 : sum / (count * 100.0);
    return out;
}

// Multinomial logistic regression by full-batch gradient descent. Used as an
// independent check that a dataset really is linearly separable before we
// demand high fitness from the evolved nets.
double logistic_regression_accuracy(const Dataset& ds, int iters = 300, double lr = 0.5) {
    Matrix w(ds.dim(), ds.num_classes, 0.0);
    Matrix b(1, ds.num_classes, 0.0);
    for (int it = 0; it < iters; ++it) {
        auto logits = affine(ds.features, w, b);
        auto lg = softmax_cross_entropy(logits, ds.labels);  // grad is already the batch mean
        auto gw = matmul_at_b(ds.features, lg.grad_logits);
        auto gb = column_sums(lg.grad_logits);
        sgd_step_inplace(w, gw, lr, nullptr);
        sgd_step_inplace(b, gb, lr, nullptr);
    }
    auto preds = argmax_rows(affine(ds.features, w, b));
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == ds.labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(ds.size());
}

TaskSpec separable_task(std::uint64_t seed) {
    // Tight, well-separated 2-class clusters in 5 dimensions.
    auto full = make_blobs(2, 5, 100, 0.3, seed);
    return make_task("sep", full, 0.2, seed + 1);
}

}  // namespace

TEST(Genotype, TextRoundTripAndNormalization) {
    Genotype g({{7, 3}, {2}, {19, 5}});
    EXPECT_EQ(g.to_text(), "0:3,7|1:2|2:5,19");  // layers sorted ascending
    EXPECT_EQ(Genotype::from_text("0:3,7|1:2|2:5,19"), g);
    EXPECT_THROW(Genotype({{1, 1}}), std::invalid_argument);  // duplicate gene
    EXPECT_THROW(Genotype::from_text("garbage"), std::invalid_argument);
}

TEST(Genotype, ValidateForArchitecture) {
    auto arch = arch_of(2, 4, 2);
    Genotype ok({{0, 3}, {1}});
    EXPECT_NO_THROW(ok.validate_for(arch));
    EXPECT_THROW(Genotype(std::vector<std::vector<int>>{{0}}).validate_for(arch), std::invalid_argument);        // layers
    EXPECT_THROW(Genotype({{0, 1, 2}, {0}}).validate_for(arch), std::invalid_argument);  // width
    EXPECT_THROW(Genotype({{0, 4}, {0}}).validate_for(arch), std::invalid_argument);     // range
    EXPECT_THROW(Genotype({{}, {0}}).validate_for(arch), std::invalid_argument);         // empty
}

TEST(RandomGenotype, WidthOneWhenMaxWidthIsOne) {
    auto arch = arch_of(3, 8, 1);
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
        auto g = random_genotype(arch, rng);
        for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(g.layer(l).size(), 1u);
        g.validate_for(arch);
    }
}

TEST(RandomGenotype, FullWidthDrawsAreDistinctAndInRange) {
    auto arch = arch_of(2, 4, 4);  // width can reach M
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        auto g = random_genotype(arch, rng);
        for (std::size_t l = 0; l < 2; ++l) {
            std::set<int> seen(g.layer(l).begin(), g.layer(l).end());
            EXPECT_EQ(seen.size(), g.layer(l).size());  // distinct
            EXPECT_GE(*seen.begin(), 0);
            EXPECT_LT(*seen.rbegin(), 4);
        }
    }
}

TEST(RandomGenotype, LayerWidthIsUniform) {
    // 10k draws of a width in [1, 5]; chi-square against the uniform with
    // df = 4. 13.2767 is the 1% critical value.
    auto arch = arch_of(1, 20, 5);
    Rng rng(11);
    std::vector<double> counts(5, 0.0);
    const int n = 10000;
    for (int i = 0; i < n; ++i) counts[random_genotype(arch, rng).layer(0).size() - 1] += 1.0;
    const double expected = n / 5.0;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    EXPECT_LT(chi2, 13.2767) << "width counts are far from uniform";
}

TEST(Recombine, RateOneCopiesEveryLayerFromTheWinner) {
    Genotype winner({{0, 1}, {2}}), loser({{3}, {0, 1}});
    Rng rng(13);
    EXPECT_EQ(recombine(winner, loser, 1.0, rng), winner);
}

TEST(Recombine, RateZeroLeavesTheLoserAlone) {
    Genotype winner({{0, 1}, {2}}), loser({{3}, {0, 1}});
    Rng rng(17);
    EXPECT_EQ(recombine(winner, loser, 0.0, rng), loser);
}

TEST(Recombine, SelfInfectionIsIdentityAtAnyRate) {
    Genotype g({{1, 2}, {0}});
    Rng rng(19);
    for (double rate : {0.0, 0.3, 1.0}) EXPECT_EQ(recombine(g, g, rate, rng), g);
}

TEST(Recombine, LayerReplacementFrequencyMatchesTheRate) {
    Genotype winner(std::vector<std::vector<int>>{{0}}), loser(std::vector<std::vector<int>>{{1}});
    Rng rng(23);
    int replaced = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i)
        if (recombine(winner, loser, 0.5, rng) == winner) ++replaced;
    EXPECT_NEAR(replaced / static_cast<double>(n), 0.5, 0.02);
}

TEST(Mutate, RateZeroIsIdentity) {
    auto arch = arch_of(2, 6, 2);
    Genotype g({{0, 5}, {3}});
    Rng rng(29);
    EXPECT_EQ(mutate(g, 0.0, arch, rng), g);
}

TEST(Mutate, SingleModuleLayerCanOnlyCollide) {
    // M = 1: every replacement draw collides with the existing gene, so the
    // genotype can never change even at rate 1.
    auto arch = arch_of(2, 1, 1);
    Genotype g({{0}, {0}});
    Rng rng(31);
    for (int i = 0; i < 100; ++i) EXPECT_EQ(mutate(g, 1.0, arch, rng), g);
}

TEST(Mutate, PreservesWidthAndValidity) {
    auto arch = arch_of(3, 10, 4);
    Rng rng(37);
    for (int i = 0; i < 300; ++i) {
        auto g = random_genotype(arch, rng);
        auto m = mutate(g, 0.8, arch, rng);
        m.validate_for(arch);
        for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(m.layer(l).size(), g.layer(l).size());
    }
}

TEST(Mutate, ReplacementIsUniformOverTheOtherModules) {
    // Width-1 genotype at rate 1 with M = 20: the replacement is a uniform
    // draw over the 19 non-colliding indices (a colliding draw is redrawn).
    // Chi-square with df = 18; 34.805 is the 1% critical value.
    auto arch = arch_of(1, 20, 1);
    Genotype g(std::vector<std::vector<int>>{{7}});
    Rng rng(41);
    std::vector<double> counts(20, 0.0);
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        auto m = mutate(g, 1.0, arch, rng);
        ASSERT_EQ(m.layer(0).size(), 1u);
        ASSERT_NE(m.layer(0)[0], 7) << "a collision should have been redrawn";
        counts[m.layer(0)[0]] += 1.0;
    }
    const double expected = n / 19.0;
    double chi2 = 0.0;
    for (int idx = 0; idx < 20; ++idx) {
        if (idx == 7) continue;
        chi2 += (counts[idx] - expected) * (counts[idx] - expected) / expected;
    }
    EXPECT_LT(chi2, 34.805);
}

TEST(Params, ValidationCatchesNonsense) {
    EvolutionParams p;
    EXPECT_NO_THROW(p.validate());
    p.epochs_per_eval = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = EvolutionParams{};
    p.learning_rate = 0.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = EvolutionParams{};
    p.infection_rate = 1.5;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p = EvolutionParams{};
    p.mutation_rate = -0.1;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Params, DefaultMutationRateIsOnePerPathSlot) {
    EvolutionParams p;
    EXPECT_DOUBLE_EQ(p.resolved_mutation_rate(arch_of(3, 20, 5)), 1.0 / 15.0);
    p.mutation_rate = 0.25;
    EXPECT_DOUBLE_EQ(p.resolved_mutation_rate(arch_of(3, 20, 5)), 0.25);
}

TEST(Tournament, InvariantsHoldOverManyRounds) {
    auto arch = arch_of(3, 20, 5);
    EvolutionParams params;
    params.population_size = 12;
    EvolutionState state = make_initial_state(arch, params, Rng(43));
    ASSERT_EQ(state.population.size(), 12u);

    double prev_best = -1.0;
    for (int round = 0; round < 1000; ++round) {
        auto before = state.population;
        auto res = microbial_tournament(state, params, arch, stub_fitness);

        EXPECT_NE(res.winner_index, res.loser_index);
        EXPECT_GE(res.winner_fitness, res.loser_fitness);
        // The winner is preserved exactly; only the loser slot changed.
        EXPECT_EQ(state.population[res.winner_index], before[res.winner_index]);
        EXPECT_EQ(state.population[res.loser_index], res.new_loser);
        for (std::size_t i = 0; i < state.population.size(); ++i) {
            if (i != res.loser_index) EXPECT_EQ(state.population[i], before[i]);
            state.population[i].validate_for(arch);
        }
        EXPECT_EQ(state.population.size(), 12u);

        ASSERT_TRUE(state.best_seen.has_value());
        EXPECT_GE(state.best_seen->fitness, prev_best);
        EXPECT_GE(state.best_seen->fitness,
                  std::max(res.winner_fitness, res.loser_fitness) - 1e-15);
        prev_best = state.best_seen->fitness;
    }
    EXPECT_EQ(state.tournaments_completed, 1000u);
    EXPECT_EQ(state.paths_evaluated, 2000u);
}

TEST(Tournament, EqualFitnessMakesTheSecondDrawnLose) {
    auto arch = arch_of(2, 6, 2);
    EvolutionParams params;
    params.population_size = 8;
    auto constant = [](const Genotype&) { return EvalOutcome{0.5, {}}; };
    EvolutionState state = make_initial_state(arch, params, Rng(47));
    for (int i = 0; i < 50; ++i) {
        auto res = microbial_tournament(state, params, arch, constant);
        EXPECT_EQ(res.loser_index, res.second_index);
        EXPECT_EQ(res.winner_index, res.first_index);
    }
}

TEST(Tournament, FullInfectionNoMutationClonesTheWinner) {
    auto arch = arch_of(2, 6, 2);
    EvolutionParams params;
    params.population_size = 6;
    params.infection_rate = 1.0;
    params.mutation_rate = 0.0;
    EvolutionState state = make_initial_state(arch, params, Rng(53));
    for (int i = 0; i < 20; ++i) {
        auto res = microbial_tournament(state, params, arch, stub_fitness);
        EXPECT_EQ(res.new_loser, state.population[res.winner_index]);
    }
}

TEST(Tournament, NoInfectionNoMutationLeavesTheLoserUnchanged) {
    auto arch = arch_of(2, 6, 2);
    EvolutionParams params;
    params.population_size = 6;
    params.infection_rate = 0.0;
    params.mutation_rate = 0.0;
    EvolutionState state = make_initial_state(arch, params, Rng(59));
    for (int i = 0; i < 20; ++i) {
        auto before = state.population;
        auto res = microbial_tournament(state, params, arch, stub_fitness);
        EXPECT_EQ(res.new_loser, before[res.loser_index]);
    }
}

TEST(Fitness, SingleClassDataIsAlwaysRight) {
    // With one class the argmax can only ever be correct, so the accumulated
    // fraction must be exactly 1 whatever the parameters do.
    Dataset ds;
    ds.features = Matrix(32, 3, 0.5);
    for (std::size_t i = 0; i < 32; ++i) ds.features(i, 0) = static_cast<double>(i);
    ds.labels.assign(32, 0);
    ds.num_classes = 1;
    ds.name = "one-class";
    TaskSpec task{"one", ds, ds, "synthetic"};

    Rng rng(61);
    auto arch = arch_of(2, 3, 2, 4, 3);
    SuperNetwork net(arch, rng);
    net.register_head("one", 1, rng);
    EvolutionParams params;
    params.epochs_per_eval = 2;
    params.minibatches_per_epoch = 2;
    params.batch_size = 8;
    Rng eval_rng(67);
    auto out = evaluate_fitness(net, random_genotype(arch, eval_rng), task, params, eval_rng);
    EXPECT_DOUBLE_EQ(out.fitness, 1.0);
    EXPECT_EQ(out.trace.batches, 4u);
}

TEST(Fitness, RejectsBatchLargerThanTrainingSet) {
    auto task = separable_task(71);
    Rng rng(73);
    auto arch = arch_of(2, 3, 2, 4, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    EvolutionParams params;
    params.batch_size = task.train.size() + 1;
    Rng eval_rng(79);
    EXPECT_THROW(evaluate_fitness(net, random_genotype(arch, eval_rng), task, params, eval_rng),
                 std::invalid_argument);
}

TEST(Fitness, SeparableTaskScoresHigh) {
    auto task = separable_task(83);
    // Independent check first: a linear model must nail this data.
    ASSERT_GE(logistic_regression_accuracy(task.train), 0.98);

    Rng rng(89);
    auto arch = arch_of(2, 4, 2, 8, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    EvolutionParams params;
    params.epochs_per_eval = 50;
    params.minibatches_per_epoch = 50;  // capped by the data: 10 per epoch
    params.batch_size = 16;
    params.learning_rate = 0.05;
    Rng eval_rng(97);
    auto out = evaluate_fitness(net, random_genotype(arch, eval_rng), task, params, eval_rng);
    EXPECT_GE(out.fitness, 0.95);
    // The window accumulates over capped epochs: 160 samples / 16 = 10 batches.
    EXPECT_EQ(out.trace.batches, 500u);
    EXPECT_EQ(out.trace.epochs.size(), 50u);
}

TEST(Fitness, TrainsThePathInPlace) {
    auto task = separable_task(101);
    Rng rng(103);
    auto arch = arch_of(2, 3, 2, 6, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    auto before_w = net.module(0, 0).w;
    EvolutionParams params;
    params.epochs_per_eval = 2;
    params.minibatches_per_epoch = 5;
    Genotype g({{0, 1}, {0}});
    Rng eval_rng(107);
    evaluate_fitness(net, g, task, params, eval_rng);
    EXPECT_FALSE(bitwise_equal(net.module(0, 0).w, before_w));
}

TEST(Evolve, ZeroBudgetChangesNothing) {
    auto task = separable_task(109);
    Rng rng(113);
    auto arch = arch_of(2, 4, 2, 6, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    EvolutionParams params;
    params.population_size = 4;
    auto state = make_initial_state(arch, params, Rng(127));
    auto pop_before = state.population;
    auto rng_before = state.rng.state();
    std::vector<MetricsRecord> rows;
    state = evolve(net, task, params, std::move(state), 0,
                   [&](const MetricsRecord& r) { rows.push_back(r); });
    EXPECT_TRUE(rows.empty());
    EXPECT_EQ(state.population, pop_before);
    EXPECT_EQ(state.rng.state(), rng_before);
    EXPECT_EQ(state.tournaments_completed, 0u);
}

TEST(Evolve, EmitsTwoOrderedRowsPerTournament) {
    auto task = separable_task(131);
    Rng rng(137);
    auto arch = arch_of(2, 4, 2, 6, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    EvolutionParams params;
    params.population_size = 4;
    params.epochs_per_eval = 1;
    params.minibatches_per_epoch = 2;
    RunContext ctx;
    ctx.phase = Phase::Destination;
    ctx.iteration = 3;
    ctx.seed = 4242;

    std::vector<MetricsRecord> rows;
    evolve(net, task, params, make_initial_state(arch, params, Rng(139)), 5,
           [&](const MetricsRecord& r) { rows.push_back(r); }, ctx);

    ASSERT_EQ(rows.size(), 10u);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        EXPECT_EQ(r.phase, Phase::Destination);
        EXPECT_EQ(r.iteration, 3);
        EXPECT_EQ(r.generation, i / 2 + 1);
        ASSERT_TRUE(r.path_index.has_value());
        EXPECT_EQ(*r.path_index, static_cast<int>(i % 2));
        EXPECT_FALSE(r.eval_accuracy.has_value());
        EXPECT_GE(r.fitness, 0.0);
        EXPECT_LE(r.fitness, 1.0);
        EXPECT_EQ(r.seed, 4242u);
        EXPECT_FALSE(Genotype::from_text(r.genotype).genes().empty());
    }
}

TEST(Evolve, SameSeedSameMetrics) {
    auto task = separable_task(149);
    auto arch = arch_of(2, 4, 2, 6, 5);
    EvolutionParams params;
    params.population_size = 4;
    params.epochs_per_eval = 1;
    params.minibatches_per_epoch = 3;

    auto run_once = [&]() {
        Rng rng(151);
        SuperNetwork net(arch, rng);
        net.register_head("sep", 2, rng);
        std::vector<MetricsRecord> rows;
        evolve(net, task, params, make_initial_state(arch, params, Rng(157)), 8,
               [&](const MetricsRecord& r) { rows.push_back(r); });
        return metrics_to_csv(rows);
    };
    EXPECT_EQ(run_once(), run_once());
}

TEST(Evolve, FindsAGoodPathOnSeparableData) {
    auto task = separable_task(163);
    Rng rng(167);
    auto arch = arch_of(2, 4, 2, 8, 5);
    SuperNetwork net(arch, rng);
    net.register_head("sep", 2, rng);
    EvolutionParams params;
    params.population_size = 6;
    params.epochs_per_eval = 10;
    params.minibatches_per_epoch = 10;
    params.learning_rate = 0.05;
    auto state = evolve(net, task, params, make_initial_state(arch, params, Rng(173)), 50);
    ASSERT_TRUE(state.best_seen.has_value());
    EXPECT_GE(state.best_seen->fitness, 0.9);
    EXPECT_EQ(state.tournaments_completed, 50u);
}
