// Micro-benchmarks for the numeric hot paths: kernel matmul, full-path
// forward/backward at the default scale, and the RNG.

#include <benchmark/benchmark.h>

#include "pathnet/evolution.hpp"
#include "pathnet/matrix.hpp"
#include "pathnet/rng.hpp"
#include "pathnet/supernet.hpp"
#include "pathnet/tasks.hpp"

namespace {

using namespace pathnet;

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng) {
    Matrix m(r, c);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

void BM_matmul_batch16(benchmark::State& state) {
    Rng rng(1);
    const Matrix a = random_matrix(16, 100, rng);
    const Matrix b = random_matrix(100, 20, rng);
    for (auto _ : state) {
        Matrix c = matmul(a, b);
        benchmark::DoNotOptimize(c.data().data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()));
}
BENCHMARK(BM_matmul_batch16);

struct FullScale {
    Architecture arch{3, 20, 20, 5, 100};
    SuperNetwork net;
    Genotype path;
    Matrix x;
    std::vector<int> labels;

    FullScale() {
        Rng rng(7);
        net = SuperNetwork(arch, rng);
        net.register_head("bench", 6, rng);
        path = random_genotype(arch, rng);
        x = random_matrix(16, 100, rng);
        labels.resize(16);
        for (auto& l : labels) l = static_cast<int>(rng.next_below(6));
    }
};

void BM_forward_full_scale(benchmark::State& state) {
    FullScale s;
    for (auto _ : state) {
        ForwardTrace t = s.net.forward(s.path, "bench", s.x);
        benchmark::DoNotOptimize(t.logits.data().data());
    }
}
BENCHMARK(BM_forward_full_scale);

void BM_train_step_full_scale(benchmark::State& state) {
    FullScale s;
    for (auto _ : state) {
        StepStats st = s.net.backward_and_update(s.path, "bench", s.x, s.labels, 0.02);
        benchmark::DoNotOptimize(st.loss);
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * 16);
}
BENCHMARK(BM_train_step_full_scale);

void BM_fitness_eval_small(benchmark::State& state) {
    Architecture arch{3, 10, 20, 5, 50};
    Rng rng(3);
    SuperNetwork net(arch, rng);
    net.register_head("bench", 6, rng);
    Dataset data = make_blobs(6, 50, 50, 1.0, 11);
    TaskSpec task = make_task("bench", data, 0.2, 12);
    EvolutionParams params;
    params.epochs_per_eval = 2;
    params.minibatches_per_epoch = 10;
    Genotype path = random_genotype(arch, rng);
    for (auto _ : state) {
        EvalOutcome out = evaluate_fitness(net, path, task, params, rng);
        benchmark::DoNotOptimize(out.fitness);
    }
}
BENCHMARK(BM_fitness_eval_small);

void BM_rng_normal(benchmark::State& state) {
    Rng rng(5);
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng.normal());
    }
}
BENCHMARK(BM_rng_normal);

}  // namespace

BENCHMARK_MAIN();
