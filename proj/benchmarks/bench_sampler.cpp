// Microbenchmarks for the sampler's hot paths (the membership update with
// its auxiliary-component draws dominates real runs) and for the posterior
// summaries that scale with snapshots x n^2.

#include <benchmark/benchmark.h>

#include "rpms/data_io.hpp"
#include "rpms/sampler.hpp"
#include "rpms/summaries.hpp"

using namespace rpms;

namespace {

GeneratorSpec bench_spec(std::size_t n) {
    GeneratorSpec spec;
    spec.n = n;
    spec.n_covariates = 8;
    spec.k_true = 3;
    spec.cluster_weights = {0.4, 0.35, 0.25};
    spec.zeta_true = {0.9, 0.8, 0.2, 0.1, 0.5, 0.5, 0.3, 0.7,
                      0.1, 0.2, 0.8, 0.9, 0.5, 0.5, 0.7, 0.3,
                      0.5, 0.5, 0.5, 0.5, 0.9, 0.1, 0.2, 0.8};
    spec.beta_true = {2.0, -1.5, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0,
                      0.0, 0.0,  1.8, 2.2, 0.0, 0.0, 0.0, 0.0,
                      1.1, 0.0,  0.0, 0.0, 0.0, -2.0, 0.0, 0.0};
    spec.lambda_true = 4.0;
    spec.seed = 7;
    return spec;
}

GibbsSampler warmed_sampler(std::size_t n, Mode mode) {
    SamplerConfig config;
    config.mode = mode;
    config.seed = 11;
    GibbsSampler sampler(generate_synthetic(bench_spec(n)).data,
                         Hyperparameters{}, config);
    for (int t = 0; t < 20; ++t) sampler.sweep();
    return sampler;
}

Trace bench_trace(std::size_t n, std::size_t snapshots) {
    SamplerConfig config;
    config.iterations = snapshots + 50;
    config.burn_in = 50;
    config.seed = 13;
    return run_chain(generate_synthetic(bench_spec(n)).data, Hyperparameters{},
                     config);
}

void BM_MembershipUpdate(benchmark::State& state) {
    GibbsSampler sampler =
        warmed_sampler(static_cast<std::size_t>(state.range(0)), Mode::rpms);
    for (auto _ : state) sampler.update_membership();
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MembershipUpdate)->Arg(100)->Arg(300);

void BM_FullSweep(benchmark::State& state) {
    GibbsSampler sampler =
        warmed_sampler(static_cast<std::size_t>(state.range(0)), Mode::rpms);
    for (auto _ : state) sampler.sweep();
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullSweep)->Arg(100)->Arg(300);

void BM_FullSweepResponseOnly(benchmark::State& state) {
    GibbsSampler sampler =
        warmed_sampler(static_cast<std::size_t>(state.range(0)), Mode::ssp);
    for (auto _ : state) sampler.sweep();
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FullSweepResponseOnly)->Arg(100)->Arg(300);

void BM_BaseMeasureDraw(benchmark::State& state) {
    const Hyperparameters hyper;
    const std::vector<double> pi(8, 0.75);
    const std::vector<double> tau(8, 1.0);
    Rng rng(5);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            sample_base_measure(hyper, pi, tau, Mode::rpms, rng));
}
BENCHMARK(BM_BaseMeasureDraw);

void BM_Coclustering(benchmark::State& state) {
    const Trace trace = bench_trace(150, 200);
    for (auto _ : state) benchmark::DoNotOptimize(coclustering(trace));
}
BENCHMARK(BM_Coclustering);

void BM_BinderPartition(benchmark::State& state) {
    const Trace trace = bench_trace(150, 200);
    const CoClusteringMatrix gamma = coclustering(trace);
    for (auto _ : state)
        benchmark::DoNotOptimize(binder_partition(trace, gamma));
}
BENCHMARK(BM_BinderPartition);

} // namespace

BENCHMARK_MAIN();
