#include <benchmark/benchmark.h>

#include "reidfuse/amc.hpp"
#include "reidfuse/fusion.hpp"
#include "reidfuse/pipeline.hpp"
#include "reidfuse/simkit.hpp"
#include "reidfuse/synth.hpp"

using namespace reidfuse;

namespace {

// half the identities land in the test split
SynthData make_data(std::int64_t ids) {
    SynthConfig cfg;
    cfg.num_identities = static_cast<std::size_t>(ids);
    cfg.seed = 1;
    return generate(cfg);
}

void BM_Cosine(benchmark::State& state) {
    const auto d = make_data(4);
    const auto a = d.gallery.feature(0);
    const auto b = d.gallery.feature(1);
    for (auto _ : state) benchmark::DoNotOptimize(cosine(a, b));
}
BENCHMARK(BM_Cosine);

void BM_KnnCrossCamera(benchmark::State& state) {
    const auto d = make_data(state.range(0));
    std::size_t j = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(knn_cross_camera(d.gallery, j, 4));
        j = (j + 1) % d.gallery.size();
    }
    state.counters["gallery"] = static_cast<double>(d.gallery.size());
}
BENCHMARK(BM_KnnCrossCamera)->Arg(50)->Arg(200)->Arg(800);

void BM_UffmFuseAll(benchmark::State& state) {
    const auto d = make_data(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(uffm_fuse_all(d.gallery, 4, 1));
    state.counters["gallery"] = static_cast<double>(d.gallery.size());
}
BENCHMARK(BM_UffmFuseAll)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BuildTripletDataset(benchmark::State& state) {
    const auto d = make_data(50);
    for (auto _ : state) benchmark::DoNotOptimize(build_triplet_dataset(d.train, static_cast<std::size_t>(state.range(0)), 4, 0));
}
BENCHMARK(BM_BuildTripletDataset)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_FitWeights(benchmark::State& state) {
    const auto d = make_data(50);
    const auto data = build_triplet_dataset(d.train, 400, 4, 0);
    for (auto _ : state) benchmark::DoNotOptimize(fit_weights(data));
}
BENCHMARK(BM_FitWeights);

void BM_RankAll(benchmark::State& state) {
    const auto d = make_data(state.range(0));
    const auto refined = uffm_fuse_all(d.gallery, 4, 1);
    CombinationWeights w;
    w.alpha = 0.5;
    w.beta = 0.5;
    for (auto _ : state) benchmark::DoNotOptimize(rank_all(d.queries, d.gallery, refined, w, 1));
    state.counters["pairs"] = static_cast<double>(d.queries.size() * d.gallery.size());
}
BENCHMARK(BM_RankAll)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
    const auto d = make_data(state.range(0));
    const auto rankings = rank_all(d.queries, d.gallery, passthrough_features(d.gallery), baseline_weights(), 1);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate(rankings, d.queries, d.gallery));
}
BENCHMARK(BM_Evaluate)->Arg(50)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
