#include <benchmark/benchmark.h>

#include "locagen/models.hpp"
#include "locagen/rng.hpp"

using namespace locagen;

namespace {

std::vector<data::LabeledSample> make_samples(std::size_t n) {
    Rng rng(5);
    std::vector<data::LabeledSample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double az = rng.uniform(0.0, 360.0);
        out[i].features = {rng.normal(0, 1e-4), rng.normal(0, 1e-4), rng.normal()};
        out[i].azimuth_deg = az;
        out[i].bin12 = data::bin12_of(az);
        out[i].bin24 = data::bin24_of(az);
        out[i].sample_index = static_cast<long long>(i);
    }
    return out;
}

}  // namespace

static void BM_ForestPredict(benchmark::State& state) {
    const auto train = make_samples(4000);
    ml::RfParams params;
    params.n_trees = static_cast<int>(state.range(0));
    const auto model = ml::train_rf(train, params);
    Rng rng(9);
    for (auto _ : state) {
        const std::array<double, 3> f = {rng.normal(0, 1e-4), rng.normal(0, 1e-4), rng.normal()};
        benchmark::DoNotOptimize(ml::predict_rf(model, f));
    }
}
BENCHMARK(BM_ForestPredict)->Arg(10)->Arg(100);

static void BM_MlpForward(benchmark::State& state) {
    const auto train = make_samples(512);
    ml::MlpParams params;
    params.epochs = 1;
    const auto model = ml::train_mlp(train, params);
    Rng rng(9);
    for (auto _ : state) {
        const std::array<double, 3> f = {rng.normal(0, 1e-4), rng.normal(0, 1e-4), rng.normal()};
        benchmark::DoNotOptimize(ml::predict_mlp(model, f));
    }
}
BENCHMARK(BM_MlpForward);

static void BM_MlpTrainEpoch(benchmark::State& state) {
    const auto train = make_samples(2048);
    for (auto _ : state) {
        ml::MlpParams params;
        params.epochs = 1;
        auto model = ml::train_mlp(train, params);
        benchmark::DoNotOptimize(model);
    }
}
BENCHMARK(BM_MlpTrainEpoch)->Unit(benchmark::kMillisecond);
