#include <benchmark/benchmark.h>

#include "locagen/dsp.hpp"

using namespace locagen::dsp;

static void BM_FftRoundTrip(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Spectrum data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = {std::sin(0.01 * double(i)), 0.0};
    for (auto _ : state) {
        fft_inplace(data, false);
        fft_inplace(data, true);
        benchmark::DoNotOptimize(data.data());
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FftRoundTrip)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

static void BM_GccPhat(benchmark::State& state) {
    const double fs = 48000.0;
    const auto x = make_chirp(500.0, 3000.0, double(state.range(0)) / fs, fs);
    const auto y = synthesize_delayed(x, 7.3 / fs, 0.01, 1);
    for (auto _ : state) {
        auto est = gcc_phat(x, y, 64, Interp::parabolic);
        benchmark::DoNotOptimize(est);
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GccPhat)->RangeMultiplier(2)->Range(1024, 16384)->Complexity();

static void BM_Resample48kTo10k(benchmark::State& state) {
    const auto x = make_tone(1000.0, double(state.range(0)) / 48000.0, 48000.0);
    for (auto _ : state) {
        auto y = resample(x, 10000.0);
        benchmark::DoNotOptimize(y.samples.data());
    }
}
BENCHMARK(BM_Resample48kTo10k)->Arg(4800)->Arg(48000);
