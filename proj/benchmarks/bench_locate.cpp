#include <benchmark/benchmark.h>

#include "locagen/locate.hpp"
#include "locagen/rng.hpp"

using namespace locagen;

static void BM_Multilaterate(benchmark::State& state) {
    const auto g = ArrayGeometry::equilateral(0.1);
    const Medium m{343.0};
    Rng rng(1);
    std::vector<loc::MultilaterationProblem> problems;
    for (int i = 0; i < 64; ++i) {
        const double az = rng.uniform(0.0, 2.0 * kPi);
        const SourcePosition src{50.0 * std::cos(az), 50.0 * std::sin(az)};
        const auto toa = true_toa(g, m, src);
        loc::MultilaterationProblem p;
        p.geometry = g;
        p.medium = m;
        p.tdoa = TdoaPair::from_taus(toa[1] - toa[0], toa[2] - toa[0]);
        problems.push_back(p);
    }
    std::size_t i = 0;
    for (auto _ : state) {
        auto est = loc::multilaterate(problems[i++ % problems.size()]);
        benchmark::DoNotOptimize(est);
    }
}
BENCHMARK(BM_Multilaterate)->Unit(benchmark::kMicrosecond);

static void BM_Objective(benchmark::State& state) {
    const auto g = ArrayGeometry::equilateral(0.1);
    loc::MultilaterationProblem p;
    p.geometry = g;
    p.tdoa = TdoaPair::from_taus(1e-4, -2e-4);
    double x = 10.0, y = 20.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(loc::objective(p, x, y));
        x += 1e-9;
    }
}
BENCHMARK(BM_Objective);
