#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "fracheat/fft.hpp"
#include "fracheat/fields.hpp"
#include "fracheat/kernels.hpp"
#include "fracheat/noise.hpp"
#include "fracheat/oracle.hpp"

using namespace fracheat;

static void BM_UnitNormals(benchmark::State& state) {
    std::vector<double> row(state.range(0));
    uint64_t slice = 0;
    for (auto _ : state) {
        rng::fill_unit_normals(42, rng::kLattice, slice++, row);
        benchmark::DoNotOptimize(row.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_UnitNormals)->Arg(4096)->Arg(16384);

static void BM_ForwardFft(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Fft fft(n);
    std::vector<double> in(n, 1.0);
    std::vector<std::complex<double>> out(n / 2 + 1);
    for (auto _ : state) {
        fft.forward(in, out.data());
        benchmark::DoNotOptimize(out.data());
    }
}
BENCHMARK(BM_ForwardFft)->Arg(4096)->Arg(8192)->Arg(16384);

static void BM_SamplerStep(benchmark::State& state) {
    // one full linear step: noise row, transform, spectral axpy
    const int n = static_cast<int>(state.range(0));
    GridSpec g;
    g.half_length = 64.0;
    g.n_space = n;
    g.t_max = 1.0;
    const double dx = g.dx();
    g.n_time = static_cast<int>(std::ceil(1.0 / std::pow(dx, 1.5)));
    const AlphaParams p(1.5);
    SpectralPropagator prop(g, p);
    Fft fft(n);
    NoiseLattice noise(g, 7);
    std::vector<double> row(n);
    std::vector<std::complex<double>> hat(n / 2 + 1), acc(n / 2 + 1);
    int slice = 0;
    const auto decay = prop.decay();
    const auto amp = prop.step_amp();
    for (auto _ : state) {
        noise.unit_row(slice++ % g.n_time, row);
        fft.forward(row, hat.data());
        for (int m = 0; m <= n / 2; ++m)
            acc[m] = decay[m] * acc[m] + amp[m] * hat[m];
        benchmark::DoNotOptimize(acc.data());
    }
}
BENCHMARK(BM_SamplerStep)->Arg(4096)->Arg(16384);

static void BM_QOracle(benchmark::State& state) {
    const AlphaParams p(1.5);
    double eps = 0.125;
    for (auto _ : state) {
        benchmark::DoNotOptimize(
            oracle::Q_increment_variance(p, 1.0, eps).value);
    }
}
BENCHMARK(BM_QOracle);

static void BM_KernelTable(benchmark::State& state) {
    const AlphaParams p(1.5);
    std::vector<double> xs(1024);
    for (int i = 0; i < 1024; ++i) xs[i] = -8.0 + 16.0 * i / 1023;
    for (auto _ : state)
        benchmark::DoNotOptimize(eval_kernel(p, 1.0, xs).values.data());
}
BENCHMARK(BM_KernelTable);

BENCHMARK_MAIN();
