#include <benchmark/benchmark.h>

#include "pnpsgs/fft.hpp"
#include "pnpsgs/image.hpp"
#include "pnpsgs/operators.hpp"
#include "pnpsgs/rng.hpp"

namespace {

void BM_Fft2dPow2(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(1);
    std::vector<double> plane(static_cast<std::size_t>(side) * side);
    for (auto& v : plane) v = rng.normal();
    for (auto _ : state) {
        auto freq = pnpsgs::fft::forward_2d_real(plane, side, side);
        benchmark::DoNotOptimize(freq.data());
    }
    state.SetItemsProcessed(state.iterations() * side * side);
}
BENCHMARK(BM_Fft2dPow2)->Arg(64)->Arg(128)->Arg(256);

void BM_Fft2dArbitrary(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(2);
    std::vector<double> plane(static_cast<std::size_t>(side) * side);
    for (auto& v : plane) v = rng.normal();
    for (auto _ : state) {
        auto freq = pnpsgs::fft::forward_2d_real(plane, side, side);
        benchmark::DoNotOptimize(freq.data());
    }
}
BENCHMARK(BM_Fft2dArbitrary)->Arg(63)->Arg(100)->Arg(255);

void BM_CirculantApply(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    const auto kernel = pnpsgs::gaussian_kernel(9, 1.5);
    const pnpsgs::CirculantOperator op(kernel, side, side);
    pnpsgs::Rng rng(3);
    pnpsgs::Image x(side, side, 3);
    for (auto& v : x.data()) v = rng.uniform();
    for (auto _ : state) {
        auto y = op.apply(x);
        benchmark::DoNotOptimize(y.data().data());
    }
}
BENCHMARK(BM_CirculantApply)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
