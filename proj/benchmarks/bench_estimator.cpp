#include <benchmark/benchmark.h>

#include "pnpsgs/image.hpp"
#include "pnpsgs/metrics.hpp"
#include "pnpsgs/noise_estimator.hpp"
#include "pnpsgs/rng.hpp"

namespace {

void BM_EstimateSigma(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(1);
    pnpsgs::Image img(side, side, 3, 0.5);
    for (auto& v : img.data()) v += 0.05 * rng.normal();
    for (auto _ : state) {
        auto est = pnpsgs::estimate_sigma(img);
        benchmark::DoNotOptimize(est.sigma);
    }
}
BENCHMARK(BM_EstimateSigma)->Arg(64)->Arg(256);

void BM_Ssim(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(2);
    pnpsgs::Image a(side, side, 3, 0.5);
    pnpsgs::Image b = a;
    for (auto& v : b.data()) v += 0.02 * rng.normal();
    for (auto _ : state) {
        const double s = pnpsgs::ssim(a, b);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_Ssim)->Arg(64)->Arg(256);

}  // namespace
