#include <benchmark/benchmark.h>

#include "pnpsgs/denoiser.hpp"
#include "pnpsgs/operators.hpp"
#include "pnpsgs/rng.hpp"
#include "pnpsgs/schedule.hpp"
#include "pnpsgs/sgs.hpp"

namespace {

void BM_InpaintXStep(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(1);
    const pnpsgs::MaskOperator mask = pnpsgs::random_mask(side, side, 0.8, rng);
    pnpsgs::Image z(side, side, 1, 0.5);
    pnpsgs::Image y(1, static_cast<int>(mask.kept_count()), 1, 0.4);
    for (auto _ : state) {
        auto x = pnpsgs::sample_x_inpaint(y, z, mask, 0.05, 0.7, rng);
        benchmark::DoNotOptimize(x.data().data());
    }
}
BENCHMARK(BM_InpaintXStep)->Arg(64)->Arg(256);

void BM_DeblurXStepSpectral(benchmark::State& state) {
    const int side = static_cast<int>(state.range(0));
    pnpsgs::Rng rng(2);
    const pnpsgs::CirculantOperator op(pnpsgs::gaussian_kernel(9, 1.5), side, side);
    pnpsgs::Image z(side, side, 1, 0.5);
    pnpsgs::Image y(side, side, 1, 0.4);
    const auto noise = pnpsgs::NoiseModel::scalar(0.05);
    for (auto _ : state) {
        auto x = pnpsgs::sample_x_deblur(y, z, op, noise, 0.7, rng);
        benchmark::DoNotOptimize(x.data().data());
    }
}
BENCHMARK(BM_DeblurXStepSpectral)->Arg(64)->Arg(256);

void BM_ConjugateReverseRun(benchmark::State& state) {
    const int steps = static_cast<int>(state.range(0));
    const auto schedule = pnpsgs::build_linear_schedule(1000, 1e-4, 2e-2);
    const pnpsgs::Image m0(64, 64, 1, 0.5);
    const pnpsgs::GaussianConjugateDenoiser model(m0, 0.1, schedule);
    pnpsgs::Rng rng(3);
    pnpsgs::Image u(64, 64, 1, 0.5);
    for (auto _ : state) {
        auto out = model.run_reverse(u, steps, 0, rng);
        benchmark::DoNotOptimize(out.data().data());
    }
    state.SetItemsProcessed(state.iterations() * steps);
}
BENCHMARK(BM_ConjugateReverseRun)->Arg(50)->Arg(100);

}  // namespace
