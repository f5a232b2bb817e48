#include <benchmark/benchmark.h>

#include "lantern/backprop.hpp"
#include "lantern/fft.hpp"
#include "lantern/metrics.hpp"
#include "lantern/network.hpp"
#include "lantern/phantom.hpp"
#include "lantern/sampling.hpp"
#include "lantern/transforms.hpp"

namespace {

using namespace lantern;

struct Problem {
  DynamicImage gt;
  SamplingMask mask;
  KSpaceData y;
};

Problem make_problem(int n, int nt) {
  PhantomConfig cfg;
  cfg.nx = n;
  cfg.ny = n;
  cfg.nt = nt;
  cfg.seed = 1;
  auto gt = generate_dynamic_phantom(cfg);
  auto mask = make_mask_1d_random(n, n, nt, 4.0, 4, 2);
  auto y = forward_undersample(gt, mask);
  return {std::move(gt), std::move(mask), std::move(y)};
}

LanternParams net(int n, int nt, int stages) {
  NetworkLayout layout;
  layout.stages = stages;
  return default_params(n, n, nt, InitMode::DctTv, 0, layout);
}

}  // namespace

static void BM_Fft(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto p = make_problem(n, 8);
  for (auto _ : state) benchmark::DoNotOptimize(fft_frames(p.gt));
  state.SetItemsProcessed(state.iterations() * 8);
}
BENCHMARK(BM_Fft)->Arg(64)->Arg(126);

static void BM_ConvApply(benchmark::State& state) {
  const auto p = make_problem(64, 8);
  const auto bank = init_dct_tv();
  for (auto _ : state) benchmark::DoNotOptimize(conv_apply(bank, p.gt));
}
BENCHMARK(BM_ConvApply)->Unit(benchmark::kMillisecond);

static void BM_Forward(benchmark::State& state) {
  const auto p = make_problem(64, 8);
  const auto params = net(64, 8, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(p.y, p.mask, params));
}
BENCHMARK(BM_Forward)->Arg(4)->Arg(13)->Unit(benchmark::kMillisecond);

static void BM_ForwardBackward(benchmark::State& state) {
  const auto p = make_problem(64, 8);
  const auto params = net(64, 8, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto fwd = forward(p.y, p.mask, params, true);
    auto loss = loss_and_grad_x(fwd.x, p.gt);
    benchmark::DoNotOptimize(backward(*fwd.tape, p.y, p.mask, params, loss.gradient));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_Metrics(benchmark::State& state) {
  const auto p = make_problem(64, 8);
  const auto zf = zero_filled_recon(p.y, p.mask);
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_metrics(zf, p.gt));
}
BENCHMARK(BM_Metrics)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
