#include <benchmark/benchmark.h>

#include "kinodiff/config/run_config.hpp"
#include "kinodiff/diffusion/sampler.hpp"
#include "kinodiff/diffusion/trainer.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/numerics/rng.hpp"
#include "kinodiff/pipeline/pipeline.hpp"

using namespace kinodiff;

namespace {

struct DeskSetup {
  config::RunConfig cfg = config::desk_config();
  geodata::CanonicalDataset data;
  std::vector<denoiser::DenoiserContext> contexts;
  denoiser::DenoiserParams params;
  diffusion::NoiseSchedule schedule = diffusion::desk_schedule();

  explicit DeskSetup(std::size_t count) {
    cfg.synth.count = count;
    numerics::Rng rng(1);
    data = geodata::build_canonical(pipeline::generate_normals(cfg.synth, rng), cfg.data.canonical);
    contexts = diffusion::build_contexts(data.items, cfg.model.max_context, cfg.data.context_radius);
    params = denoiser::init_params(cfg.model, rng);
  }
};

void BM_DenoiserForward(benchmark::State& state) {
  DeskSetup s(8);
  const auto eps = diffusion::denoiser_eps(s.params, s.contexts[0]);
  const numerics::Tensor& x = s.data.items[0].features;
  for (auto _ : state) benchmark::DoNotOptimize(eps(x, 10, s.schedule.alpha_bar(10)));
}
BENCHMARK(BM_DenoiserForward)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  DeskSetup s(32);
  diffusion::TrainConfig tc = s.cfg.train;
  tc.steps = 1;
  diffusion::TrainState init;
  init.params = s.params;
  init.optim.config = tc.adam;
  numerics::Rng rng(2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(diffusion::train(s.data.items, s.contexts, s.schedule, s.cfg.loss, tc, init, rng));
  }
  state.SetLabel("batch " + std::to_string(tc.batch_size));
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_Reconstruct(benchmark::State& state) {
  DeskSetup s(8);
  diffusion::SamplerConfig sc = s.cfg.sampler;
  sc.t_star = static_cast<std::size_t>(state.range(0));
  numerics::Rng rng(3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        diffusion::reconstruct(s.data.items[0].features, s.params, s.schedule, sc, s.contexts[0], rng));
  }
}
BENCHMARK(BM_Reconstruct)->Arg(4)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_IntegrateAndResiduals(benchmark::State& state) {
  const std::vector<kbm::KbmControl> controls(static_cast<std::size_t>(state.range(0)), {0.02, 0.1});
  for (auto _ : state) {
    const auto states = kbm::integrate({0, 0, 0, 5}, controls, 0.1);
    benchmark::DoNotOptimize(kbm::physics_loss(kbm::series_from_states(states, controls, 0.1), {}));
  }
}
BENCHMARK(BM_IntegrateAndResiduals)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
