#include "kinodiff/pipeline/pipeline.hpp"

#include <cstdio>

#include "kinodiff/common/error.hpp"
#include "kinodiff/diffusion/sampler.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/scoring/metrics.hpp"

namespace kinodiff::pipeline {

std::vector<geodata::Trajectory> generate_normals(const config::SynthConfig& synth, numerics::Rng& rng) {
  std::vector<geodata::Trajectory> out;
  out.reserve(synth.count);
  for (std::size_t i = 0; i < synth.count; ++i) {
    geodata::Trajectory t = kbm::generate_normal(rng, synth.generate);
    char id[32];
    std::snprintf(id, sizeof(id), "trk%04zu", i);
    t.id = id;
    out.push_back(std::move(t));
  }
  return out;
}

synth::LabeledDataset synthesize(const config::SynthConfig& synth, std::uint64_t seed) {
  const numerics::Rng root(seed);
  numerics::Rng normals_rng = root.fork(1);
  numerics::Rng inject_rng = root.fork(2);
  return synth::build_dataset(generate_normals(synth, normals_rng), synth.dataset, inject_rng);
}

TrainOutcome train_model(const std::vector<geodata::Trajectory>& data, const config::RunConfig& config,
                         const std::optional<denoiser::Checkpoint>& init, const CheckpointFn& on_checkpoint) {
  config.validate();
  const numerics::Rng root(config.seed);
  Model model;
  model.schedule = config.schedule.build();

  diffusion::TrainState state;
  std::shared_ptr<const geodata::Normalizer> fitted;
  if (init) {
    model = model_from_checkpoint(*init, config);
    fitted = model.normalizer;
    state.params = model.params;
    state.step = init->step;
    if (init->optimizer) state.optim = *init->optimizer;
  } else {
    numerics::Rng init_rng = root.fork(10);
    state.params = denoiser::init_params(config.model, init_rng);
  }
  const geodata::CanonicalDataset canon = geodata::build_canonical(data, config.data.canonical, fitted);
  model.normalizer = canon.normalizer;
  const auto contexts = diffusion::build_contexts(canon.items, config.model.max_context, config.data.context_radius);

  // Each resume draws from a stream keyed by its starting step.
  numerics::Rng train_rng = root.fork(11 + state.step);
  TrainOutcome out;
  diffusion::CheckpointFn forward;
  if (on_checkpoint) forward = [&](const diffusion::TrainState& st) { on_checkpoint(model, st); };
  out.result = diffusion::train(canon.items, contexts, model.schedule, config.loss, config.train, std::move(state),
                                train_rng, forward);
  model.params = out.result.state.params;
  out.model = std::move(model);
  return out;
}

denoiser::Checkpoint make_checkpoint(const Model& model, const diffusion::TrainState& state,
                                     const config::RunConfig& config) {
  denoiser::Checkpoint ck;
  ck.params = state.params;
  ck.normalizer = model.normalizer;
  ck.schedule = {model.schedule.steps(), model.schedule.beta_start(), model.schedule.beta_end(),
                 model.schedule.digest()};
  ck.step = state.step;
  ck.optimizer = state.optim;
  ck.run_config = config::serialize_config(config);
  return ck;
}

Model model_from_checkpoint(const denoiser::Checkpoint& ck, const config::RunConfig& config) {
  const denoiser::DenoiserConfig& a = ck.params.config;
  const denoiser::DenoiserConfig& b = config.model;
  if (a.width != b.width || a.heads != b.heads || a.sampling_blocks != b.sampling_blocks ||
      a.resnet_blocks != b.resnet_blocks || a.kernel != b.kernel || a.features != b.features) {
    throw ShapeError("checkpoint model shape does not match the configuration");
  }
  if (!ck.normalizer) throw InputError("checkpoint has no normalizer");
  Model m;
  m.params = ck.params;
  // Runtime switches (context size, guidance, kinematic source) follow the configuration.
  m.params.config = b;
  denoiser::check_params(m.params);
  m.normalizer = ck.normalizer;
  m.schedule = diffusion::linear_schedule(ck.schedule.steps, ck.schedule.beta_start, ck.schedule.beta_end);
  if (m.schedule.digest() != ck.schedule.digest) throw InputError("checkpoint schedule digest does not match");
  return m;
}

std::vector<Scored> score(const Model& model, const std::vector<geodata::Trajectory>& data,
                          const config::RunConfig& config, std::uint64_t seed,
                          std::vector<geodata::CanonicalTraj>* reconstructions) {
  config.sampler.validate(model.schedule.steps());
  const geodata::CanonicalDataset canon = geodata::build_canonical(data, config.data.canonical, model.normalizer);
  const auto contexts =
      diffusion::build_contexts(canon.items, model.params.config.max_context, config.data.context_radius);
  const numerics::Rng root(seed);
  std::vector<Scored> out;
  out.reserve(canon.items.size());
  for (std::size_t i = 0; i < canon.items.size(); ++i) {
    numerics::Rng rng = root.fork(i);
    double total = 0.0;
    for (std::size_t r = 0; r < config.sampler.repeats; ++r) {
      const numerics::Tensor x0_hat = diffusion::reconstruct(canon.items[i].features, model.params, model.schedule,
                                                             config.sampler, contexts[i], rng);
      total += scoring::reconstruction_error(canon.items[i].features, x0_hat, config.detect.channels);
      if (reconstructions && r == 0) {
        geodata::CanonicalTraj rec = canon.items[i];
        rec.features = x0_hat;
        reconstructions->push_back(std::move(rec));
      }
    }
    out.push_back({canon.items[i].id, total / static_cast<double>(config.sampler.repeats)});
  }
  return out;
}

double choose_lambda(const std::vector<double>& scores, const config::DetectConfig& detect) {
  if (detect.lambda) return *detect.lambda;
  return scoring::percentile(scores, detect.lambda_percentile);
}

std::string base_id(const std::string& id) {
  const auto hash = id.rfind('#');
  return hash == std::string::npos ? id : id.substr(0, hash);
}

}  // namespace kinodiff::pipeline
