#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kinodiff/config/run_config.hpp"
#include "kinodiff/denoiser/checkpoint.hpp"
#include "kinodiff/diffusion/trainer.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/synth/dataset.hpp"

namespace kinodiff::pipeline {

/// `count` KBM tracks named trk0000, trk0001, ...
std::vector<geodata::Trajectory> generate_normals(const config::SynthConfig& synth, numerics::Rng& rng);

/// Normals from stream 1 of the seed, anomaly injection from stream 2.
synth::LabeledDataset synthesize(const config::SynthConfig& synth, std::uint64_t seed);

struct Model {
  denoiser::DenoiserParams params;
  std::shared_ptr<const geodata::Normalizer> normalizer;
  diffusion::NoiseSchedule schedule;
};

struct TrainOutcome {
  Model model;
  diffusion::TrainResult result;
};

/// Receives the model (normalizer and schedule fixed) with each checkpointed state.
using CheckpointFn = std::function<void(const Model&, const diffusion::TrainState&)>;

/// Canonicalizes `data` (fitting the normalizer unless `init` brings one),
/// builds neighbor contexts and trains. `init` continues from a checkpoint.
/// Ablations are expressed through the configuration (gamma3 = 0 or
/// max_context = 0).
TrainOutcome train_model(const std::vector<geodata::Trajectory>& data, const config::RunConfig& config,
                         const std::optional<denoiser::Checkpoint>& init = std::nullopt,
                         const CheckpointFn& on_checkpoint = {});

denoiser::Checkpoint make_checkpoint(const Model& model, const diffusion::TrainState& state,
                                     const config::RunConfig& config);
/// Throws ShapeError when the checkpoint does not fit the configuration.
Model model_from_checkpoint(const denoiser::Checkpoint& checkpoint, const config::RunConfig& config);

struct Scored {
  std::string id;
  double e_delta = 0.0;
};

/// E_delta of every canonical segment, each reconstructed with its own
/// stream of the seed (averaged over sampler.repeats draws). The first
/// reconstruction of each segment goes to `reconstructions` when given.
std::vector<Scored> score(const Model& model, const std::vector<geodata::Trajectory>& data,
                          const config::RunConfig& config, std::uint64_t seed,
                          std::vector<geodata::CanonicalTraj>* reconstructions = nullptr);

/// lambda from the configuration: explicit value or percentile of `scores`.
double choose_lambda(const std::vector<double>& scores, const config::DetectConfig& detect);

/// Id before any "#k" segment suffix.
std::string base_id(const std::string& id);

}  // namespace kinodiff::pipeline
