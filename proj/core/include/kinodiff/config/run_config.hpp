#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/diffusion/losses.hpp"
#include "kinodiff/diffusion/sampler.hpp"
#include "kinodiff/diffusion/schedule.hpp"
#include "kinodiff/diffusion/trainer.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/kbm/kbm.hpp"
#include "kinodiff/scoring/metrics.hpp"
#include "kinodiff/synth/dataset.hpp"

namespace kinodiff::config {

struct ScheduleConfig {
  std::size_t steps = diffusion::kDefaultSteps;
  double beta_start = diffusion::kDefaultBetaStart;
  double beta_end = diffusion::kDefaultBetaEnd;

  diffusion::NoiseSchedule build() const { return diffusion::linear_schedule(steps, beta_start, beta_end); }
};

struct DataConfig {
  geodata::CanonicalOptions canonical;
  double context_radius = 1000.0;  // m
};

struct SynthConfig {
  std::size_t count = 200;
  kbm::GenerateOptions generate;
  synth::DatasetOptions dataset;
};

struct DetectConfig {
  std::optional<double> lambda;     // explicit threshold; wins over the percentile
  double lambda_percentile = 95.0;  // percentile of the scored set
  scoring::ScoreChannels channels = scoring::ScoreChannels::all;
};

/// Every tunable of a run. Serialized as INI text with a fixed section and
/// key order, so parse(serialize(c)) reproduces c and serialize(parse(t))
/// reproduces canonical text t byte for byte.
struct RunConfig {
  std::uint64_t seed = 0;
  ScheduleConfig schedule;
  diffusion::SamplerConfig sampler;
  diffusion::LossWeights loss;
  denoiser::DenoiserConfig model;
  DataConfig data;
  diffusion::TrainConfig train;
  SynthConfig synth;
  DetectConfig detect;

  /// Throws InputError on any inconsistent value.
  void validate() const;
};

/// Throws InputError on malformed text, unknown sections or keys, or bad values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);
/// 16 hex digits of the serialized text.
std::string config_digest(const RunConfig& config);

/// A configuration sized for a single CPU core: T = 50 schedule, short
/// trajectories, a 2-block model.
RunConfig desk_config();

}  // namespace kinodiff::config
