#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kinodiff/denoiser/denoiser.hpp"
#include "kinodiff/diffusion/losses.hpp"
#include "kinodiff/diffusion/schedule.hpp"
#include "kinodiff/geodata/canonical.hpp"
#include "kinodiff/numerics/adam.hpp"

namespace kinodiff::diffusion {

struct TrainConfig {
  std::size_t steps = 500;     // optimizer steps
  std::size_t batch_size = 16; // trajectories per step, drawn with replacement
  numerics::AdamConfig adam;
  std::size_t checkpoint_every = 0;  // 0 disables periodic checkpoints
  /// Multiply the reconstruction and physics terms by the sampled alpha_bar.
  bool snr_weighting = true;

  void validate() const;
};

struct TraceRow {
  std::uint64_t step = 0;
  double total = 0.0;
  double vlb = 0.0;
  double rec = 0.0;
  double phy = 0.0;
};

struct TrainState {
  denoiser::DenoiserParams params;
  numerics::OptimState optim;
  std::uint64_t step = 0;  // optimizer steps taken so far, carried across resumes
};

struct TrainResult {
  TrainState state;
  std::vector<TraceRow> trace;
};

/// Neighbor contexts for every trajectory of a dataset, drawn from the
/// dataset itself. k = 0 gives empty contexts.
std::vector<denoiser::DenoiserContext> build_contexts(const std::vector<geodata::CanonicalTraj>& data, std::size_t k,
                                                      double radius);

/// Loss of one trajectory at one noise level. `components` receives the
/// unweighted values; the returned Var is the weighted total.
struct ItemLoss {
  numerics::Var total;
  numerics::Var vlb, rec, phy;  // phy is unset when gamma3 = 0
};
ItemLoss item_loss(numerics::Graph& graph, const denoiser::DenoiserConfig& config, const denoiser::BoundParams& params,
                   const geodata::CanonicalTraj& x0, const Tensor& eps, double alpha_bar,
                   const denoiser::DenoiserContext& context, const LossWeights& weights, bool snr_weighting);

using CheckpointFn = std::function<void(const TrainState&)>;

/// Each step: draw a batch, a (t, alpha_bar) pair and noise per item, form
/// x_t, run the denoiser and apply one Adam update on the batch-mean loss.
/// On a non-finite loss or gradient the last good state is passed to
/// `on_checkpoint` and NumericError is thrown.
TrainResult train(const std::vector<geodata::CanonicalTraj>& data,
                  const std::vector<denoiser::DenoiserContext>& contexts, const NoiseSchedule& schedule,
                  const LossWeights& weights, const TrainConfig& config, TrainState init, numerics::Rng& rng,
                  const CheckpointFn& on_checkpoint = {});

}  // namespace kinodiff::diffusion
