#include "kinodiff/diffusion/trainer.hpp"

#include <cmath>

#include "kinodiff/common/error.hpp"
#include "kinodiff/geodata/neighbors.hpp"

namespace kinodiff::diffusion {

using denoiser::DenoiserContext;
using numerics::Graph;

void TrainConfig::validate() const {
  if (batch_size < 1) throw InputError("train: batch size must be >= 1");
  if (!(adam.learning_rate > 0.0)) throw InputError("train: learning rate must be > 0");
}

std::vector<DenoiserContext> build_contexts(const std::vector<geodata::CanonicalTraj>& data, std::size_t k,
                                            double radius) {
  std::vector<DenoiserContext> out;
  out.reserve(data.size());
  if (k == 0) {
    for (const auto& c : data) out.push_back(denoiser::empty_context(c.length(), c.features.cols()));
    return out;
  }
  const geodata::NeighborIndex index(data);
  for (const auto& c : data) {
    out.push_back(denoiser::make_context(index.query(c, k, radius), c.length(), c.features.cols(), k));
  }
  return out;
}

namespace {

double mean_physical_speed(const geodata::CanonicalTraj& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.length(); ++i) s += c.normalizer->denormalize(geodata::kSpeed, c.features.at(i, geodata::kSpeed));
  return c.length() == 0 ? 0.0 : s / static_cast<double>(c.length());
}

}  // namespace

ItemLoss item_loss(Graph& graph, const denoiser::DenoiserConfig& config, const denoiser::BoundParams& params,
                   const geodata::CanonicalTraj& x0, const Tensor& eps, double alpha_bar,
                   const DenoiserContext& context, const LossWeights& w, bool snr_weighting) {
  const Tensor x_t = q_sample(x0.features, alpha_bar, eps);
  const denoiser::DenoiserOutput out =
      denoiser::denoise_forward(graph, config, params, graph.constant(x_t), alpha_bar, context);
  ItemLoss loss;
  loss.vlb = simple_loss(out.eps, eps);
  loss.total = numerics::scale(loss.vlb, w.gamma1);
  const double aux = snr_weighting ? alpha_bar : 1.0;
  const bool need_x0 = w.gamma2 > 0.0 || w.gamma3 > 0.0;
  if (!need_x0) return loss;
  const numerics::Var x0_hat = predict_x0(out.eps, x_t, alpha_bar);
  loss.rec = recon_loss(x0_hat, x0.features);
  loss.total = loss.total + numerics::scale(loss.rec, w.gamma2 * aux);
  if (w.gamma3 > 0.0) {
    PhysicsInputs in{x0.normalizer.get(), x0.length(), x0.dt, mean_physical_speed(x0), w.w, config.kinematic_source};
    loss.phy = physics_loss(x0_hat, out.kinematics, in);
    loss.total = loss.total + numerics::scale(loss.phy, w.gamma3 * aux);
  }
  return loss;
}

TrainResult train(const std::vector<geodata::CanonicalTraj>& data, const std::vector<DenoiserContext>& contexts,
                  const NoiseSchedule& schedule, const LossWeights& weights, const TrainConfig& config,
                  TrainState init, numerics::Rng& rng, const CheckpointFn& on_checkpoint) {
  config.validate();
  weights.validate();
  denoiser::check_params(init.params);
  if (config.steps > 0 && data.empty()) throw InputError("train: empty dataset");
  if (contexts.size() != data.size()) throw InputError("train: one context per trajectory is required");
  init.optim.config = config.adam;

  TrainResult result{std::move(init), {}};
  TrainState& st = result.state;
  result.trace.reserve(config.steps);
  for (std::size_t it = 0; it < config.steps; ++it) {
    Graph graph;
    const denoiser::BoundParams bound = denoiser::bind_params(graph, st.params.tensors, true);
    std::vector<numerics::Var> totals;
    std::vector<ItemLoss> items;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      const std::size_t idx = rng.index(data.size());
      const StepDraw draw = sample_t_alpha_bar(schedule, rng);
      const Tensor eps = rng.normal_tensor(data[idx].features.shape());
      items.push_back(item_loss(graph, st.params.config, bound, data[idx], eps, draw.alpha_bar, contexts[idx],
                                weights, config.snr_weighting));
    }
    numerics::Var total = items[0].total;
    for (std::size_t b = 1; b < items.size(); ++b) total = total + items[b].total;
    total = numerics::scale(total, 1.0 / static_cast<double>(items.size()));

    TraceRow row;
    row.step = st.step + 1;
    row.total = graph.forward(total).item();
    const double inv = 1.0 / static_cast<double>(items.size());
    for (const ItemLoss& l : items) {
      row.vlb += graph.value(l.vlb).item() * inv;
      if (l.rec.graph) row.rec += graph.value(l.rec).item() * inv;
      if (l.phy.graph) row.phy += graph.value(l.phy).item() * inv;
    }
    auto abort = [&](const std::string& why) {
      if (on_checkpoint) on_checkpoint(st);
      throw NumericError("training aborted at step " + std::to_string(row.step) + ": " + why +
                         "; last good state kept at step " + std::to_string(st.step));
    };
    if (!std::isfinite(row.total)) abort("non-finite loss");

    const numerics::GradMap grads = graph.backward(total);
    numerics::ParamMap named;
    for (const auto& [name, var] : bound) {
      const auto g = grads.find(var.id);
      if (g != grads.end()) named.emplace(name, g->second);
    }
    try {
      numerics::adam_step(st.params.tensors, named, st.optim);
    } catch (const NumericError& e) {
      abort(e.what());
    }
    st.step = row.step;
    result.trace.push_back(row);
    if (config.checkpoint_every > 0 && on_checkpoint && st.step % config.checkpoint_every == 0) on_checkpoint(st);
  }
  return result;
}

}  // namespace kinodiff::diffusion
