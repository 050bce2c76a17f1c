#pragma once

#include <cmath>
#include <cstddef>
#include <unordered_map>
#include <vector>

#include "tfd/core.hpp"
#include "tfd/nn/model.hpp"
#include "tfd/parallel.hpp"

namespace tfd::nn {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  RngSeed rng{0};

  void validate() const {
    if (epochs == 0 || batch_size == 0)
      fail(ErrorKind::InvalidConfig, "epochs and batch_size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
      fail(ErrorKind::InvalidConfig, "learning_rate must be finite and nonnegative");
    if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0 || epsilon <= 0.0)
      fail(ErrorKind::InvalidConfig, "moment decays must lie in [0,1), epsilon > 0");
  }

  bool operator==(const TrainConfig&) const = default;
};

struct TrainResult {
  ModelParams params;
  std::vector<double> epoch_losses;
};

namespace detail {

// Per-pair loss gradients, aligned with the trainer's parameter list.
struct PairGrads {
  std::vector<Tensor> grads;
  double loss = 0.0;
};

inline PairGrads pair_gradients(const ModelParams& params, const BranchInputs& inputs,
                                double label,
                                const std::unordered_map<const Tensor*, std::size_t>& slot_of,
                                const std::vector<Tensor*>& plist) {
  Graph g;
  Graph::NodeId logit = build_logit(g, params, inputs);
  Graph::NodeId loss = g.bce_with_logits(logit, label);
  g.backward(loss);
  PairGrads out;
  out.loss = g.value(loss).data[0];
  out.grads.reserve(plist.size());
  for (const Tensor* p : plist) out.grads.push_back(Tensor::zeros_like(*p));
  for (const auto& [storage, id] : g.param_bindings()) {
    auto it = slot_of.find(storage);
    if (it == slot_of.end()) continue;
    const Tensor& grad = g.grad(id);
    Tensor& acc = out.grads[it->second];
    for (std::size_t i = 0; i < grad.numel(); ++i) acc.data[i] += grad.data[i];
  }
  return out;
}

}  // namespace detail

/// Minimizes mean binary cross-entropy between model_score and pair labels
/// with adaptive-moment gradient descent. Deterministic under the seed: the
/// shuffle order is drawn from it, per-pair gradients are computed
/// independently (possibly in parallel) and summed in pair order.
inline TrainResult train(const std::vector<WindowPair>& pairs, ModelParams params,
                         const TrainConfig& tcfg, double lambda) {
  tcfg.validate();
  params.config.validate();
  if (pairs.empty()) fail(ErrorKind::EmptyTrainingSet, "no training pairs");

  // Encoder inputs do not depend on parameters; build them once.
  std::vector<BranchInputs> inputs(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    inputs[i] = prepare_branch_inputs(pairs[i], lambda, params.config);
  });

  std::vector<Tensor*> plist = params.parameters();
  std::unordered_map<const Tensor*, std::size_t> slot_of;
  for (std::size_t i = 0; i < plist.size(); ++i) slot_of[plist[i]] = i;

  std::vector<Tensor> m, v, sum_grads;
  m.reserve(plist.size());
  v.reserve(plist.size());
  sum_grads.reserve(plist.size());
  for (Tensor* p : plist) {
    m.push_back(Tensor::zeros_like(*p));
    v.push_back(Tensor::zeros_like(*p));
    sum_grads.push_back(Tensor::zeros_like(*p));
  }

  Rng rng(tcfg.rng);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainResult result;
  result.epoch_losses.reserve(tcfg.epochs);
  std::vector<detail::PairGrads> batch_grads(tcfg.batch_size);
  std::size_t step = 0;

  for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += tcfg.batch_size) {
      const std::size_t count = std::min(tcfg.batch_size, order.size() - begin);
      parallel_for(count, [&](std::size_t i) {
        const WindowPair& pair = pairs[order[begin + i]];
        batch_grads[i] = detail::pair_gradients(
            params, inputs[order[begin + i]], static_cast<double>(pair.label), slot_of, plist);
      });

      ++step;
      // batch mean gradient, summed in pair order
      for (std::size_t p = 0; p < plist.size(); ++p) {
        Tensor& acc = sum_grads[p];
        for (double& g : acc.data) g = 0.0;
        for (std::size_t b = 0; b < count; ++b) {
          const Tensor& grad = batch_grads[b].grads[p];
          for (std::size_t i = 0; i < grad.numel(); ++i) acc.data[i] += grad.data[i];
        }
      }
      const double scale = 1.0 / static_cast<double>(count);
      const double bc1 = 1.0 - std::pow(tcfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(tcfg.beta2, static_cast<double>(step));
      for (std::size_t p = 0; p < plist.size(); ++p) {
        Tensor& theta = *plist[p];
        Tensor& mp = m[p];
        Tensor& vp = v[p];
        const Tensor& acc = sum_grads[p];
        for (std::size_t i = 0; i < theta.numel(); ++i) {
          const double grad = acc.data[i] * scale;
          mp.data[i] = tcfg.beta1 * mp.data[i] + (1.0 - tcfg.beta1) * grad;
          vp.data[i] = tcfg.beta2 * vp.data[i] + (1.0 - tcfg.beta2) * grad * grad;
          const double mhat = mp.data[i] / bc1;
          const double vhat = vp.data[i] / bc2;
          theta.data[i] -= tcfg.learning_rate * mhat / (std::sqrt(vhat) + tcfg.epsilon);
        }
      }
      for (std::size_t b = 0; b < count; ++b) epoch_loss += batch_grads[b].loss;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(order.size()));
  }
  result.params = std::move(params);
  return result;
}

}  // namespace tfd::nn
