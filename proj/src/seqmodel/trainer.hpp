#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "corpus/dataset.hpp"
#include "nn/adam.hpp"
#include "seqmodel/seq2seq.hpp"

namespace vidial {

struct TrainOptions {
  nn::AdamConfig adam;
  int max_steps = 2000;
  int batch_size = 16;
  std::uint64_t seed = 1;
};

struct TrainingExample {
  ContextAssembly source;
  std::vector<TokenId> target;
};

struct TrainResult {
  nn::ParamSet params;
  std::vector<double> loss_curve;  // mean per-token NLL of each step's batch
};

// Called after each optimizer step with (step, batch loss).
using StepCallback = std::function<void(int, double)>;

// One example per (episode, j), 1 <= j < n: source from turns 1..j (and
// images), target x_{j+1} clipped to max_tgt_len.
std::vector<TrainingExample> forward_examples(const Dataset& dataset, const ModelConfig& cfg,
                                              const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects);

// Adam with inverse-square-root decay over seed-shuffled batches. Starts from
// `init` when given, otherwise from net.init_params(seed).
TrainResult train_seq2seq(const Seq2Seq& net, std::span<const TrainingExample> examples, const TrainOptions& options,
                          const nn::ParamSet* init = nullptr, const StepCallback& on_step = {});

TrainResult train_forward(const Dataset& dataset, const ModelConfig& cfg, const TrainOptions& options,
                          const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects,
                          const StepCallback& on_step = {});

// Token-weighted mean NLL with dropout off.
double mean_token_nll(const Seq2Seq& net, const nn::ParamSet& params, std::span<const TrainingExample> examples);

}  // namespace vidial
