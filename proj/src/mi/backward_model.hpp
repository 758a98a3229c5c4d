#pragma once

#include <span>
#include <vector>

#include "seqmodel/trainer.hpp"

namespace vidial {

// p(x_j | x_{j+1}): an NV seq2seq whose source is the single utterance
// "x_{j+1} [SEP]".
std::vector<TrainingExample> backward_examples(const Dataset& dataset, const ModelConfig& cfg);

// Trains on (x_{j+1} -> x_j) for every j >= 1. cfg.mode must be NV.
TrainResult train_backward(const Dataset& dataset, const ModelConfig& cfg, const TrainOptions& options,
                           const StepCallback& on_step = {});

// Sum of log p over the tokens of x_prev (no [EOS] term, no length
// normalization). x_prev is clipped to max_tgt_len as in training.
double backward_score(const Seq2Seq& net, const nn::ParamSet& params, std::span<const TokenId> x_next,
                      std::span<const TokenId> x_prev);

}  // namespace vidial
