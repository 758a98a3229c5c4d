#include "seqmodel/trainer.hpp"

#include <cmath>
#include <numeric>

#include "common/error.hpp"
#include "common/random.hpp"

namespace vidial {

std::vector<TrainingExample> forward_examples(const Dataset& dataset, const ModelConfig& cfg,
                                              const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects) {
  std::vector<TrainingExample> out;
  for (const ItemRef& item : enumerate_items(dataset)) {
    const Episode& ep = dataset.episodes[item.episode];
    TrainingExample ex{assemble(ep, item.j, cfg, coarse, objects), ep.turns[item.j].tokens};
    if (static_cast<int>(ex.target.size()) > cfg.max_tgt_len) ex.target.resize(static_cast<std::size_t>(cfg.max_tgt_len));
    out.push_back(std::move(ex));
  }
  return out;
}

TrainResult train_seq2seq(const Seq2Seq& net, std::span<const TrainingExample> examples, const TrainOptions& options,
                          const nn::ParamSet* init, const StepCallback& on_step) {
  if (examples.empty()) fail(ErrorCode::EmptyDataset, "no training examples");
  if (options.batch_size < 1 || options.max_steps < 0) fail(ErrorCode::Usage, "batch_size and max_steps must be positive");

  TrainResult result;
  result.params = init != nullptr ? *init : net.init_params(options.seed);
  if (!result.params.same_layout(net.layout())) fail(ErrorCode::Usage, "initial parameters do not match the model");
  nn::Adam adam(result.params, options.adam);
  nn::ParamSet grads = net.layout().zeros_like();

  Rng order_rng(mix_seed(options.seed, 0x6f72646572ULL));
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  for (int step = 1; step <= options.max_steps; ++step) {
    std::vector<std::size_t> batch;
    while (batch.size() < static_cast<std::size_t>(options.batch_size)) {
      if (cursor == order.size()) {
        order_rng.shuffle(std::span<std::size_t>(order));
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
      if (batch.size() == examples.size()) break;
    }
    std::size_t tokens = 0;
    for (std::size_t i : batch) tokens += examples[i].target.size() + 1;

    grads.set_zero();
    Rng dropout_rng(mix_seed(options.seed, static_cast<std::uint64_t>(step)));
    double loss = 0.0;
    for (std::size_t i : batch) {
      loss += net.nll_and_gradient(result.params, examples[i].source, examples[i].target,
                                   1.0 / static_cast<double>(tokens), grads, &dropout_rng);
    }
    loss /= static_cast<double>(tokens);
    if (!std::isfinite(loss) || !grads.all_finite()) {
      fail(ErrorCode::NumericFailure, "non-finite loss at step " + std::to_string(step));
    }
    adam.step(result.params, grads);
    result.params.round_to_float();
    result.loss_curve.push_back(loss);
    if (on_step) on_step(step, loss);
  }
  return result;
}

TrainResult train_forward(const Dataset& dataset, const ModelConfig& cfg, const TrainOptions& options,
                          const CoarseFeatureStore* coarse, const ObjectFeatureStore* objects,
                          const StepCallback& on_step) {
  if (dataset.episodes.empty()) fail(ErrorCode::EmptyDataset, "dataset has no episodes");
  const Seq2Seq net(cfg);
  const auto examples = forward_examples(dataset, cfg, coarse, objects);
  return train_seq2seq(net, examples, options, nullptr, on_step);
}

double mean_token_nll(const Seq2Seq& net, const nn::ParamSet& params, std::span<const TrainingExample> examples) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const auto& ex : examples) {
    for (double lp : net.token_log_probs(params, ex.source, ex.target)) total -= lp;
    tokens += ex.target.size() + 1;
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

}  // namespace vidial
