#include "mi/backward_model.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace vidial {

namespace {

std::span<const TokenId> clip_target(std::span<const TokenId> tokens, const ModelConfig& cfg) {
  return tokens.first(std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(cfg.max_tgt_len)));
}

}  // namespace

std::vector<TrainingExample> backward_examples(const Dataset& dataset, const ModelConfig& cfg) {
  if (cfg.mode != Mode::NV) fail(ErrorCode::ModeMismatch, "the backward model runs in NV mode");
  std::vector<TrainingExample> out;
  for (const ItemRef& item : enumerate_items(dataset)) {
    const Episode& ep = dataset.episodes[item.episode];
    const auto& prev = ep.turns[item.j - 1].tokens;
    const auto target = clip_target(prev, cfg);
    out.push_back({assemble_utterance(ep.turns[item.j].tokens, cfg), {target.begin(), target.end()}});
  }
  return out;
}

TrainResult train_backward(const Dataset& dataset, const ModelConfig& cfg, const TrainOptions& options,
                           const StepCallback& on_step) {
  if (dataset.episodes.empty()) fail(ErrorCode::EmptyDataset, "dataset has no episodes");
  const Seq2Seq net(cfg);
  const auto examples = backward_examples(dataset, cfg);
  return train_seq2seq(net, examples, options, nullptr, on_step);
}

double backward_score(const Seq2Seq& net, const nn::ParamSet& params, std::span<const TokenId> x_next,
                      std::span<const TokenId> x_prev) {
  if (x_next.empty() || x_prev.empty()) fail(ErrorCode::EmptyUtterance, "backward score needs two utterances");
  const auto source = assemble_utterance(x_next, net.config());
  const auto log_probs = net.token_log_probs(params, source, clip_target(x_prev, net.config()));
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < log_probs.size(); ++i) total += log_probs[i];
  return total;
}

}  // namespace vidial
