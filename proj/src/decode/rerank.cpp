#include "decode/rerank.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "common/error.hpp"
#include "mi/backward_model.hpp"

namespace vidial {

void RerankWeights::validate() const {
  for (double w : {forward, backward, visual}) {
    if (!std::isfinite(w) || w < 0.0) fail(ErrorCode::InvalidWeights, "rerank weights must be non-negative");
  }
  if (std::abs(forward + backward + visual - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidWeights, "rerank weights must sum to 1");
  }
}

RerankWeights parse_weights(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string piece(text.substr(start, comma - start));
    try {
      std::size_t used = 0;
      values.push_back(std::stod(piece, &used));
      if (used != piece.size()) throw std::invalid_argument(piece);
    } catch (const std::exception&) {
      fail(ErrorCode::InvalidWeights, "cannot parse weight '" + piece + "'");
    }
    start = comma + 1;
  }
  if (values.size() != 3) fail(ErrorCode::InvalidWeights, "expected three comma-separated weights");
  RerankWeights w{values[0], values[1], values[2]};
  w.validate();
  return w;
}

RerankChoice rerank(std::span<const Hypothesis> nbest, const RerankWeights& weights, const ScoredModel& backward,
                    const ScoredDiscriminator& disc, const RerankVisual& visual, std::span<const TokenId> x_prev,
                    Mode mode) {
  if (nbest.empty()) fail(ErrorCode::EmptyNBest, "nothing to rerank");
  weights.validate();
  const bool objects = std::holds_alternative<ObjectVisual>(visual);
  if (mode == Mode::NV || (mode == Mode::FV) != objects) {
    fail(ErrorCode::ModeMismatch, "visual input does not match the reranking mode");
  }
  if (weights.backward > 0.0 && (backward.net == nullptr || backward.params == nullptr)) {
    fail(ErrorCode::Usage, "backward weight set without a backward model");
  }
  if (weights.visual > 0.0 && (disc.disc == nullptr || disc.params == nullptr)) {
    fail(ErrorCode::Usage, "visual weight set without a discriminator");
  }
  nn::RowVector f;
  if (weights.visual > 0.0) {
    f = objects ? mean_pool_objects(std::get<ObjectVisual>(visual).objects) : std::get<CoarseVisual>(visual).f;
  }

  RerankChoice choice;
  for (std::size_t i = 0; i < nbest.size(); ++i) {
    const auto x = strip_eos(nbest[i].tokens);
    double score = weights.forward * nbest[i].forward_logprob;
    if (weights.backward > 0.0 || weights.visual > 0.0) {
      if (x.empty()) {
        score = -std::numeric_limits<double>::infinity();
      } else {
        if (weights.backward > 0.0) score += weights.backward * backward_score(*backward.net, *backward.params, x, x_prev);
        if (weights.visual > 0.0) score += weights.visual * disc.disc->q_score(*disc.params, x, f);
      }
    }
    choice.scores.push_back(score);
    if (i == 0 || score > choice.score) {
      choice.index = i;
      choice.score = score;
    }
  }
  return choice;
}

}  // namespace vidial
