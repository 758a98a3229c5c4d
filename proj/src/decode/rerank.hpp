#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <variant>

#include "decode/beam_search.hpp"
#include "mi/discriminator.hpp"

namespace vidial {

struct RerankWeights {
  double forward = 0.8;
  double backward = 0.1;
  double visual = 0.1;

  // Each weight >= 0 and the sum within 1e-9 of 1; InvalidWeights otherwise.
  void validate() const;
  bool forward_only() const { return backward == 0.0 && visual == 0.0; }
};

RerankWeights parse_weights(std::string_view text);  // "a,b,c"

struct ScoredModel {
  const Seq2Seq* net = nullptr;
  const nn::ParamSet* params = nullptr;
};

struct ScoredDiscriminator {
  const Discriminator* disc = nullptr;
  const nn::ParamSet* params = nullptr;
};

// The image the reranked turn must match: a coarse vector (CV) or an object
// set that is mean-pooled first (FV).
struct CoarseVisual {
  nn::RowVector f;
};
struct ObjectVisual {
  nn::Matrix objects;
};
using RerankVisual = std::variant<CoarseVisual, ObjectVisual>;

struct RerankChoice {
  std::size_t index = 0;
  double score = 0.0;
  std::vector<double> scores;  // per hypothesis
};

// argmax over the N-best of
//   λ1 forward_logprob + λ2 backward_score(x, x_prev) + λ3 q_score(x, visual),
// ties going to the earlier rank. Terms with weight 0 are not evaluated.
RerankChoice rerank(std::span<const Hypothesis> nbest, const RerankWeights& weights, const ScoredModel& backward,
                    const ScoredDiscriminator& disc, const RerankVisual& visual, std::span<const TokenId> x_prev,
                    Mode mode);

}  // namespace vidial
