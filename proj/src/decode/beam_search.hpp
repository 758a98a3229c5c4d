#pragma once

#include <cstddef>
#include <vector>

#include "seqmodel/seq2seq.hpp"

namespace vidial {

struct Hypothesis {
  std::vector<TokenId> tokens;  // no [BOS]; ends with [EOS] unless cut at max length
  double forward_logprob = 0.0;
};

using NBestList = std::vector<Hypothesis>;

// Sorted by log-prob descending, ties to the lexicographically smaller ids.
bool better_hypothesis(const Hypothesis& a, const Hypothesis& b);

// Content tokens without the trailing [EOS].
std::vector<TokenId> strip_eos(const std::vector<TokenId>& tokens);

struct BeamOptions {
  std::size_t beam_size = 5;
  std::size_t nbest = 5;
  int max_tgt_len = 0;  // generated tokens including [EOS]; 0 means the model's max_tgt_len
};

// Standard beam search with raw (unnormalized) log-prob sums. Special tokens
// other than [EOS] are never proposed. A hypothesis that reaches max_tgt_len
// tokens without [EOS] is completed as it stands.
NBestList beam_nbest(const Seq2Seq& net, const nn::ParamSet& params, const ContextAssembly& assembly,
                     const BeamOptions& options);

}  // namespace vidial
