#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "common/random.hpp"
#include "nn/transformer.hpp"
#include "seqmodel/assembly.hpp"
#include "seqmodel/model_config.hpp"

namespace vidial {

// Encoder output: one d_model row per assembly position.
using TextEncoding = nn::Matrix;

// Encoder-decoder network over a ContextAssembly. The object holds the
// architecture (parameter layout and indices); parameter values live in a
// separate ParamSet so that forward passes stay pure.
class Seq2Seq {
 public:
  explicit Seq2Seq(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  const nn::ParamSet& layout() const { return layout_; }

  // Deterministic initialization; values are float32-representable.
  nn::ParamSet init_params(std::uint64_t seed) const;

  nn::Matrix embed_source(const nn::ParamSet& p, const ContextAssembly& a) const;
  // Projected additive visual vector per position (zero rows where none).
  nn::Matrix additive_visual(const nn::ParamSet& p, const ContextAssembly& a) const;

  TextEncoding encode(const nn::ParamSet& p, const ContextAssembly& a) const;

  // Logits for every position of decoder_input ([BOS] followed by tokens).
  nn::Matrix decoder_logits(const nn::ParamSet& p, const ContextAssembly& a,
                            std::span<const TokenId> decoder_input) const;

  // Mean per-token NLL (natural log) of target followed by [EOS].
  double sequence_nll(const nn::ParamSet& p, const ContextAssembly& a, std::span<const TokenId> target) const;

  // log p of each target token and the closing [EOS] (target.size() + 1 values).
  std::vector<double> token_log_probs(const nn::ParamSet& p, const ContextAssembly& a,
                                      std::span<const TokenId> target) const;

  // Teacher-forced argmax at every predicted position (target.size() + 1).
  std::vector<TokenId> teacher_forced_argmax(const nn::ParamSet& p, const ContextAssembly& a,
                                             std::span<const TokenId> target) const;

  // Summed NLL over target ⧺ [EOS]; adds grad_scale * d(sum)/dθ into grads.
  double nll_and_gradient(const nn::ParamSet& p, const ContextAssembly& a, std::span<const TokenId> target,
                          double grad_scale, nn::ParamSet& grads, Rng* dropout_rng = nullptr) const;

  struct DecodeState {
    nn::DecoderStack::Memory memory;
  };
  DecodeState start_decoding(const nn::ParamSet& p, const ContextAssembly& a) const;
  // Log-probabilities of the next token after `prefix` (which starts with [BOS]).
  nn::RowVector next_log_probs(const nn::ParamSet& p, const DecodeState& state,
                               std::span<const TokenId> prefix) const;

 private:
  nn::Matrix embed_target(const nn::ParamSet& p, std::span<const TokenId> decoder_input) const;
  void check_target(std::span<const TokenId> target) const;

  ModelConfig cfg_;
  nn::ParamSet layout_;
  nn::ParamId token_embed_ = 0;
  nn::ParamId position_embed_ = 0;
  nn::ParamId sentence_embed_ = 0;
  nn::ParamId image_embed_ = 0;
  nn::ParamId visual_proj_ = 0;
  nn::ParamId target_position_embed_ = 0;
  nn::EncoderStack encoder_;
  nn::DecoderStack decoder_;
  nn::Linear output_;
};

std::vector<TokenId> with_bos(std::span<const TokenId> target);

}  // namespace vidial
