#include "seqmodel/seq2seq.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace vidial {

namespace {
constexpr double kEmbedStd = 0.1;
}

std::vector<TokenId> with_bos(std::span<const TokenId> target) {
  std::vector<TokenId> out;
  out.reserve(target.size() + 1);
  out.push_back(special::kBos);
  out.insert(out.end(), target.begin(), target.end());
  return out;
}

Seq2Seq::Seq2Seq(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int d = cfg_.d_model;
  token_embed_ = layout_.add("embed.token", cfg_.vocab_size, d);
  position_embed_ = layout_.add("embed.position", cfg_.max_src_len, d);
  sentence_embed_ = layout_.add("embed.sentence", cfg_.max_turns + 2, d);
  image_embed_ = layout_.add("embed.image", cfg_.max_turns + 2, d);
  if (cfg_.d_visual > 0) visual_proj_ = layout_.add("embed.visual_proj", cfg_.d_visual, d);
  target_position_embed_ = layout_.add("embed.target_position", cfg_.max_tgt_len + 1, d);
  encoder_ = nn::EncoderStack(layout_, "enc", cfg_.encoder_stack());
  decoder_ = nn::DecoderStack(layout_, "dec", cfg_.decoder_stack());
  output_ = nn::Linear::create(layout_, "out", d, cfg_.vocab_size);
}

nn::ParamSet Seq2Seq::init_params(std::uint64_t seed) const {
  nn::ParamSet p = layout_.zeros_like();
  Rng rng(seed);
  nn::init_normal(p[token_embed_], kEmbedStd, rng);
  nn::init_normal(p[position_embed_], kEmbedStd, rng);
  nn::init_normal(p[sentence_embed_], kEmbedStd, rng);
  nn::init_normal(p[image_embed_], kEmbedStd, rng);
  if (cfg_.d_visual > 0) nn::init_xavier(p[visual_proj_], rng);
  nn::init_normal(p[target_position_embed_], kEmbedStd, rng);
  encoder_.init(p, rng);
  decoder_.init(p, rng);
  output_.init(p, rng);
  p.round_to_float();
  return p;
}

nn::Matrix Seq2Seq::additive_visual(const nn::ParamSet& p, const ContextAssembly& a) const {
  nn::Matrix out = nn::Matrix::Zero(static_cast<Eigen::Index>(a.size()), cfg_.d_model);
  if (cfg_.d_visual == 0) return out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.additive_row[i] >= 0) out.row(static_cast<Eigen::Index>(i)) = a.visuals.row(a.additive_row[i]) * p[visual_proj_];
  }
  return out;
}

nn::Matrix Seq2Seq::embed_source(const nn::ParamSet& p, const ContextAssembly& a) const {
  const auto len = static_cast<Eigen::Index>(a.size());
  if (len > cfg_.max_src_len) fail(ErrorCode::Usage, "assembly longer than max_src_len");
  if (a.mode != cfg_.mode) fail(ErrorCode::ModeMismatch, "assembly mode does not match the model");
  const bool has_visual = cfg_.d_visual > 0;
  if (has_visual && a.visuals.rows() > 0 && a.visuals.cols() != cfg_.d_visual) {
    fail(ErrorCode::DimMismatch, "assembly visual rows have the wrong dimension");
  }
  nn::Matrix x(len, cfg_.d_model);
  for (Eigen::Index i = 0; i < len; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (a.ids[u] == kVisualSlot) {
      if (!has_visual) fail(ErrorCode::ModeMismatch, "visual slot in a model without visual projection");
      x.row(i).noalias() = a.visuals.row(a.content_row[u]) * p[visual_proj_];
    } else {
      x.row(i) = p[token_embed_].row(a.ids[u]);
    }
    x.row(i) += p[position_embed_].row(i);
    x.row(i) += p[sentence_embed_].row(a.turn_index[u]);
    if (a.image_index[u] > 0) x.row(i) += p[image_embed_].row(a.image_index[u]);
    if (a.additive_row[u] >= 0 && has_visual) x.row(i).noalias() += a.visuals.row(a.additive_row[u]) * p[visual_proj_];
  }
  return x;
}

nn::Matrix Seq2Seq::embed_target(const nn::ParamSet& p, std::span<const TokenId> decoder_input) const {
  const auto len = static_cast<Eigen::Index>(decoder_input.size());
  if (len > cfg_.max_tgt_len + 1) fail(ErrorCode::Usage, "decoder input longer than max_tgt_len + 1");
  nn::Matrix y(len, cfg_.d_model);
  for (Eigen::Index t = 0; t < len; ++t) {
    y.row(t) = p[token_embed_].row(decoder_input[static_cast<std::size_t>(t)]) + p[target_position_embed_].row(t);
  }
  return y;
}

TextEncoding Seq2Seq::encode(const nn::ParamSet& p, const ContextAssembly& a) const {
  return encoder_.forward(p, embed_source(p, a), a.valid, nullptr, nullptr);
}

nn::Matrix Seq2Seq::decoder_logits(const nn::ParamSet& p, const ContextAssembly& a,
                                   std::span<const TokenId> decoder_input) const {
  const TextEncoding memory = encode(p, a);
  const nn::Matrix h = decoder_.forward(p, embed_target(p, decoder_input), memory, a.valid, nullptr, nullptr);
  return output_.forward(p, h);
}

void Seq2Seq::check_target(std::span<const TokenId> target) const {
  if (target.empty()) fail(ErrorCode::EmptyTarget, "target utterance is empty");
  if (static_cast<int>(target.size()) > cfg_.max_tgt_len) {
    fail(ErrorCode::Usage, "target longer than max_tgt_len (" + std::to_string(cfg_.max_tgt_len) + ")");
  }
}

std::vector<double> Seq2Seq::token_log_probs(const nn::ParamSet& p, const ContextAssembly& a,
                                             std::span<const TokenId> target) const {
  check_target(target);
  const auto input = with_bos(target);
  const nn::Matrix logp = nn::log_softmax_rows(decoder_logits(p, a, input));
  std::vector<double> out(target.size() + 1);
  for (std::size_t t = 0; t <= target.size(); ++t) {
    const TokenId gold = t < target.size() ? target[t] : special::kEos;
    out[t] = logp(static_cast<Eigen::Index>(t), gold);
  }
  return out;
}

double Seq2Seq::sequence_nll(const nn::ParamSet& p, const ContextAssembly& a, std::span<const TokenId> target) const {
  const auto logp = token_log_probs(p, a, target);
  double sum = 0.0;
  for (double v : logp) sum -= v;
  return sum / static_cast<double>(logp.size());
}

std::vector<TokenId> Seq2Seq::teacher_forced_argmax(const nn::ParamSet& p, const ContextAssembly& a,
                                                    std::span<const TokenId> target) const {
  check_target(target);
  const nn::Matrix logits = decoder_logits(p, a, with_bos(target));
  std::vector<TokenId> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::Index best = 0;
    logits.row(t).maxCoeff(&best);
    out[static_cast<std::size_t>(t)] = static_cast<TokenId>(best);
  }
  return out;
}

double Seq2Seq::nll_and_gradient(const nn::ParamSet& p, const ContextAssembly& a, std::span<const TokenId> target,
                                 double grad_scale, nn::ParamSet& g, Rng* dropout_rng) const {
  check_target(target);
  const auto input = with_bos(target);

  nn::Matrix src = embed_source(p, a);
  const nn::Matrix src_mask = nn::dropout_mask(src.rows(), src.cols(), cfg_.dropout, dropout_rng);
  nn::apply_mask(src, src_mask);
  nn::EncoderStack::Cache enc_cache;
  const nn::Matrix memory = encoder_.forward(p, src, a.valid, &enc_cache, dropout_rng);

  nn::Matrix tgt = embed_target(p, input);
  const nn::Matrix tgt_mask = nn::dropout_mask(tgt.rows(), tgt.cols(), cfg_.dropout, dropout_rng);
  nn::apply_mask(tgt, tgt_mask);
  nn::DecoderStack::Cache dec_cache;
  const nn::Matrix h = decoder_.forward(p, tgt, memory, a.valid, &dec_cache, dropout_rng);
  const nn::Matrix logits = output_.forward(p, h);
  const nn::Matrix logp = nn::log_softmax_rows(logits);

  // d(-log softmax)/dlogits = softmax - onehot
  double loss = 0.0;
  nn::Matrix dlogits = logp.array().exp();
  for (std::size_t t = 0; t < input.size(); ++t) {
    const TokenId gold = t < target.size() ? target[t] : special::kEos;
    const auto row = static_cast<Eigen::Index>(t);
    loss -= logp(row, gold);
    dlogits(row, gold) -= 1.0;
  }
  dlogits *= grad_scale;

  const nn::Matrix dh = output_.backward(p, h, dlogits, g);
  nn::Matrix dmemory = nn::Matrix::Zero(memory.rows(), memory.cols());
  nn::Matrix dtgt = decoder_.backward(p, dec_cache, dh, g, dmemory);
  nn::apply_mask(dtgt, tgt_mask);
  for (std::size_t t = 0; t < input.size(); ++t) {
    const auto row = static_cast<Eigen::Index>(t);
    g[token_embed_].row(input[t]) += dtgt.row(row);
    g[target_position_embed_].row(row) += dtgt.row(row);
  }

  nn::Matrix dsrc = encoder_.backward(p, enc_cache, dmemory, g);
  nn::apply_mask(dsrc, src_mask);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (a.ids[i] == kVisualSlot) {
      g[visual_proj_].noalias() += a.visuals.row(a.content_row[i]).transpose() * dsrc.row(row);
    } else {
      g[token_embed_].row(a.ids[i]) += dsrc.row(row);
    }
    g[position_embed_].row(row) += dsrc.row(row);
    g[sentence_embed_].row(a.turn_index[i]) += dsrc.row(row);
    if (a.image_index[i] > 0) g[image_embed_].row(a.image_index[i]) += dsrc.row(row);
    if (a.additive_row[i] >= 0 && cfg_.d_visual > 0) {
      g[visual_proj_].noalias() += a.visuals.row(a.additive_row[i]).transpose() * dsrc.row(row);
    }
  }
  return loss;
}

Seq2Seq::DecodeState Seq2Seq::start_decoding(const nn::ParamSet& p, const ContextAssembly& a) const {
  return DecodeState{decoder_.prepare_memory(p, encode(p, a), a.valid)};
}

nn::RowVector Seq2Seq::next_log_probs(const nn::ParamSet& p, const DecodeState& state,
                                      std::span<const TokenId> prefix) const {
  const nn::Matrix h = decoder_.forward_inference(p, embed_target(p, prefix), state.memory);
  nn::Matrix last = output_.forward(p, h.bottomRows(1));
  return nn::log_softmax_rows(last).row(0);
}

}  // namespace vidial
