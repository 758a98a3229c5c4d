#include "nn/transformer.hpp"

namespace vidial::nn {

EncoderStack::EncoderStack(ParamSet& params, const std::string& prefix, const StackConfig& cfg) : cfg_(cfg) {
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string base = prefix + ".layer" + std::to_string(i);
    layers_.push_back(Layer{LayerNorm::create(params, base + ".ln1", cfg.d_model),
                            MultiHeadAttention::create(params, base + ".attn", cfg.d_model, cfg.heads),
                            LayerNorm::create(params, base + ".ln2", cfg.d_model),
                            FeedForward::create(params, base + ".ffn", cfg.d_model, cfg.ffn_dim)});
  }
  final_norm_ = LayerNorm::create(params, prefix + ".final_norm", cfg.d_model);
}

void EncoderStack::init(ParamSet& params, Rng& rng) const {
  for (const auto& l : layers_) {
    l.ln1.init(params);
    l.attn.init(params, rng);
    l.ln2.init(params);
    l.ffn.init(params, rng);
  }
  final_norm_.init(params);
}

Matrix EncoderStack::forward(const ParamSet& p, const Matrix& x_in, KeyMask key_valid, Cache* cache,
                             Rng* dropout_rng) const {
  Matrix x = x_in;
  if (cache != nullptr) cache->layers.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    LayerCache* lc = cache != nullptr ? &cache->layers[i] : nullptr;

    Matrix h = l.ln1.forward(p, x, lc ? &lc->ln1 : nullptr);
    Matrix a = l.attn.forward(p, h, h, key_valid, false, lc ? &lc->attn : nullptr);
    Matrix mask = dropout_mask(a.rows(), a.cols(), cfg_.dropout, dropout_rng);
    apply_mask(a, mask);
    x += a;
    if (lc) lc->drop_attn = std::move(mask);

    h = l.ln2.forward(p, x, lc ? &lc->ln2 : nullptr);
    Matrix f = l.ffn.forward(p, h, lc ? &lc->ffn : nullptr);
    mask = dropout_mask(f.rows(), f.cols(), cfg_.dropout, dropout_rng);
    apply_mask(f, mask);
    x += f;
    if (lc) lc->drop_ffn = std::move(mask);
  }
  return final_norm_.forward(p, x, cache != nullptr ? &cache->final_norm : nullptr);
}

Matrix EncoderStack::backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const {
  Matrix dx = final_norm_.backward(p, cache.final_norm, dy, g);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    const LayerCache& lc = cache.layers[i];

    Matrix df = dx;
    apply_mask(df, lc.drop_ffn);
    dx += l.ln2.backward(p, lc.ln2, l.ffn.backward(p, lc.ffn, df, g), g);

    Matrix da = dx;
    apply_mask(da, lc.drop_attn);
    Matrix dq, dkv;
    l.attn.backward(p, lc.attn, da, g, dq, dkv);
    dq += dkv;
    dx += l.ln1.backward(p, lc.ln1, dq, g);
  }
  return dx;
}

DecoderStack::DecoderStack(ParamSet& params, const std::string& prefix, const StackConfig& cfg) : cfg_(cfg) {
  for (int i = 0; i < cfg.layers; ++i) {
    const std::string base = prefix + ".layer" + std::to_string(i);
    layers_.push_back(Layer{LayerNorm::create(params, base + ".ln1", cfg.d_model),
                            MultiHeadAttention::create(params, base + ".self_attn", cfg.d_model, cfg.heads),
                            LayerNorm::create(params, base + ".ln2", cfg.d_model),
                            MultiHeadAttention::create(params, base + ".cross_attn", cfg.d_model, cfg.heads),
                            LayerNorm::create(params, base + ".ln3", cfg.d_model),
                            FeedForward::create(params, base + ".ffn", cfg.d_model, cfg.ffn_dim)});
  }
  final_norm_ = LayerNorm::create(params, prefix + ".final_norm", cfg.d_model);
}

void DecoderStack::init(ParamSet& params, Rng& rng) const {
  for (const auto& l : layers_) {
    l.ln1.init(params);
    l.self_attn.init(params, rng);
    l.ln2.init(params);
    l.cross_attn.init(params, rng);
    l.ln3.init(params);
    l.ffn.init(params, rng);
  }
  final_norm_.init(params);
}

Matrix DecoderStack::forward(const ParamSet& p, const Matrix& y_in, const Matrix& memory, KeyMask key_valid,
                             Cache* cache, Rng* dropout_rng) const {
  Matrix y = y_in;
  if (cache != nullptr) cache->layers.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    LayerCache* lc = cache != nullptr ? &cache->layers[i] : nullptr;

    Matrix h = l.ln1.forward(p, y, lc ? &lc->ln1 : nullptr);
    Matrix a = l.self_attn.forward(p, h, h, {}, true, lc ? &lc->self_attn : nullptr);
    Matrix mask = dropout_mask(a.rows(), a.cols(), cfg_.dropout, dropout_rng);
    apply_mask(a, mask);
    y += a;
    if (lc) lc->drop_self = std::move(mask);

    h = l.ln2.forward(p, y, lc ? &lc->ln2 : nullptr);
    Matrix c = l.cross_attn.forward(p, h, memory, key_valid, false, lc ? &lc->cross_attn : nullptr);
    mask = dropout_mask(c.rows(), c.cols(), cfg_.dropout, dropout_rng);
    apply_mask(c, mask);
    y += c;
    if (lc) lc->drop_cross = std::move(mask);

    h = l.ln3.forward(p, y, lc ? &lc->ln3 : nullptr);
    Matrix f = l.ffn.forward(p, h, lc ? &lc->ffn : nullptr);
    mask = dropout_mask(f.rows(), f.cols(), cfg_.dropout, dropout_rng);
    apply_mask(f, mask);
    y += f;
    if (lc) lc->drop_ffn = std::move(mask);
  }
  return final_norm_.forward(p, y, cache != nullptr ? &cache->final_norm : nullptr);
}

Matrix DecoderStack::backward(const ParamSet& p, const Cache& cache, const Matrix& dy_out, ParamSet& g,
                              Matrix& dmemory) const {
  Matrix dy = final_norm_.backward(p, cache.final_norm, dy_out, g);
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const Layer& l = layers_[i];
    const LayerCache& lc = cache.layers[i];

    Matrix df = dy;
    apply_mask(df, lc.drop_ffn);
    dy += l.ln3.backward(p, lc.ln3, l.ffn.backward(p, lc.ffn, df, g), g);

    Matrix dc = dy;
    apply_mask(dc, lc.drop_cross);
    Matrix dq, dmem;
    l.cross_attn.backward(p, lc.cross_attn, dc, g, dq, dmem);
    dmemory += dmem;
    dy += l.ln2.backward(p, lc.ln2, dq, g);

    Matrix da = dy;
    apply_mask(da, lc.drop_self);
    Matrix dkv;
    l.self_attn.backward(p, lc.self_attn, da, g, dq, dkv);
    dq += dkv;
    dy += l.ln1.backward(p, lc.ln1, dq, g);
  }
  return dy;
}

DecoderStack::Memory DecoderStack::prepare_memory(const ParamSet& p, const Matrix& memory, KeyMask key_valid) const {
  Memory m;
  for (const auto& l : layers_) {
    m.keys.push_back(l.cross_attn.k.forward(p, memory));
    m.values.push_back(l.cross_attn.v.forward(p, memory));
  }
  m.key_valid.assign(key_valid.begin(), key_valid.end());
  return m;
}

Matrix DecoderStack::forward_inference(const ParamSet& p, const Matrix& y_in, const Memory& memory) const {
  Matrix y = y_in;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const Layer& l = layers_[i];
    Matrix h = l.ln1.forward(p, y, nullptr);
    y += l.self_attn.forward(p, h, h, {}, true, nullptr);
    h = l.ln2.forward(p, y, nullptr);
    y += l.cross_attn.attend(p, l.cross_attn.q.forward(p, h), memory.keys[i], memory.values[i], memory.key_valid,
                             false, nullptr);
    h = l.ln3.forward(p, y, nullptr);
    y += l.ffn.forward(p, h, nullptr);
  }
  return final_norm_.forward(p, y, nullptr);
}

}  // namespace vidial::nn
