#pragma once

#include <string>
#include <vector>

#include "nn/layers.hpp"

namespace vidial::nn {

struct StackConfig {
  int layers = 3;
  int d_model = 512;
  int heads = 8;
  int ffn_dim = 2048;
  double dropout = 0.1;
};

// Pre-norm encoder: x += SelfAttn(LN(x)); x += FFN(LN(x)); final LN.
class EncoderStack {
 public:
  struct LayerCache {
    LayerNorm::Cache ln1;
    MultiHeadAttention::Cache attn;
    Matrix drop_attn;
    LayerNorm::Cache ln2;
    FeedForward::Cache ffn;
    Matrix drop_ffn;
  };
  struct Cache {
    std::vector<LayerCache> layers;
    LayerNorm::Cache final_norm;
  };

  EncoderStack() = default;
  EncoderStack(ParamSet& params, const std::string& prefix, const StackConfig& cfg);

  void init(ParamSet& params, Rng& rng) const;

  // dropout_rng == nullptr disables dropout.
  Matrix forward(const ParamSet& p, const Matrix& x, KeyMask key_valid, Cache* cache, Rng* dropout_rng) const;
  Matrix backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const;

  const StackConfig& config() const { return cfg_; }

 private:
  struct Layer {
    LayerNorm ln1;
    MultiHeadAttention attn;
    LayerNorm ln2;
    FeedForward ffn;
  };
  StackConfig cfg_;
  std::vector<Layer> layers_;
  LayerNorm final_norm_;
};

// Pre-norm decoder with causal self-attention and cross-attention over an
// encoder memory; final LN.
class DecoderStack {
 public:
  struct LayerCache {
    LayerNorm::Cache ln1;
    MultiHeadAttention::Cache self_attn;
    Matrix drop_self;
    LayerNorm::Cache ln2;
    MultiHeadAttention::Cache cross_attn;
    Matrix drop_cross;
    LayerNorm::Cache ln3;
    FeedForward::Cache ffn;
    Matrix drop_ffn;
  };
  struct Cache {
    std::vector<LayerCache> layers;
    LayerNorm::Cache final_norm;
  };

  // Cross-attention keys/values projected once per source for decoding.
  struct Memory {
    std::vector<Matrix> keys;
    std::vector<Matrix> values;
    std::vector<std::uint8_t> key_valid;
  };

  DecoderStack() = default;
  DecoderStack(ParamSet& params, const std::string& prefix, const StackConfig& cfg);

  void init(ParamSet& params, Rng& rng) const;

  Matrix forward(const ParamSet& p, const Matrix& y, const Matrix& memory, KeyMask key_valid, Cache* cache,
                 Rng* dropout_rng) const;
  // Returns dL/dy; adds dL/dmemory into dmemory.
  Matrix backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g, Matrix& dmemory) const;

  Memory prepare_memory(const ParamSet& p, const Matrix& memory, KeyMask key_valid) const;
  Matrix forward_inference(const ParamSet& p, const Matrix& y, const Memory& memory) const;

 private:
  struct Layer {
    LayerNorm ln1;
    MultiHeadAttention self_attn;
    LayerNorm ln2;
    MultiHeadAttention cross_attn;
    LayerNorm ln3;
    FeedForward ffn;
  };
  StackConfig cfg_;
  std::vector<Layer> layers_;
  LayerNorm final_norm_;
};

}  // namespace vidial::nn
