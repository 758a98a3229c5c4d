#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common/random.hpp"
#include "nn/param_set.hpp"

namespace vidial::nn {

void init_normal(Matrix& m, double stddev, Rng& rng);
void init_xavier(Matrix& m, Rng& rng);

// y = x W + b, W is in x out.
struct Linear {
  ParamId weight = 0;
  ParamId bias = 0;
  bool has_bias = true;

  static Linear create(ParamSet& params, const std::string& prefix, Eigen::Index in, Eigen::Index out,
                       bool with_bias = true);
  void init(ParamSet& params, Rng& rng) const;

  Matrix forward(const ParamSet& p, const Matrix& x) const;
  // Accumulates parameter gradients into g and returns dL/dx.
  Matrix backward(const ParamSet& p, const Matrix& x, const Matrix& dy, ParamSet& g) const;
};

struct LayerNorm {
  ParamId gain = 0;
  ParamId bias = 0;
  static constexpr double kEps = 1e-5;

  struct Cache {
    Matrix xhat;
    Eigen::VectorXd inv_std;
  };

  static LayerNorm create(ParamSet& params, const std::string& prefix, Eigen::Index dim);
  void init(ParamSet& params) const;

  Matrix forward(const ParamSet& p, const Matrix& x, Cache* cache) const;
  Matrix backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const;
};

// tanh-approximated GELU; smooth everywhere, which keeps finite-difference
// checks free of kinks.
Matrix gelu(const Matrix& x);
Matrix gelu_backward(const Matrix& x, const Matrix& dy);

struct FeedForward {
  Linear in;
  Linear out;

  struct Cache {
    Matrix x;
    Matrix pre;
    Matrix act;
  };

  static FeedForward create(ParamSet& params, const std::string& prefix, Eigen::Index d_model, Eigen::Index hidden);
  void init(ParamSet& params, Rng& rng) const;

  Matrix forward(const ParamSet& p, const Matrix& x, Cache* cache) const;
  Matrix backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g) const;
};

// Key validity per memory row; empty span means every key is valid.
using KeyMask = std::span<const std::uint8_t>;

struct MultiHeadAttention {
  Linear q;
  Linear k;
  Linear v;
  Linear o;
  int heads = 1;

  struct Cache {
    Matrix xq;
    Matrix xkv;
    Matrix queries;
    Matrix keys;
    Matrix values;
    std::vector<Matrix> probs;  // one Lq x Lk matrix per head
    Matrix concat;
  };

  static MultiHeadAttention create(ParamSet& params, const std::string& prefix, Eigen::Index d_model, int heads);
  void init(ParamSet& params, Rng& rng) const;

  Matrix forward(const ParamSet& p, const Matrix& xq, const Matrix& xkv, KeyMask key_valid, bool causal,
                 Cache* cache) const;

  // Attention against keys/values that were projected ahead of time.
  Matrix attend(const ParamSet& p, const Matrix& queries, const Matrix& keys, const Matrix& values,
                KeyMask key_valid, bool causal, Cache* cache) const;

  void backward(const ParamSet& p, const Cache& cache, const Matrix& dy, ParamSet& g, Matrix& dxq,
                Matrix& dxkv) const;
};

// Inverted dropout mask (entries 0 or 1/(1-rate)); empty when inactive.
Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng* rng);
inline void apply_mask(Matrix& x, const Matrix& mask) {
  if (mask.size() != 0) x.array() *= mask.array();
}

// Row-wise log-softmax.
Matrix log_softmax_rows(const Matrix& logits);

}  // namespace vidial::nn
